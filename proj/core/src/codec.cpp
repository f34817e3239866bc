#include <bkio/codec.hpp>

#include <algorithm>
#include <cstring>
#include <limits>
#include <string>

#include <lz4.h>
#include <lz4hc.h>
#include <zlib.h>

#include <bkio/error.hpp>

namespace bkio {

namespace {

using Clock = std::chrono::steady_clock;

[[noreturn]] void codec_failure(Codec codec, const std::string& what)
{
    throw Error(ErrorCode::codec_failure, std::string(to_string(codec)) + ": " + what);
}

[[noreturn]] void corrupt(Codec codec, const std::string& what)
{
    throw Error(ErrorCode::corrupt_frame, std::string(to_string(codec)) + ": " + what);
}

[[noreturn]] void mismatch(Codec codec, std::size_t expected, const std::string& actual)
{
    throw Error(ErrorCode::size_mismatch, std::string(to_string(codec)) + ": expected " + std::to_string(expected)
                                              + " bytes, frame decodes to " + actual);
}

std::size_t deflate_into(std::span<const std::uint8_t> in, int level, std::vector<std::uint8_t>& out,
                         std::chrono::nanoseconds& elapsed)
{
    auto dest_len = static_cast<uLongf>(out.size());
    const auto start = Clock::now();
    const int rc = ::compress2(out.data(), &dest_len, in.data(), static_cast<uLong>(in.size()), level);
    elapsed = Clock::now() - start;
    if (rc != Z_OK) {
        codec_failure(Codec::deflate, "compress2 returned " + std::to_string(rc));
    }
    return dest_len;
}

void inflate_into(std::span<const std::uint8_t> frame, std::span<std::uint8_t> out)
{
    z_stream zs{};
    if (::inflateInit(&zs) != Z_OK) {
        codec_failure(Codec::deflate, "inflateInit failed");
    }
    struct Guard {
        z_stream* zs;
        ~Guard() { ::inflateEnd(zs); }
    } guard{&zs};

    zs.next_in = const_cast<Bytef*>(frame.data());
    zs.avail_in = static_cast<uInt>(frame.size());
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());

    int rc = ::inflate(&zs, Z_FINISH);
    if (rc == Z_STREAM_END) {
        if (zs.total_out != out.size()) {
            mismatch(Codec::deflate, out.size(), std::to_string(zs.total_out) + " bytes");
        }
        return;
    }
    if (rc == Z_DATA_ERROR || rc == Z_NEED_DICT || rc == Z_MEM_ERROR || rc == Z_STREAM_ERROR) {
        corrupt(Codec::deflate, zs.msg != nullptr ? zs.msg : "inflate error " + std::to_string(rc));
    }
    // Output is full but the stream has not ended: probe whether more data follows.
    if (zs.avail_out == 0) {
        std::uint8_t probe = 0;
        zs.next_out = &probe;
        zs.avail_out = 1;
        rc = ::inflate(&zs, Z_FINISH);
        if (zs.avail_out == 0) {
            mismatch(Codec::deflate, out.size(), "more bytes");
        }
        if (rc == Z_STREAM_END) {
            return;
        }
        if (rc == Z_DATA_ERROR) {
            corrupt(Codec::deflate, zs.msg != nullptr ? zs.msg : "invalid deflate data");
        }
    }
    corrupt(Codec::deflate, "frame ends before the deflate stream does");
}

void lz4_decompress_into(std::span<const std::uint8_t> frame, std::span<std::uint8_t> out, Codec codec)
{
    const int n = ::LZ4_decompress_safe(reinterpret_cast<const char*>(frame.data()), reinterpret_cast<char*>(out.data()),
                                        static_cast<int>(frame.size()), static_cast<int>(out.size()));
    if (n >= 0 && static_cast<std::size_t>(n) == out.size()) {
        return;
    }
    if (n >= 0) {
        mismatch(codec, out.size(), std::to_string(n) + " bytes");
    }
    // A negative result is either damage or an output larger than expected; retry
    // with headroom to tell them apart.
    const std::size_t roomy = std::min<std::size_t>(out.size() * 2 + 65536, std::numeric_limits<int>::max());
    std::vector<char> scratch(roomy);
    const int m = ::LZ4_decompress_safe(reinterpret_cast<const char*>(frame.data()), scratch.data(),
                                        static_cast<int>(frame.size()), static_cast<int>(roomy));
    if (m > 0 && static_cast<std::size_t>(m) > out.size()) {
        mismatch(codec, out.size(), std::to_string(m) + " bytes");
    }
    corrupt(codec, "LZ4_decompress_safe returned " + std::to_string(n));
}

} // namespace

Compressed compress(std::span<const std::uint8_t> payload, CompressionSpec spec)
{
    spec.validate();
    Compressed result;
    result.stats.bytes_in = payload.size();

    if (payload.size() > static_cast<std::size_t>(std::numeric_limits<int>::max())) {
        codec_failure(spec.codec, "payload too large");
    }

    std::size_t produced = 0;
    switch (spec.codec) {
    case Codec::none:
        break;
    case Codec::deflate: {
        result.bytes.resize(::compressBound(static_cast<uLong>(payload.size())));
        produced = deflate_into(payload, spec.level, result.bytes, result.stats.elapsed);
        break;
    }
    case Codec::lz4:
    case Codec::lz4hc: {
        const int bound = ::LZ4_compressBound(static_cast<int>(payload.size()));
        result.bytes.resize(static_cast<std::size_t>(bound));
        const auto* src = reinterpret_cast<const char*>(payload.data());
        auto* dst = reinterpret_cast<char*>(result.bytes.data());
        const auto start = Clock::now();
        const int n = spec.codec == Codec::lz4
                          ? ::LZ4_compress_default(src, dst, static_cast<int>(payload.size()), bound)
                          : ::LZ4_compress_HC(src, dst, static_cast<int>(payload.size()), bound, spec.level);
        result.stats.elapsed = Clock::now() - start;
        if (n <= 0) {
            codec_failure(spec.codec, "compression returned " + std::to_string(n));
        }
        produced = static_cast<std::size_t>(n);
        break;
    }
    }

    if (spec.codec == Codec::none || produced >= payload.size()) {
        result.bytes.assign(payload.begin(), payload.end());
        result.stored_as = CompressionSpec{Codec::none, 0};
    } else {
        result.bytes.resize(produced);
        result.stored_as = spec;
    }
    result.stats.bytes_out = result.bytes.size();
    return result;
}

CodecStats decompress_into(std::span<const std::uint8_t> frame, CompressionSpec spec, std::span<std::uint8_t> out)
{
    CodecStats stats;
    stats.bytes_in = frame.size();
    const auto start = Clock::now();
    switch (spec.codec) {
    case Codec::none:
        if (frame.size() != out.size()) {
            mismatch(Codec::none, out.size(), std::to_string(frame.size()) + " bytes");
        }
        if (!frame.empty()) {
            std::memcpy(out.data(), frame.data(), frame.size());
        }
        break;
    case Codec::deflate:
        inflate_into(frame, out);
        break;
    case Codec::lz4:
    case Codec::lz4hc:
        lz4_decompress_into(frame, out, spec.codec);
        break;
    default:
        codec_failure(spec.codec, "unknown codec");
    }
    stats.elapsed = Clock::now() - start;
    stats.bytes_out = out.size();
    return stats;
}

Decompressed decompress(std::span<const std::uint8_t> frame, CompressionSpec spec, std::size_t expected_size)
{
    Decompressed result;
    result.bytes.resize(expected_size);
    result.stats = decompress_into(frame, spec, result.bytes);
    return result;
}

std::vector<CodecRow> ratio_and_speed(std::span<const std::uint8_t> dataset, std::span<const CompressionSpec> specs,
                                      const RatioSpeedOptions& options)
{
    if (dataset.empty()) {
        throw Error(ErrorCode::invalid_config, "ratio_and_speed needs a non-empty dataset");
    }
    const std::size_t block = std::max<std::size_t>(options.block_bytes, 1);
    const int reps = std::max(options.repetitions, 1);

    auto measure = [&](CompressionSpec spec) {
        struct Frame {
            Compressed c;
            std::span<const std::uint8_t> original;
        };
        std::vector<Frame> frames;
        CodecRow row;
        row.spec = spec;
        for (std::size_t at = 0; at < dataset.size(); at += block) {
            const auto piece = dataset.subspan(at, std::min(block, dataset.size() - at));
            frames.push_back({compress(piece, spec), piece});
            row.compressed_bytes += frames.back().c.bytes.size();
        }

        std::vector<std::uint8_t> scratch(block);
        auto best = std::chrono::nanoseconds::max();
        for (int r = 0; r < reps; ++r) {
            std::chrono::nanoseconds total{0};
            for (const auto& f : frames) {
                total += decompress_into(f.c.bytes, f.c.stored_as, std::span(scratch).first(f.original.size())).elapsed;
            }
            best = std::min(best, total);
        }
        const double seconds = std::max(std::chrono::duration<double>(best).count(), 1e-9);
        row.compression_ratio = static_cast<double>(dataset.size()) / static_cast<double>(row.compressed_bytes);
        row.decompress_bytes_per_sec = static_cast<double>(dataset.size()) / seconds;
        return row;
    };

    const CodecRow baseline = measure(CompressionSpec{Codec::deflate, 6});
    std::vector<CodecRow> rows;
    rows.reserve(specs.size());
    for (const auto& spec : specs) {
        CodecRow row = spec == baseline.spec ? baseline : measure(spec);
        row.relative_ratio = row.compression_ratio / baseline.compression_ratio;
        row.relative_throughput = row.decompress_bytes_per_sec / baseline.decompress_bytes_per_sec;
        rows.push_back(row);
    }
    return rows;
}

} // namespace bkio
