#pragma once

#include <chrono>
#include <cstdint>
#include <span>
#include <vector>

#include <bkio/types.hpp>

namespace bkio {

/// Timing probe around one raw codec call; output allocation is excluded.
struct CodecStats {
    std::uint64_t bytes_in = 0;
    std::uint64_t bytes_out = 0;
    std::chrono::nanoseconds elapsed{0};

    CodecStats& operator+=(const CodecStats& other) noexcept
    {
        bytes_in += other.bytes_in;
        bytes_out += other.bytes_out;
        elapsed += other.elapsed;
        return *this;
    }
};

struct Compressed {
    std::vector<std::uint8_t> bytes;
    /// What the frame actually holds: the requested spec, or none-0 when
    /// compression would not have made the payload strictly smaller.
    CompressionSpec stored_as;
    CodecStats stats;
};

Compressed compress(std::span<const std::uint8_t> payload, CompressionSpec spec);

/// Decompresses into `out`, whose size is the expected uncompressed size.
/// Throws corrupt_frame for undecodable input and size_mismatch when the frame
/// decodes to a different length than out.size().
CodecStats decompress_into(std::span<const std::uint8_t> frame, CompressionSpec spec, std::span<std::uint8_t> out);

struct Decompressed {
    std::vector<std::uint8_t> bytes;
    CodecStats stats;
};

Decompressed decompress(std::span<const std::uint8_t> frame, CompressionSpec spec, std::size_t expected_size);

struct CodecRow {
    CompressionSpec spec;
    std::uint64_t compressed_bytes = 0;
    double compression_ratio = 0;         ///< uncompressed / compressed
    double decompress_bytes_per_sec = 0;  ///< uncompressed bytes produced per second
    double relative_ratio = 0;            ///< compression_ratio / deflate-6's
    double relative_throughput = 0;       ///< decompress_bytes_per_sec / deflate-6's
};

struct RatioSpeedOptions {
    std::size_t block_bytes = 128 * 1024; ///< dataset is compressed in blocks of this size
    int repetitions = 5;                  ///< decompression passes; the fastest is kept
};

/// Compression ratio and decompression throughput of each spec over `dataset`,
/// normalized to deflate level 6 (which is measured even when not requested).
std::vector<CodecRow> ratio_and_speed(std::span<const std::uint8_t> dataset, std::span<const CompressionSpec> specs,
                                      const RatioSpeedOptions& options = {});

} // namespace bkio
