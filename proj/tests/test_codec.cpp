#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <random>

#include <bkio/codec.hpp>

#include "test_support.hpp"

using namespace bkio;
using bkio::testing::code_of;

namespace {

using Bytes = std::vector<std::uint8_t>;

const CompressionSpec matrix[] = {
    {Codec::none, 0}, {Codec::deflate, 1}, {Codec::deflate, 6}, {Codec::deflate, 9},
    {Codec::lz4, 1},  {Codec::lz4hc, 1},   {Codec::lz4hc, 9},   {Codec::lz4hc, 12},
};

Bytes random_bytes(std::size_t n, std::uint64_t seed, int alphabet = 256)
{
    std::mt19937_64 rng(seed);
    Bytes out(n);
    for (auto& b : out) {
        b = static_cast<std::uint8_t>(rng() % static_cast<unsigned>(alphabet));
    }
    return out;
}

} // namespace

TEST(Codec, EmptyPayloadDeflate)
{
    const auto c = compress({}, {Codec::deflate, 6});
    EXPECT_TRUE(decompress(c.bytes, c.stored_as, 0).bytes.empty());
}

TEST(Codec, ZerosCollapseUnderLz4)
{
    const Bytes zeros(1 << 20, 0);
    const auto c = compress(zeros, {Codec::lz4, 1});
    EXPECT_EQ(c.stored_as, (CompressionSpec{Codec::lz4, 1}));
    // LZ4 spends one byte per 255 bytes of match length, so the floor is about
    // 1 MiB / 255. Regression anchor for the vendored LZ4 1.9.4: 4122 bytes.
    EXPECT_EQ(c.bytes.size(), 4122U);
    EXPECT_EQ(decompress(c.bytes, c.stored_as, zeros.size()).bytes, zeros);
    EXPECT_LT(compress(zeros, {Codec::deflate, 6}).bytes.size(), 4096U);
}

TEST(Codec, RandomBytesFallBackToNone)
{
    const auto payload = random_bytes(64 * 1024, 99);
    const auto c = compress(payload, {Codec::deflate, 6});
    EXPECT_EQ(c.stored_as, (CompressionSpec{Codec::none, 0}));
    EXPECT_EQ(c.bytes, payload);
    EXPECT_EQ(decompress(c.bytes, c.stored_as, payload.size()).bytes, payload);
}

TEST(Codec, RoundTripMatrix)
{
    std::mt19937_64 rng(5);
    for (const auto& spec : matrix) {
        for (int i = 0; i < 40; ++i) {
            const auto n = static_cast<std::size_t>(rng() % 200000);
            const auto payload = random_bytes(n, rng(), i % 2 ? 4 : 256);
            const auto c = compress(payload, spec);
            EXPECT_TRUE(c.stored_as == spec || c.stored_as == CompressionSpec{}) << spec.label();
            if (c.stored_as == spec && spec.codec != Codec::none) {
                EXPECT_LT(c.bytes.size(), payload.size());
            }
            const auto d = decompress(c.bytes, c.stored_as, payload.size());
            ASSERT_EQ(d.bytes, payload) << spec.label() << " n=" << n;
            EXPECT_EQ(d.stats.bytes_in, c.bytes.size());
            EXPECT_EQ(d.stats.bytes_out, payload.size());
            EXPECT_GE(d.stats.elapsed.count(), 0);
        }
    }
}

TEST(Codec, Deterministic)
{
    const auto payload = random_bytes(100000, 1, 8);
    for (const auto& spec : matrix) {
        EXPECT_EQ(compress(payload, spec).bytes, compress(payload, spec).bytes) << spec.label();
    }
}

TEST(Codec, TruncatedFrameIsCorrupt)
{
    const auto payload = random_bytes(50000, 2, 4);
    for (const auto& spec : matrix) {
        if (spec.codec == Codec::none) {
            continue;
        }
        const auto c = compress(payload, spec);
        ASSERT_EQ(c.stored_as, spec);
        const Bytes cut(c.bytes.begin(), c.bytes.begin() + static_cast<std::ptrdiff_t>(c.bytes.size() / 2));
        EXPECT_EQ(code_of([&] { (void)decompress(cut, spec, payload.size()); }), ErrorCode::corrupt_frame)
            << spec.label();
    }
}

TEST(Codec, ExpectedSizeOffByOne)
{
    const auto payload = random_bytes(50000, 3, 4);
    for (const auto& spec : matrix) {
        const auto c = compress(payload, spec);
        EXPECT_EQ(code_of([&] { (void)decompress(c.bytes, c.stored_as, payload.size() + 1); }),
                  ErrorCode::size_mismatch)
            << spec.label();
        EXPECT_EQ(code_of([&] { (void)decompress(c.bytes, c.stored_as, payload.size() - 1); }),
                  ErrorCode::size_mismatch)
            << spec.label();
    }
}

TEST(Codec, InvalidSpecRejected)
{
    EXPECT_EQ(code_of([] { (void)compress(Bytes{1}, {Codec::lz4, 5}); }), ErrorCode::invalid_config);
}

TEST(RatioAndSpeed, BaselineIsIdentity)
{
    // Quantized Gaussian floats in on-disk byte order: compressible, but not trivially.
    std::mt19937_64 rng(4);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Bytes data;
    for (int i = 0; i < 150000; ++i) {
        const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(std::round(gauss(rng) * 64) / 64));
        for (int shift = 24; shift >= 0; shift -= 8) {
            data.push_back(static_cast<std::uint8_t>(bits >> shift));
        }
    }
    const CompressionSpec specs[] = {{Codec::none, 0}, {Codec::deflate, 6}, {Codec::lz4, 1}};
    const auto rows = ratio_and_speed(data, specs, {.block_bytes = 128 * 1024, .repetitions = 2});
    ASSERT_EQ(rows.size(), 3U);
    EXPECT_EQ(rows[1].spec, (CompressionSpec{Codec::deflate, 6}));
    EXPECT_DOUBLE_EQ(rows[1].relative_ratio, 1.0);
    EXPECT_DOUBLE_EQ(rows[1].relative_throughput, 1.0);
    EXPECT_DOUBLE_EQ(rows[0].compression_ratio, 1.0);
    EXPECT_LT(rows[0].relative_ratio, rows[2].relative_ratio);
    EXPECT_LT(rows[2].relative_ratio, 1.0);
    for (const auto& r : rows) {
        EXPECT_GT(r.decompress_bytes_per_sec, 0.0);
    }
}

TEST(RatioAndSpeed, EmptyDatasetRejected)
{
    const CompressionSpec specs[] = {{Codec::lz4, 1}};
    EXPECT_EQ(code_of([&] { (void)ratio_and_speed({}, specs); }), ErrorCode::invalid_config);
}
