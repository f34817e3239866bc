#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include <bkio/format.hpp>
#include <bkio/reader.hpp>
#include <bkio/writer.hpp>

#include "support/support.hpp"
#include "test_support.hpp"

using namespace bkio;
using bkio::testing::code_of;
using bkio::testing::TempDir;

namespace {

/// Two f32 scalars with different basket sizes, `n` entries of i and -i.
std::filesystem::path write_pair(const TempDir& dir, std::uint64_t n, std::uint32_t target_a, std::uint32_t target_b,
                                 std::uint64_t cluster_every, CompressionSpec spec = {})
{
    WriterConfig c;
    c.branches = {{0, "a", ElementKind::f32, BranchShape::scalar(), target_a},
                  {1, "b", ElementKind::f32, BranchShape::scalar(), target_b}};
    c.cluster_every = cluster_every;
    c.spec = spec;
    const auto path = dir.file("pair.bkio");
    auto w = Writer::open(path, c);
    for (std::uint64_t i = 0; i < n; ++i) {
        w.fill_entry({static_cast<float>(i), -static_cast<float>(i)});
    }
    w.close();
    return path;
}

} // namespace

TEST(Reader, EmptyFile)
{
    TempDir dir;
    const auto path = write_pair(dir, 0, 64, 64, 10);
    auto r = Reader::open(path);
    EXPECT_EQ(r.total_entries(), 0U);
    EXPECT_EQ(r.basket_count(0), 0U);
    EXPECT_EQ(code_of([&] { (void)r.get_entry({0}, 0); }), ErrorCode::out_of_range);
    const BranchId ids[] = {0, 1};
    const auto cols = r.read_range_aligned(ids, 0, 0);
    ASSERT_EQ(cols.size(), 2U);
    EXPECT_TRUE(cols[0].values<float>().empty());
}

TEST(Reader, SingleEntry)
{
    TempDir dir;
    WriterConfig c;
    c.branches = {{0, "x", ElementKind::f64, BranchShape::scalar(), 64}};
    auto w = Writer::open(dir.file("one.bkio"), c);
    w.fill_entry({3.25});
    w.close();
    auto r = Reader::open(dir.file("one.bkio"));
    EXPECT_EQ(r.get_entry({0}, 0).scalar<double>(0), 3.25);
    EXPECT_EQ(code_of([&] { (void)r.get_entry({0}, 1); }), ErrorCode::out_of_range);
}

TEST(Reader, CorruptTrailer)
{
    TempDir dir;
    const auto path = write_pair(dir, 10, 64, 64, 10);
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(-1, std::ios::end);
        f.put('Z');
    }
    EXPECT_EQ(code_of([&] { (void)Reader::open(path); }), ErrorCode::bad_trailer);
    EXPECT_EQ(code_of([&] { (void)Reader::open(dir.file("missing.bkio")); }), ErrorCode::io_failure);
}

TEST(Reader, BranchLookup)
{
    TempDir dir;
    auto r = Reader::open(write_pair(dir, 10, 64, 64, 10));
    EXPECT_EQ(r.branch_id("b"), 1U);
    EXPECT_EQ(code_of([&] { (void)r.branch_id("c"); }), ErrorCode::out_of_range);
}

TEST(Reader, BulkRawSliceSize)
{
    TempDir dir;
    auto r = Reader::open(write_pair(dir, 1000, 4000, 4000, 1000));
    ASSERT_EQ(r.basket_count(0), 1U);
    const auto s = r.read_basket_bulk(0, 0, DeliveryMode::raw_serialized);
    EXPECT_EQ(s.entry_count(), 1000U);
    EXPECT_EQ(s.raw().size(), 4000U);
    EXPECT_EQ(s.raw_as<float>()[7], 7.0F);
    EXPECT_EQ(code_of([&] { (void)s.values<float>(); }), ErrorCode::type_mismatch);
    EXPECT_EQ(code_of([&] { (void)s.raw_as<double>(); }), ErrorCode::type_mismatch);
}

TEST(Reader, BulkDecodedMatchesGetEntry)
{
    TempDir dir;
    auto r = Reader::open(write_pair(dir, 5000, 1000, 700, 1000, {Codec::lz4, 1}));
    for (BranchId id : {0U, 1U}) {
        for (std::size_t k = 0; k < r.basket_count(id); ++k) {
            const auto s = r.read_basket_bulk(id, k, DeliveryMode::decoded_native);
            EXPECT_EQ(s.values<float>()[0], r.get_entry({id}, s.first_entry()).scalar<float>(0));
            EXPECT_EQ(s.value<float>(s.entry_count() - 1),
                      r.get_entry({id}, s.first_entry() + s.entry_count() - 1).scalar<float>(0));
        }
    }
    EXPECT_EQ(code_of([&] { (void)r.read_basket_bulk(0, r.basket_count(0), DeliveryMode::raw_serialized); }),
              ErrorCode::out_of_range);
}

TEST(Reader, VarArrayBulkRejected)
{
    TempDir dir;
    WriterConfig c;
    c.branches = {{0, "v", ElementKind::i32, BranchShape::var_array(), 64}};
    auto w = Writer::open(dir.file("v.bkio"), c);
    const std::vector<std::int32_t> a = {1, 2, 3};
    const std::vector<std::int32_t> none;
    w.fill_entry({a});
    w.fill_entry({none});
    w.fill_entry({a});
    w.close();
    auto r = Reader::open(dir.file("v.bkio"));
    EXPECT_EQ(code_of([&] { (void)r.read_basket_bulk(0, 0, DeliveryMode::decoded_native); }),
              ErrorCode::unsupported_shape);
    const BranchId ids[] = {0};
    EXPECT_EQ(code_of([&] { (void)r.read_range_aligned(ids, 0, 1); }), ErrorCode::unsupported_shape);
    EXPECT_EQ(r.get_entry({0}, 0).length(0), 3U);
    EXPECT_EQ(r.get_entry({0}, 1).length(0), 0U);
    EXPECT_EQ(r.get_entry({0}, 2).array<std::int32_t>(0)[2], 3);
}

TEST(Reader, RangeOverAlignedClusterIsView)
{
    TempDir dir;
    auto r = Reader::open(write_pair(dir, 3000, 64000, 64000, 1000));
    const BranchId ids[] = {0, 1};
    const auto cols = r.read_range_aligned(ids, 1000, 2000);
    for (const auto& c : cols) {
        EXPECT_EQ(c.ownership(), Ownership::view);
        EXPECT_EQ(c.entry_count(), 1000U);
    }
    EXPECT_EQ(cols[0].values<float>()[0], 1000.0F);
    EXPECT_EQ(cols[1].values<float>()[999], -1999.0F);
}

TEST(Reader, MisalignedBranchIsCopiedAndCorrect)
{
    TempDir dir;
    auto r = Reader::open(write_pair(dir, 3000, 4000, 2800, 3000));
    const BranchId ids[] = {0, 1};
    for (std::size_t k = 0; k < r.basket_count(0); ++k) {
        const auto& m = r.basket(0, k);
        const auto cols = r.read_range_aligned(ids, m.first_entry, m.end_entry());
        EXPECT_EQ(cols[0].ownership(), Ownership::view);
        const auto b = cols[1].values<float>();
        ASSERT_EQ(b.size(), m.entry_count);
        for (std::size_t i = 0; i < b.size(); ++i) {
            EXPECT_EQ(b[i], r.get_entry({1}, m.first_entry + i).scalar<float>(0));
        }
    }
    const auto whole = r.read_range_aligned(ids, 0, 3000);
    EXPECT_EQ(whole[1].ownership(), Ownership::copy);
    const auto forced = r.read_range_aligned(ids, 0, 10, true);
    EXPECT_EQ(forced[0].ownership(), Ownership::copy);
    EXPECT_EQ(code_of([&] { (void)r.read_range_aligned(ids, 10, 3001); }), ErrorCode::out_of_range);
    EXPECT_EQ(code_of([&] { (void)r.read_range_aligned(ids, 20, 10); }), ErrorCode::out_of_range);
}

TEST(Reader, CallCountsBulkVersusPerEntry)
{
    TempDir dir;
    auto r = Reader::open(write_pair(dir, 10000, 4000, 4000, 2500, {Codec::deflate, 6}));
    const auto baskets = r.basket_count(0);
    ASSERT_GT(baskets, 4U);

    r.reset_stats();
    for (std::size_t k = 0; k < baskets; ++k) {
        (void)r.read_basket_bulk(0, k, DeliveryMode::decoded_native);
    }
    auto s = r.stats();
    EXPECT_EQ(s.decompress_calls, baskets);
    EXPECT_EQ(s.decode_passes, baskets);
    EXPECT_EQ(s.proxy_constructions, 0U);

    r.evict_all();
    r.reset_stats();
    for (EntryIndex e = 0; e < r.total_entries(); ++e) {
        (void)r.get_entry({0}, e);
    }
    s = r.stats();
    EXPECT_EQ(s.proxy_constructions, r.total_entries());
    EXPECT_EQ(s.decompress_calls, baskets);
}

TEST(Reader, DecodedTwiceDecodesOnce)
{
    TempDir dir;
    auto r = Reader::open(write_pair(dir, 1000, 4000, 4000, 1000));
    r.reset_stats();
    (void)r.read_basket_bulk(0, 0, DeliveryMode::decoded_native);
    (void)r.read_basket_bulk(0, 0, DeliveryMode::decoded_native);
    EXPECT_EQ(r.stats().decode_passes, 1U);
    EXPECT_EQ(r.stats().decompress_calls, 1U);
}

TEST(Reader, StaleViewIsDetected)
{
    TempDir dir;
    auto r = Reader::open(write_pair(dir, 4000, 4000, 4000, 1000));
    const auto view = r.read_basket_bulk(0, 0, DeliveryMode::decoded_native);
    const auto copy = r.read_basket_bulk(0, 0, DeliveryMode::decoded_native, Ownership::copy);
    const auto raw_view = r.read_basket_bulk(0, 0, DeliveryMode::raw_serialized);
    EXPECT_TRUE(view.is_valid());
    // Cluster 2 is outside the window of cluster 0, so reading it evicts cluster 0.
    (void)r.read_basket_bulk(0, 2, DeliveryMode::decoded_native);
    EXPECT_FALSE(view.is_valid());
    EXPECT_FALSE(raw_view.is_valid());
    EXPECT_EQ(code_of([&] { (void)view.values<float>(); }), ErrorCode::stale_view);
    EXPECT_EQ(code_of([&] { (void)raw_view.raw(); }), ErrorCode::stale_view);
    EXPECT_EQ(code_of([&] { (void)view.value<float>(0); }), ErrorCode::stale_view);
    EXPECT_TRUE(copy.is_valid());
    EXPECT_EQ(copy.values<float>()[5], 5.0F);
}

TEST(Reader, StaleColumnAfterEvictAll)
{
    TempDir dir;
    auto r = Reader::open(write_pair(dir, 1000, 4000, 4000, 1000));
    const BranchId ids[] = {0};
    const auto cols = r.read_range_aligned(ids, 0, 100);
    ASSERT_EQ(cols[0].ownership(), Ownership::view);
    r.evict_all();
    EXPECT_EQ(r.cached_baskets(), 0U);
    EXPECT_FALSE(cols[0].is_valid());
    EXPECT_EQ(code_of([&] { (void)cols[0].values<float>(); }), ErrorCode::stale_view);
    EXPECT_EQ(code_of([&] { (void)cols[0].as_double(0); }), ErrorCode::stale_view);
}

TEST(Reader, CacheHoldsAtMostTwoClusters)
{
    TempDir dir;
    auto r = Reader::open(write_pair(dir, 10000, 400, 400, 1000));
    for (EntryIndex e = 0; e < r.total_entries(); ++e) {
        (void)r.get_entry({0, 1}, e);
        ASSERT_LE(r.cached_baskets(), 2U * 2 * 10);
    }
}

TEST(Reader, ReadBasketInto)
{
    TempDir dir;
    auto r = Reader::open(write_pair(dir, 1000, 4000, 4000, 1000, {Codec::lz4hc, 9}));
    std::vector<std::uint8_t> raw(4000);
    EXPECT_EQ(r.read_basket_into(0, 0, std::span<std::uint8_t>(raw)), 4000U);
    EXPECT_EQ(load_be<float>(raw.data() + 4 * 9), 9.0F);
    std::vector<float> values(1000);
    EXPECT_EQ(r.read_basket_into(1, 0, std::span<float>(values)), 1000U);
    EXPECT_EQ(values[999], -999.0F);
    std::vector<float> small(10);
    EXPECT_EQ(code_of([&] { (void)r.read_basket_into(1, 0, std::span<float>(small)); }), ErrorCode::size_mismatch);
    std::vector<double> wrong(1000);
    EXPECT_EQ(code_of([&] { (void)r.read_basket_into(1, 0, std::span<double>(wrong)); }), ErrorCode::type_mismatch);
}

TEST(Reader, FooterRecordDisagreementDetected)
{
    TempDir dir;
    const auto path = write_pair(dir, 100, 4000, 4000, 100);
    auto tables = decode_file(FileSource(path));
    {
        // Damage the redundant entry_count in the first record header.
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(static_cast<std::streamoff>(tables.baskets[0].file_offset + 15));
        f.put(static_cast<char>(99));
    }
    auto r = Reader::open(path);
    EXPECT_EQ(code_of([&] { (void)r.get_entry({0}, 0); }), ErrorCode::invalid_index);
}

TEST(Reader, ThreeWayEquivalenceRandomFiles)
{
    std::mt19937_64 rng(1234);
    TempDir dir;
    for (int i = 0; i < 60; ++i) {
        const auto path = dir.file("t" + std::to_string(i) + ".bkio");
        const auto log = bkio::testing::write_random_file(path, bkio::testing::random_config(rng), rng() % 700, rng);
        auto r = Reader::open(path);
        EXPECT_EQ(bkio::testing::verify_three_paths(r, log, rng), "") << "file " << i;
    }
}
