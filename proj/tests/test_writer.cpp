#include <gtest/gtest.h>

#include <random>
#include <set>

#include <bkio/format.hpp>
#include <bkio/reader.hpp>
#include <bkio/writer.hpp>

#include "support/support.hpp"
#include "test_support.hpp"

using namespace bkio;
using bkio::testing::code_of;
using bkio::testing::TempDir;

namespace {

WriterConfig one_float(std::uint32_t target, std::uint64_t cluster_every = 1000)
{
    WriterConfig c;
    c.branches = {{0, "x", ElementKind::f32, BranchShape::scalar(), target}};
    c.cluster_every = cluster_every;
    return c;
}

FileTables tables_of(const std::filesystem::path& p) { return decode_file(FileSource(p)); }

} // namespace

TEST(Writer, EmptyFileDecodes)
{
    TempDir dir;
    auto w = Writer::open(dir.file("e.bkio"), one_float(32));
    const auto s = w.close();
    EXPECT_EQ(s.total_entries, 0U);
    EXPECT_EQ(s.basket_count, 0U);
    const auto t = tables_of(dir.file("e.bkio"));
    EXPECT_EQ(t.total_entries, 0U);
    EXPECT_TRUE(t.clusters.boundaries.empty());
    EXPECT_EQ(t.branches.size(), 1U);
}

TEST(Writer, FlushWhenTargetReached)
{
    TempDir dir;
    auto w = Writer::open(dir.file("f.bkio"), one_float(8));
    w.fill_entry({1.0F});
    EXPECT_EQ(w.baskets().size(), 0U);
    w.fill_entry({2.0F});
    ASSERT_EQ(w.baskets().size(), 1U);
    EXPECT_EQ(w.baskets()[0].entry_count, 2U);
    w.fill_entry({3.0F});
    EXPECT_EQ(w.baskets().size(), 1U);
    EXPECT_EQ(w.buffered_entries(0), 1U);
}

TEST(Writer, FlushBeforeAppendWhenEntryWouldExceedTarget)
{
    WriterConfig c;
    c.branches = {{0, "v", ElementKind::f32, BranchShape::fixed_array(3), 20}};
    TempDir dir;
    auto w = Writer::open(dir.file("g.bkio"), c);
    const std::vector<float> v = {1, 2, 3};
    w.fill_entry({v});  // 12 bytes buffered
    w.fill_entry({v});  // 24 would exceed 20: flush the first, then buffer
    ASSERT_EQ(w.baskets().size(), 1U);
    EXPECT_EQ(w.baskets()[0].entry_count, 1U);
    EXPECT_EQ(w.buffered_entries(0), 1U);
}

TEST(Writer, OversizedEntryGetsOwnBasket)
{
    WriterConfig c;
    c.branches = {{0, "v", ElementKind::f64, BranchShape::fixed_array(10), 16}};
    TempDir dir;
    auto w = Writer::open(dir.file("h.bkio"), c);
    const std::vector<double> v(10, 1.5);
    w.fill_entry({v});
    w.fill_entry({v});
    ASSERT_EQ(w.baskets().size(), 2U);
    EXPECT_EQ(w.baskets()[0].entry_count, 1U);
    EXPECT_EQ(w.baskets()[1].entry_count, 1U);
    EXPECT_EQ(w.baskets()[0].uncompressed_size, 80U);
}

TEST(Writer, WrongFixedLengthNamesBranch)
{
    WriterConfig c;
    c.branches = {{0, "a", ElementKind::f32, BranchShape::scalar(), 64},
                  {1, "triple", ElementKind::f32, BranchShape::fixed_array(3), 64}};
    TempDir dir;
    auto w = Writer::open(dir.file("i.bkio"), c);
    const std::vector<float> two = {1, 2};
    try {
        w.fill_entry({1.0F, two});
        FAIL() << "expected type_mismatch";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::type_mismatch);
        EXPECT_NE(std::string(e.what()).find("triple"), std::string::npos);
    }
    EXPECT_EQ(w.entries(), 0U);
}

TEST(Writer, WrongElementTypeAndCountRejected)
{
    TempDir dir;
    auto w = Writer::open(dir.file("j.bkio"), one_float(64));
    EXPECT_EQ(code_of([&] { w.fill_entry({1.0}); }), ErrorCode::type_mismatch);
    EXPECT_EQ(code_of([&] { w.fill_entry({1.0F, 2.0F}); }), ErrorCode::type_mismatch);
}

TEST(Writer, InvalidConfigs)
{
    TempDir dir;
    WriterConfig dup;
    dup.branches = {{0, "x", ElementKind::f32, BranchShape::scalar(), 64},
                    {1, "x", ElementKind::f32, BranchShape::scalar(), 64}};
    EXPECT_EQ(code_of([&] { (void)Writer::open(dir.file("k.bkio"), dup); }), ErrorCode::invalid_config);
    EXPECT_EQ(code_of([&] { (void)Writer::open(dir.file("k.bkio"), one_float(64, 0)); }), ErrorCode::invalid_config);
    EXPECT_EQ(code_of([&] { (void)Writer::open(dir.file("k.bkio"), one_float(2)); }), ErrorCode::invalid_config);
    WriterConfig zero_len;
    zero_len.branches = {{0, "x", ElementKind::f32, BranchShape::fixed_array(0), 64}};
    EXPECT_EQ(code_of([&] { (void)Writer::open(dir.file("k.bkio"), zero_len); }), ErrorCode::invalid_config);
    WriterConfig sparse;
    sparse.branches = {{1, "x", ElementKind::f32, BranchShape::scalar(), 64}};
    EXPECT_EQ(code_of([&] { (void)Writer::open(dir.file("k.bkio"), sparse); }), ErrorCode::invalid_config);
    auto bad_level = one_float(64);
    bad_level.spec = {Codec::deflate, 0};
    EXPECT_EQ(code_of([&] { (void)Writer::open(dir.file("k.bkio"), bad_level); }), ErrorCode::invalid_config);
}

TEST(Writer, UnwritablePath)
{
    EXPECT_EQ(code_of([] { (void)Writer::open("/nonexistent-dir/x.bkio", one_float(64)); }), ErrorCode::io_failure);
}

TEST(Writer, FlushClusterAlignsBranches)
{
    WriterConfig c;
    c.branches = {{0, "a", ElementKind::i32, BranchShape::scalar(), 1000},
                  {1, "b", ElementKind::i64, BranchShape::scalar(), 1000}};
    TempDir dir;
    auto w = Writer::open(dir.file("l.bkio"), c);
    for (std::int32_t i = 0; i < 5; ++i) {
        w.fill_entry({i, std::int64_t{i}});
    }
    w.flush_cluster();
    ASSERT_EQ(w.baskets().size(), 2U);
    EXPECT_EQ(w.baskets()[0].first_entry, w.baskets()[1].first_entry);
    EXPECT_EQ(w.clusters().boundaries, std::vector<EntryIndex>{5});
    w.flush_cluster();
    EXPECT_EQ(w.baskets().size(), 2U);
    EXPECT_EQ(w.clusters().boundaries, std::vector<EntryIndex>{5});
}

TEST(Writer, AutomaticClusterBoundaries)
{
    TempDir dir;
    auto w = Writer::open(dir.file("m.bkio"), one_float(64, 100));
    for (int i = 0; i < 1000; ++i) {
        w.fill_entry({static_cast<float>(i)});
    }
    const auto s = w.close();
    std::vector<EntryIndex> expected;
    for (EntryIndex b = 100; b <= 1000; b += 100) {
        expected.push_back(b);
    }
    EXPECT_EQ(tables_of(dir.file("m.bkio")).clusters.boundaries, expected);
    EXPECT_EQ(s.total_entries, 1000U);
}

TEST(Writer, PartialLastCluster)
{
    TempDir dir;
    auto w = Writer::open(dir.file("n.bkio"), one_float(64, 100));
    for (int i = 0; i < 250; ++i) {
        w.fill_entry({static_cast<float>(i)});
    }
    w.close();
    EXPECT_EQ(tables_of(dir.file("n.bkio")).clusters.boundaries, (std::vector<EntryIndex>{100, 200, 250}));
}

TEST(Writer, CloseTwice)
{
    TempDir dir;
    auto w = Writer::open(dir.file("o.bkio"), one_float(64));
    w.close();
    EXPECT_FALSE(w.is_open());
    EXPECT_EQ(code_of([&] { w.close(); }), ErrorCode::writer_closed);
    EXPECT_EQ(code_of([&] { w.fill_entry({1.0F}); }), ErrorCode::writer_closed);
}

TEST(Writer, SchemaSurvivesReopen)
{
    std::mt19937_64 rng(8);
    TempDir dir;
    const auto config = bkio::testing::random_config(rng);
    bkio::testing::write_random_file(dir.file("p.bkio"), config, 50, rng);
    auto r = Reader::open(dir.file("p.bkio"));
    EXPECT_EQ(r.branches(), config.branches);
}

TEST(Writer, MisalignmentIsConstructible)
{
    WriterConfig c;
    c.branches = {{0, "a", ElementKind::f32, BranchShape::scalar(), 400},
                  {1, "b", ElementKind::f32, BranchShape::scalar(), 280}};
    c.cluster_every = 1000;
    TempDir dir;
    auto w = Writer::open(dir.file("q.bkio"), c);
    for (int i = 0; i < 1000; ++i) {
        w.fill_entry({1.0F, 2.0F});
    }
    w.close();
    const auto t = tables_of(dir.file("q.bkio"));
    std::set<EntryIndex> a;
    std::set<EntryIndex> b;
    for (const auto& m : t.baskets) {
        (m.branch_id == 0 ? a : b).insert(m.first_entry);
    }
    EXPECT_NE(a, b);
}

TEST(Writer, SummaryCountsFillsAndPassesDecode)
{
    std::mt19937_64 rng(21);
    TempDir dir;
    for (int i = 0; i < 50; ++i) {
        const auto config = bkio::testing::random_config(rng);
        const auto n = rng() % 400;
        const auto path = dir.file("r" + std::to_string(i) + ".bkio");
        const auto log = bkio::testing::write_random_file(path, config, n, rng);
        EXPECT_EQ(log.summary.total_entries, n);
        const auto t = tables_of(path);
        EXPECT_EQ(t.total_entries, n);
        EXPECT_EQ(t.baskets.size(), log.summary.basket_count);
        EXPECT_EQ(std::filesystem::file_size(path), log.summary.bytes_written);
    }
}
