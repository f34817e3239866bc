#include <gtest/gtest.h>

#include <random>

#include <bkio/format.hpp>
#include <bkio/reader.hpp>

#include "support/support.hpp"

using namespace bkio;

namespace {

void check_invariants(const FileTables& t)
{
    // Cluster alignment and per-branch contiguity, asserted independently of validate_tables.
    for (const auto& b : t.branches) {
        std::vector<BasketMeta> mine;
        for (const auto& m : t.baskets) {
            if (m.branch_id == b.branch_id) {
                mine.push_back(m);
            }
        }
        std::sort(mine.begin(), mine.end(), [](auto& x, auto& y) { return x.first_entry < y.first_entry; });
        EntryIndex next = 0;
        for (const auto& m : mine) {
            ASSERT_EQ(m.first_entry, next);
            ASSERT_GT(m.entry_count, 0U);
            next = m.end_entry();
        }
        ASSERT_EQ(next, t.total_entries);
        for (const auto boundary : t.clusters.boundaries) {
            if (boundary == t.total_entries) {
                continue;
            }
            ASSERT_TRUE(std::any_of(mine.begin(), mine.end(), [&](auto& m) { return m.first_entry == boundary; }))
                << "no basket of branch " << b.branch_id << " at boundary " << boundary;
        }
    }
}

} // namespace

TEST(Property, RandomFilesRoundTripThroughAllReadPaths)
{
    std::mt19937_64 rng(20240601);
    bkio::testing::TempDir dir;
    for (int i = 0; i < 300; ++i) {
        const auto path = dir.file("p" + std::to_string(i) + ".bkio");
        const auto config = bkio::testing::random_config(rng);
        const auto log = bkio::testing::write_random_file(path, config, rng() % 500, rng);
        const auto tables = decode_file(FileSource(path));
        check_invariants(tables);
        EXPECT_EQ(tables.branches, config.branches);
        ReaderOptions o;
        o.prefetch = i % 3 == 0;
        o.prefetch_config.workers = 2;
        auto r = Reader::open(path, o);
        ASSERT_EQ(bkio::testing::verify_three_paths(r, log, rng), "") << "case " << i << " " << config.spec.label();
        std::filesystem::remove(path);
    }
}

TEST(Property, FooterRoundTripOnRandomTables)
{
    std::mt19937_64 rng(77);
    bkio::testing::TempDir dir;
    for (int i = 0; i < 1000; ++i) {
        const auto path = dir.file("f.bkio");
        const auto config = bkio::testing::random_config(rng);
        bkio::testing::write_random_file(path, config, rng() % 60, rng);
        const auto t = decode_file(FileSource(path));
        const auto footer_offset = [&] {
            FileSource src(path);
            std::array<std::uint8_t, 8> b{};
            src.read_at(src.size() - trailer_size, b);
            return load_be<std::uint64_t>(b.data());
        }();
        const auto bytes = encode_footer(t, footer_offset);
        std::vector<std::uint8_t> image(footer_offset, 0);
        const auto header = encode_file_header(1);
        std::copy(header.begin(), header.end(), image.begin());
        image.insert(image.end(), bytes.begin(), bytes.end());
        // Only the footer is consulted by decode_file, so a zeroed body must give the same tables.
        EXPECT_EQ(decode_file(MemorySource(image)), t);
    }
}
