#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <future>
#include <random>
#include <thread>

#include <bkio/format.hpp>
#include <bkio/prefetch.hpp>
#include <bkio/reader.hpp>
#include <bkio/writer.hpp>

#include "support/support.hpp"
#include "test_support.hpp"

using namespace bkio;
using namespace std::chrono_literals;
using bkio::testing::code_of;
using bkio::testing::TempDir;

namespace {

BasketMeta sized(BranchId branch, std::uint64_t offset, std::uint32_t csize)
{
    BasketMeta m;
    m.branch_id = branch;
    m.first_entry = offset;
    m.entry_count = 1;
    m.file_offset = offset;
    m.compressed_size = csize;
    m.uncompressed_size = csize;
    return m;
}

std::filesystem::path write_floats(const TempDir& dir, const std::string& name, std::uint64_t n,
                                   CompressionSpec spec, std::uint64_t cluster_every, int branches = 3)
{
    WriterConfig c;
    for (int i = 0; i < branches; ++i) {
        c.branches.push_back({static_cast<BranchId>(i), "f" + std::to_string(i), ElementKind::f32,
                              BranchShape::scalar(), static_cast<std::uint32_t>(2000 + 700 * i)});
    }
    c.cluster_every = cluster_every;
    c.spec = spec;
    const auto path = dir.file(name);
    auto w = Writer::open(path, c);
    std::mt19937_64 rng(n);
    std::vector<float> row(static_cast<std::size_t>(branches));
    std::vector<EntryValue> values;
    for (std::uint64_t e = 0; e < n; ++e) {
        values.clear();
        for (auto& v : row) {
            v = static_cast<float>(std::round(std::normal_distribution<double>(0, 10)(rng) * 8) / 8);
            values.emplace_back(v);
        }
        w.fill_entry(values);
    }
    w.close();
    return path;
}

PrefetchConfig pool(unsigned workers, std::size_t task_target = default_task_target_bytes)
{
    PrefetchConfig c;
    c.workers = workers;
    c.task_target_bytes = task_target;
    return c;
}

struct Fixture {
    std::shared_ptr<const BasketSource> source;
    std::shared_ptr<BasketCache> cache = std::make_shared<BasketCache>();

    explicit Fixture(const std::filesystem::path& path)
    {
        auto bytes = std::make_unique<FileSource>(path);
        auto tables = decode_file(*bytes);
        source = std::make_shared<BasketSource>(std::move(bytes), std::move(tables));
    }
};

/// Every value of every branch, read entry by entry.
std::vector<std::uint8_t> scan(Reader& r)
{
    std::vector<BranchId> ids;
    for (const auto& b : r.branches()) {
        ids.push_back(b.branch_id);
    }
    std::vector<std::uint8_t> out;
    for (EntryIndex e = 0; e < r.total_entries(); ++e) {
        const auto p = r.get_entry(ids, e);
        for (std::size_t f = 0; f < p.size(); ++f) {
            const auto bytes = encode_elements(p.field(f).values);
            out.insert(out.end(), bytes.begin(), bytes.end());
        }
    }
    return out;
}

} // namespace

TEST(Partition, GreedyExample)
{
    const std::vector<BasketMeta> b = {sized(0, 0, 60000), sized(1, 60000, 60000), sized(2, 120000, 60000)};
    const auto tasks = partition_baskets(b, 100000);
    ASSERT_EQ(tasks.size(), 2U);
    EXPECT_EQ(tasks[0].baskets.size(), 2U);
    EXPECT_EQ(tasks[0].compressed_bytes, 120000U);
    EXPECT_EQ(tasks[1].baskets.size(), 1U);
    EXPECT_EQ(tasks[1].baskets[0].branch_id, 2U);
}

TEST(Partition, SingleLargeBasketAndEmpty)
{
    const std::vector<BasketMeta> one = {sized(0, 0, 400000)};
    const auto tasks = partition_baskets(one);
    ASSERT_EQ(tasks.size(), 1U);
    EXPECT_EQ(tasks[0].baskets.size(), 1U);
    EXPECT_TRUE(partition_baskets({}).empty());
}

TEST(Partition, FileOffsetOrderAndCompleteness)
{
    std::mt19937_64 rng(4);
    for (int round = 0; round < 200; ++round) {
        std::vector<BasketMeta> b;
        const int n = static_cast<int>(rng() % 40);
        for (int i = 0; i < n; ++i) {
            b.push_back(sized(static_cast<BranchId>(i), static_cast<std::uint64_t>(i) * 1000,
                              static_cast<std::uint32_t>(rng() % 80000 + 1)));
        }
        std::shuffle(b.begin(), b.end(), rng);
        const auto tasks = partition_baskets(b);
        std::vector<BranchId> seen;
        for (std::size_t t = 0; t < tasks.size(); ++t) {
            if (t + 1 < tasks.size()) {
                EXPECT_GE(tasks[t].compressed_bytes, default_task_target_bytes);
            }
            for (const auto& k : tasks[t].baskets) {
                seen.push_back(k.branch_id);
            }
        }
        ASSERT_EQ(seen.size(), b.size());
        EXPECT_TRUE(std::is_sorted(seen.begin(), seen.end()));
    }
}

TEST(Prefetcher, ScheduleIsIdempotent)
{
    TempDir dir;
    Fixture fx(write_floats(dir, "a.bkio", 20000, {Codec::deflate, 6}, 5000));
    Prefetcher p(fx.source, fx.cache, pool(2, 4000));
    const BranchId ids[] = {0, 1, 2};
    const auto first = p.schedule_cluster(0, ids);
    EXPECT_GT(first, 0U);
    EXPECT_EQ(p.schedule_cluster(0, ids), 0U);
    EXPECT_EQ(p.tasks_submitted(), first);
    EXPECT_EQ(code_of([&] { (void)p.schedule_cluster(99, ids); }), ErrorCode::out_of_range);
}

TEST(Prefetcher, ReadLastEntryRightAfterScheduling)
{
    TempDir dir;
    const auto path = write_floats(dir, "b.bkio", 20000, {Codec::lz4, 1}, 5000);
    auto serial = Reader::open(path);
    ReaderOptions o;
    o.prefetch = true;
    o.prefetch_config.workers = 3;
    auto parallel = Reader::open(path, o);
    for (EntryIndex e : {4999UL, 9999UL, 19999UL, 0UL}) {
        const auto a = serial.get_entry({0, 1, 2}, e);
        const auto b = parallel.get_entry({0, 1, 2}, e);
        for (std::size_t f = 0; f < 3; ++f) {
            EXPECT_EQ(a.scalar<float>(f), b.scalar<float>(f));
        }
    }
}

TEST(Prefetcher, WaitOnUnscheduledDecompressesInline)
{
    TempDir dir;
    Fixture fx(write_floats(dir, "c.bkio", 5000, {Codec::deflate, 1}, 5000));
    Prefetcher p(fx.source, fx.cache, pool(1));
    EXPECT_EQ(p.status(0), BasketStatus::unscheduled);
    const auto slot = p.wait_basket(0);
    EXPECT_EQ(slot->status(), BasketStatus::ready);
    EXPECT_EQ(slot->wait(), fx.source->load(0));
}

TEST(Prefetcher, ReadyBasketReturnsImmediately)
{
    TempDir dir;
    Fixture fx(write_floats(dir, "d.bkio", 5000, {Codec::lz4, 1}, 5000));
    Prefetcher p(fx.source, fx.cache, pool(2));
    const BranchId ids[] = {0, 1, 2};
    p.schedule_cluster(0, ids);
    (void)p.wait_basket(0);
    const auto t0 = std::chrono::steady_clock::now();
    (void)p.wait_basket(0);
    EXPECT_LT(std::chrono::steady_clock::now() - t0, 50ms);
    EXPECT_EQ(p.status(0), BasketStatus::ready);
}

TEST(Prefetcher, WorkerFailureSurfacesCodecError)
{
    TempDir dir;
    const auto path = write_floats(dir, "e.bkio", 5000, {Codec::deflate, 6}, 5000, 1);
    const auto tables = decode_file(FileSource(path));
    const auto& victim = tables.baskets.at(1);
    ASSERT_EQ(victim.spec.codec, Codec::deflate);
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(static_cast<std::streamoff>(victim.file_offset + basket_record_header_size + 2));
        for (int i = 0; i < 16; ++i) {
            f.put(static_cast<char>(0xFF));
        }
    }
    Fixture fx(path);
    Prefetcher p(fx.source, fx.cache, pool(2, 1));
    const BranchId ids[] = {0};
    p.schedule_cluster(0, ids);
    const auto index = fx.source->index_of({victim.branch_id, victim.first_entry});
    const auto code = code_of([&] { (void)p.wait_basket(index); });
    EXPECT_TRUE(code == ErrorCode::corrupt_frame || code == ErrorCode::size_mismatch);
    EXPECT_EQ(p.status(index), BasketStatus::failed);
    EXPECT_NO_THROW((void)p.wait_basket(fx.source->index_of({0, 0})));

    ReaderOptions o;
    o.prefetch = true;
    auto r = Reader::open(path, o);
    const auto code2 = code_of([&] {
        for (EntryIndex e = 0; e < r.total_entries(); ++e) {
            (void)r.get_entry({0}, e);
        }
    });
    EXPECT_TRUE(code2 == ErrorCode::corrupt_frame || code2 == ErrorCode::size_mismatch);
}

TEST(Prefetcher, ShutdownWithPendingTasksDoesNotHang)
{
    TempDir dir;
    Fixture fx(write_floats(dir, "f.bkio", 20000, {Codec::deflate, 6}, 20000));
    PrefetchConfig config;
    config.workers = 1;
    config.task_target_bytes = 1;
    std::promise<void> started;
    std::atomic<bool> first{true};
    config.before_task = [&](const UnzipTask&) {
        if (first.exchange(false)) {
            started.set_value();
            std::this_thread::sleep_for(100ms);
        }
    };
    Prefetcher p(fx.source, fx.cache, config);
    const BranchId ids[] = {0, 1, 2};
    ASSERT_GT(p.schedule_cluster(0, ids), 3U);
    started.get_future().wait();

    auto done = std::async(std::launch::async, [&] {
        p.shutdown();
        std::size_t cancelled = 0;
        for (std::size_t b = 0; b < fx.source->tables().baskets.size(); ++b) {
            try {
                (void)p.wait_basket(b);
            } catch (const Error& e) {
                EXPECT_EQ(e.code(), ErrorCode::pool_shutdown);
                ++cancelled;
            }
        }
        return cancelled;
    });
    ASSERT_EQ(done.wait_for(10s), std::future_status::ready);
    EXPECT_GT(done.get(), 0U);
    EXPECT_EQ(code_of([&] { (void)p.schedule_cluster(0, ids); }), ErrorCode::pool_shutdown);
}

TEST(Prefetcher, EquivalenceUnderRandomDelays)
{
    TempDir dir;
    const CompressionSpec specs[] = {{Codec::none, 0}, {Codec::deflate, 6}, {Codec::lz4, 1}, {Codec::lz4hc, 9}};
    for (const auto& spec : specs) {
        const auto path = write_floats(dir, "g_" + spec.label() + ".bkio", 6000, spec, 700);
        auto serial = Reader::open(path);
        const auto expected = scan(serial);
        for (int iter = 0; iter < 5; ++iter) {
            std::mt19937_64 seeds(static_cast<std::uint64_t>(iter));
            ReaderOptions o;
            o.prefetch = true;
            o.prefetch_config.workers = 1 + static_cast<unsigned>(iter % 4);
            o.prefetch_config.task_target_bytes = 1 + seeds() % 20000;
            o.prefetch_config.before_task = [](const UnzipTask& t) {
                thread_local std::mt19937_64 rng(std::hash<std::thread::id>{}(std::this_thread::get_id()));
                std::this_thread::sleep_for(std::chrono::microseconds(rng() % 300 + t.baskets.size() % 2));
            };
            auto r = Reader::open(path, o);
            ASSERT_EQ(scan(r), expected) << spec.label() << " iteration " << iter;
        }
    }
}

TEST(Prefetcher, StatusOnlyMovesForward)
{
    TempDir dir;
    Fixture fx(write_floats(dir, "h.bkio", 10000, {Codec::deflate, 6}, 10000));
    Prefetcher p(fx.source, fx.cache, pool(2, 3000));
    const BranchId ids[] = {0, 1, 2};
    p.schedule_cluster(0, ids);
    const auto n = fx.source->tables().baskets.size();
    std::vector<int> last(n, 0);
    for (int poll = 0; poll < 200; ++poll) {
        for (std::size_t b = 0; b < n; ++b) {
            const int s = static_cast<int>(p.status(b));
            EXPECT_GE(s, last[b]);
            last[b] = s;
        }
    }
    for (std::size_t b = 0; b < n; ++b) {
        (void)p.wait_basket(b);
        EXPECT_EQ(p.status(b), BasketStatus::ready);
    }
}
