// Acceptance checks. Prints one verdict line per criterion:
//   bkio_acceptance            all criteria
//   bkio_acceptance 2 5        selected criteria
// Exit status: 0 all pass, 1 any failure, 77 nothing failed but a precondition was unmet.
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <bkio/bench/datasets.hpp>
#include <bkio/bench/experiments.hpp>
#include <bkio/bench/runner.hpp>
#include <bkio/codec.hpp>
#include <bkio/deserialize.hpp>
#include <bkio/reader.hpp>

#include "support/support.hpp"

using namespace bkio;
using namespace bkio::bench;
using Clock = std::chrono::steady_clock;

namespace {

enum class Verdict { pass, fail, skip };

struct Outcome {
    Verdict verdict;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof(buf), f, args...);
    return buf;
}

// Pinned thresholds.
constexpr int roundtrip_files = 1000;
constexpr double roundtrip_limit_s = 120;
constexpr double bulk_speedup_floor = 3.0;
constexpr double timed_limit_s = 60;
constexpr double lz4_throughput_floor = 1.5;
constexpr double unzip_per_byte_band = 0.30;
constexpr double parallel_wall_ceiling = 0.75;
constexpr double parallel_cpu_ceiling = 1.30;
constexpr unsigned parallel_min_cores = 4;
constexpr int stress_iterations = 100;

Outcome roundtrip(const testing::TempDir& dir)
{
    const auto t0 = Clock::now();
    std::mt19937_64 rng(42);
    int failures = 0;
    std::string first;
    for (int i = 0; i < roundtrip_files; ++i) {
        const auto path = dir.file("rt.bkio");
        const auto config = testing::random_config(rng);
        const auto log = testing::write_random_file(path, config, rng() % 600, rng);
        ReaderOptions o;
        o.prefetch = i % 4 == 0;
        o.prefetch_config.workers = 2;
        auto r = Reader::open(path, o);
        const auto why = testing::verify_three_paths(r, log, rng);
        if (!why.empty()) {
            if (failures++ == 0) {
                first = fmt(" first: case %d %s", i, why.c_str());
            }
        }
    }
    const double s = seconds_since(t0);
    const bool ok = failures == 0 && s < roundtrip_limit_s;
    return {ok ? Verdict::pass : Verdict::fail,
            fmt("%d files, %d mismatches, %.1f s (limit %.0f s)%s", roundtrip_files, failures, s, roundtrip_limit_s,
                first.c_str())};
}

double speedup(const std::filesystem::path& file, int reps, BenchResult* slow_out = nullptr,
               BenchResult* fast_out = nullptr)
{
    BenchOptions b;
    b.quantity = Quantity::momentum;
    b.repetitions = reps;
    b.method = Method::per_entry;
    const auto slow = run_benchmark(file, b);
    b.method = Method::bulk_decoded;
    const auto fast = run_benchmark(file, b);
    if (slow_out) {
        *slow_out = slow;
    }
    if (fast_out) {
        *fast_out = fast;
    }
    return fast.events_per_sec / slow.events_per_sec;
}

Outcome bulk_speedup(const testing::TempDir& dir)
{
    const auto t0 = Clock::now();
    DimuonOptions d;
    d.events = 5'000'000;
    const auto file = dir.file("dimuon_none_5M.bkio");
    generate_dimuon(file, d);
    BenchResult slow;
    BenchResult fast;
    const double ratio = speedup(file, 3, &slow, &fast);
    std::filesystem::remove(file);
    const double s = seconds_since(t0);
    const bool ok = ratio >= bulk_speedup_floor && s < timed_limit_s && slow.checksum > 0
                    && std::abs(fast.checksum - slow.checksum) <= 1e-5 * slow.checksum;
    return {ok ? Verdict::pass : Verdict::fail,
            fmt("bulk_decoded %.3g ev/s vs per_entry %.3g ev/s = %.1fx (floor %.1fx), %.1f s (limit %.0f s)",
                fast.events_per_sec, slow.events_per_sec, ratio, bulk_speedup_floor, s, timed_limit_s)};
}

Outcome call_counts(const testing::TempDir& dir)
{
    DimuonOptions d;
    d.events = 300'000;
    d.spec = {Codec::deflate, 6};
    const auto file = dir.file("dimuon_counts.bkio");
    generate_dimuon(file, d);
    auto r = Reader::open(file);
    std::string bad;
    std::uint64_t total_baskets = 0;
    for (BranchId id = 0; id < 4; ++id) {
        const auto baskets = r.basket_count(id);
        total_baskets += baskets;
        r.evict_all();
        r.reset_stats();
        for (std::size_t k = 0; k < baskets; ++k) {
            (void)r.read_basket_bulk(id, k, DeliveryMode::decoded_native);
        }
        const auto bulk = r.stats();
        if (bulk.decompress_calls != baskets || bulk.decode_passes != baskets || bulk.proxy_constructions != 0) {
            bad += fmt(" bulk branch %u: %llu decompress, %llu decode for %zu baskets;", id,
                       static_cast<unsigned long long>(bulk.decompress_calls),
                       static_cast<unsigned long long>(bulk.decode_passes), baskets);
        }
        r.evict_all();
        r.reset_stats();
        for (EntryIndex e = 0; e < r.total_entries(); ++e) {
            (void)r.get_entry({id}, e);
        }
        const auto per = r.stats();
        if (per.proxy_constructions != r.total_entries()) {
            bad += fmt(" per-entry branch %u: %llu proxies for %llu entries;", id,
                       static_cast<unsigned long long>(per.proxy_constructions),
                       static_cast<unsigned long long>(r.total_entries()));
        }
    }
    std::filesystem::remove(file);
    return {bad.empty() ? Verdict::pass : Verdict::fail,
            bad.empty() ? fmt("4 branches, %llu baskets: one decompression + one decode per basket; %llu proxies "
                              "per branch scan (= entries)",
                              static_cast<unsigned long long>(total_baskets),
                              static_cast<unsigned long long>(d.events))
                        : bad};
}

Outcome lz4_vs_deflate()
{
    const auto t0 = Clock::now();
    const auto values = sweep_values(desk_sweep_bytes / 4, default_seed);
    const auto bytes = encode_elements(NativeArray(values));
    const CompressionSpec specs[] = {{Codec::lz4, 1}, {Codec::deflate, 6}};
    const auto rows = ratio_and_speed(bytes, specs, {.block_bytes = 128 * 1024, .repetitions = 3});
    const auto& lz4 = rows[0];
    const auto& def = rows[1];
    const double s = seconds_since(t0);
    const bool ok = lz4.relative_throughput >= lz4_throughput_floor && lz4.compressed_bytes >= def.compressed_bytes
                    && s < timed_limit_s;
    return {ok ? Verdict::pass : Verdict::fail,
            fmt("lz4-1 decompresses %.2fx deflate-6 (floor %.1fx); sizes lz4-1 %llu >= deflate-6 %llu bytes; "
                "%.1f s (limit %.0f s)",
                lz4.relative_throughput, lz4_throughput_floor, static_cast<unsigned long long>(lz4.compressed_bytes),
                static_cast<unsigned long long>(def.compressed_bytes), s, timed_limit_s)};
}

Outcome event_size_trend(const testing::TempDir& dir)
{
    SweepOptions o;
    o.spec = {Codec::lz4, 1};
    const auto points = sweep_points(desk_sweep_bytes);
    std::vector<SweepMeasurement> m;
    for (const auto& p : points) {
        const auto file = generate_sweep_point(dir.path(), p, desk_sweep_bytes, o);
        m.push_back(measure_sweep({file}, 5).front());
        std::filesystem::remove(file.path);
    }

    bool per_event_decreasing = true;
    bool aggregate_decreasing = true;
    double unzip_mean = 0;
    for (std::size_t i = 0; i < m.size(); ++i) {
        unzip_mean += m[i].unzip_ns_per_byte() / static_cast<double>(m.size());
        if (i > 0) {
            per_event_decreasing = per_event_decreasing && m[i].other_cpu_ns_per_event() < m[i - 1].other_cpu_ns_per_event();
            aggregate_decreasing = aggregate_decreasing && m[i].other_cpu_ms() < m[i - 1].other_cpu_ms();
        }
    }
    double worst = 0;
    for (const auto& x : m) {
        worst = std::max(worst, std::abs(x.unzip_ns_per_byte() / unzip_mean - 1.0));
    }
    const bool unzip_flat = worst <= unzip_per_byte_band;

    std::ostringstream table;
    for (const auto& x : m) {
        table << fmt(" %llu:%.4gns/ev,%.3gms", static_cast<unsigned long long>(x.point.floats_per_event),
                     x.other_cpu_ns_per_event(), x.other_cpu_ms());
    }
    return {per_event_decreasing && unzip_flat ? Verdict::pass : Verdict::fail,
            fmt("non-decompression CPU per event strictly decreasing with floats/event: %s; decompression ns/byte "
                "max deviation %.1f%% (band %.0f%%); whole-file non-decompression CPU strictly decreasing: %s; "
                "[fpe:per-event,whole-file]",
                per_event_decreasing ? "yes" : "NO", worst * 100, unzip_per_byte_band * 100,
                aggregate_decreasing ? "yes" : "no")
                + table.str()};
}

/// All four dimuon columns, scanned through the bulk path.
std::vector<std::uint8_t> bulk_image(const std::filesystem::path& file, ReaderOptions options)
{
    auto r = Reader::open(file, std::move(options));
    std::vector<std::uint8_t> out;
    for (BranchId id = 0; id < r.branches().size(); ++id) {
        for (std::size_t k = 0; k < r.basket_count(id); ++k) {
            const auto s = r.read_basket_bulk(id, k, DeliveryMode::decoded_native);
            const auto v = s.values<float>();
            const auto* p = reinterpret_cast<const std::uint8_t*>(v.data());
            out.insert(out.end(), p, p + v.size_bytes());
        }
    }
    return out;
}

Outcome parallel_unzip(const testing::TempDir& dir)
{
    const unsigned cores = std::thread::hardware_concurrency();
    DimuonOptions d;
    d.events = 1'000'000;
    d.spec = {Codec::deflate, 6};
    const auto file = dir.file("dimuon_deflate_1M.bkio");
    generate_dimuon(file, d);

    ReaderOptions parallel;
    parallel.prefetch = true;
    const bool identical = bulk_image(file, {}) == bulk_image(file, parallel);

    // Stress: small clusters, random task sizes and worker delays.
    DimuonOptions sd;
    sd.events = 40'000;
    sd.spec = {Codec::deflate, 6};
    sd.cluster_every = 2'500;
    const auto small = dir.file("dimuon_stress.bkio");
    generate_dimuon(small, sd);
    const auto expected = bulk_image(small, {});
    int stress_failures = 0;
    std::mt19937_64 rng(9);
    for (int i = 0; i < stress_iterations; ++i) {
        ReaderOptions o;
        o.prefetch = true;
        o.prefetch_config.workers = 1 + static_cast<unsigned>(rng() % 6);
        o.prefetch_config.task_target_bytes = 1 + rng() % 60000;
        o.prefetch_config.before_task = [](const UnzipTask&) {
            thread_local std::mt19937_64 local(std::hash<std::thread::id>{}(std::this_thread::get_id()));
            std::this_thread::sleep_for(std::chrono::microseconds(local() % 500));
        };
        stress_failures += bulk_image(small, o) == expected ? 0 : 1;
    }

    BenchOptions b;
    b.method = Method::bulk_decoded;
    b.quantity = Quantity::energy;
    b.repetitions = 3;
    const auto serial_r = run_benchmark(file, b);
    b.prefetch = true;
    const auto parallel_r = run_benchmark(file, b);
    const double wall = parallel_r.wall_ms / serial_r.wall_ms;
    const double cpu = parallel_r.cpu_ms / serial_r.cpu_ms;
    std::filesystem::remove(file);

    const bool correct = identical && stress_failures == 0 && serial_r.checksum == parallel_r.checksum;
    const auto detail = fmt("%u logical cores; byte-identical: %s; stress %d/%d iterations clean; wall ratio %.2f "
                            "(ceiling %.2f), CPU ratio %.2f (ceiling %.2f)",
                            cores, identical ? "yes" : "NO", stress_iterations - stress_failures, stress_iterations,
                            wall, parallel_wall_ceiling, cpu, parallel_cpu_ceiling);
    if (!correct) {
        return {Verdict::fail, detail};
    }
    if (cores < parallel_min_cores) {
        return {Verdict::skip,
                detail + fmt("; timing clauses not judged: host has fewer than %u logical cores", parallel_min_cores)};
    }
    const bool ok = wall <= parallel_wall_ceiling && cpu <= parallel_cpu_ceiling;
    return {ok ? Verdict::pass : Verdict::fail, detail};
}

Outcome washout(const testing::TempDir& dir)
{
    DimuonOptions d;
    d.events = 2'000'000;
    const auto none = dir.file("dimuon_none_2M.bkio");
    generate_dimuon(none, d);
    d.spec = {Codec::deflate, 6};
    const auto deflate = dir.file("dimuon_deflate_2M.bkio");
    generate_dimuon(deflate, d);
    const double s_none = speedup(none, 3);
    const double s_deflate = speedup(deflate, 3);
    std::filesystem::remove(none);
    std::filesystem::remove(deflate);
    return {s_deflate < s_none ? Verdict::pass : Verdict::fail,
            fmt("bulk/per-entry speedup deflate-6 %.2fx < uncompressed %.2fx", s_deflate, s_none)};
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome(const testing::TempDir&)> run;
};

} // namespace

int main(int argc, char** argv)
{
    const std::vector<Criterion> all = {
        {1, "round-trip fidelity", roundtrip},
        {2, "bulk speedup, uncompressed 5M events", bulk_speedup},
        {3, "call-count mechanism", call_counts},
        {4, "lz4-1 vs deflate-6", [](const testing::TempDir&) { return lz4_vs_deflate(); }},
        {5, "event-size trend at 40 MB", event_size_trend},
        {6, "parallel unzip", parallel_unzip},
        {7, "compression washout", washout},
    };
    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) {
        wanted.push_back(std::atoi(argv[i]));
    }

    testing::TempDir dir;
    bool failed = false;
    bool skipped = false;
    for (const auto& c : all) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.id) == wanted.end()) {
            continue;
        }
        Outcome o;
        try {
            o = c.run(dir);
        } catch (const std::exception& e) {
            o = {Verdict::fail, std::string("exception: ") + e.what()};
        }
        const char* tag = o.verdict == Verdict::pass ? "PASS" : o.verdict == Verdict::fail ? "FAIL" : "SKIP";
        std::printf("[%s] criterion %d %s: %s\n", tag, c.id, c.name, o.detail.c_str());
        std::fflush(stdout);
        failed = failed || o.verdict == Verdict::fail;
        skipped = skipped || o.verdict == Verdict::skip;
    }
    return failed ? 1 : skipped ? 77 : 0;
}
