// bkio-bench: dataset generation and read benchmarks.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include <bkio/bench/csv.hpp>
#include <bkio/bench/datasets.hpp>
#include <bkio/bench/experiments.hpp>
#include <bkio/bench/runner.hpp>
#include <bkio/error.hpp>
#include <bkio/reader.hpp>

namespace fs = std::filesystem;
using namespace bkio;
using namespace bkio::bench;

namespace {

void write_meta(const fs::path& path, const nlohmann::json& meta)
{
    std::ofstream out(path.string() + ".meta.json");
    out << meta.dump(2) << '\n';
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"BKIO dataset generator and read benchmark"};
    app.require_subcommand(1);

    std::string codec = "none";
    std::optional<int> level;
    std::uint64_t seed = default_seed;
    std::string out;

    auto* sweep = app.add_subcommand("gen-sweep", "write one fixed-size float dataset per event size");
    std::uint64_t total_bytes = desk_sweep_bytes;
    std::uint64_t sweep_events = 0;
    std::uint64_t floats_per_event = 0;
    bool full = false;
    sweep->add_option("--codec", codec, "none, deflate, lz4 or lz4hc");
    sweep->add_option("--level", level, "codec level (default: 6 deflate, 1 lz4, 9 lz4hc)");
    sweep->add_option("--total-bytes", total_bytes, "payload bytes per file (default 40 MB)");
    sweep->add_option("--events", sweep_events, "with --floats-per-event: write a single point");
    sweep->add_option("--floats-per-event", floats_per_event, "floats per event for a single point");
    sweep->add_flag("--full", full, "400 MB instead of 40 MB");
    sweep->add_option("--seed", seed, "RNG seed");
    sweep->add_option("--out", out, "output directory")->required();

    auto* dimuon = app.add_subcommand("gen-dimuon", "write the four-branch dimuon sample");
    std::uint64_t events = 1'000'000;
    dimuon->add_option("--codec", codec, "none, deflate, lz4 or lz4hc");
    dimuon->add_option("--level", level, "codec level (default: 6 deflate, 1 lz4, 9 lz4hc)");
    dimuon->add_option("--events", events, "number of events");
    dimuon->add_option("--seed", seed, "RNG seed");
    dimuon->add_option("--out", out, "output file")->required();

    auto* bench = app.add_subcommand("bench", "time one read method over a file");
    std::string input;
    std::string method = "bulk-decoded";
    std::string quantity;
    bool prefetch = false;
    unsigned threads = 0;
    int reps = 3;
    bench->add_option("file", input)->required()->check(CLI::ExistingFile);
    bench->add_option("--method", method, "per-entry, bulk-raw, bulk-decoded or range-copy");
    bench->add_option("--quantity", quantity, "p, E or sum (default: p for dimuon files, else sum)");
    bench->add_flag("--prefetch", prefetch, "decompress baskets on worker threads");
    bench->add_option("--threads", threads, "prefetch workers (0 = all cores)");
    bench->add_option("--reps", reps, "repetitions; the CSV row holds medians");
    bench->add_option("--out", out, "CSV file (default: stdout)");

    auto* report = app.add_subcommand("report", "regenerate every dataset and write the result tables");
    report->add_option("--out", out, "output directory")->required();
    report->add_flag("--full", full, "400 MB sweep instead of 40 MB");
    report->add_option("--reps", reps, "repetitions per measurement");
    report->add_option("--threads", threads, "workers for the parallel unzip table");
    report->add_option("--seed", seed, "RNG seed");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto spec = [&] {
            if (level) {
                return parse_compression_spec(codec + "-" + std::to_string(*level));
            }
            auto s = parse_compression_spec(codec + (codec == "none" ? "-0" : "-1"));
            s.level = s.codec == Codec::deflate ? 6 : s.codec == Codec::lz4hc ? 9 : s.level;
            return s;
        };

        if (*sweep) {
            if (full) {
                total_bytes = full_sweep_bytes;
            }
            SweepOptions options;
            options.spec = spec();
            options.seed = seed;
            fs::create_directories(out);
            std::vector<SweepPoint> points;
            if (sweep_events != 0 || floats_per_event != 0) {
                points.push_back({sweep_events, floats_per_event});
            } else {
                points = sweep_points(total_bytes);
            }
            for (const auto& f : generate_sweep(out, points, total_bytes, options)) {
                std::cout << f.path.string() << ' ' << f.point.events << 'x' << f.point.floats_per_event << ' '
                          << f.summary.bytes_written << " bytes\n";
                write_meta(f.path, {{"seed", seed},
                                    {"codec", options.spec.label()},
                                    {"events", f.point.events},
                                    {"floats_per_event", f.point.floats_per_event}});
            }
        } else if (*dimuon) {
            DimuonOptions options;
            options.events = events;
            options.spec = spec();
            options.seed = seed;
            const auto summary = generate_dimuon(out, options);
            std::cout << out << ' ' << summary.total_entries << " events " << summary.bytes_written << " bytes\n";
            write_meta(out, {{"seed", seed}, {"codec", options.spec.label()}, {"events", events}});
        } else if (*bench) {
            BenchOptions options;
            options.method = parse_method(method);
            options.prefetch = prefetch;
            options.threads = threads;
            options.repetitions = reps;
            if (!quantity.empty()) {
                options.quantity = parse_quantity(quantity);
            } else {
                const auto reader = Reader::open(input);
                bool has_px = false;
                for (const auto& b : reader.branches()) {
                    has_px = has_px || b.name == "px";
                }
                options.quantity = has_px ? Quantity::momentum : Quantity::sum;
            }
            const std::vector<BenchResult> results = {run_benchmark(input, options)};
            if (out.empty()) {
                emit_csv(results, std::cout);
            } else {
                emit_csv(results, fs::path(out));
                write_meta(out, {{"input", input},
                                 {"quantity", std::string(to_string(options.quantity))},
                                 {"prefetch", prefetch},
                                 {"threads", threads},
                                 {"reps", reps},
                                 {"checksum", results.front().checksum}});
            }
        } else if (*report) {
            ReportOptions options;
            options.out_dir = out;
            options.full = full;
            options.repetitions = reps;
            options.threads = threads;
            options.seed = seed;
            for (const auto& p : run_report(options)) {
                std::cout << p.string() << '\n';
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "bkio-bench: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
