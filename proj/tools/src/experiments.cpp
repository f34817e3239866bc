#include <bkio/bench/experiments.hpp>

#include <algorithm>
#include <fstream>
#include <thread>

#include <json.hpp>

#include <bkio/bench/csv.hpp>
#include <bkio/deserialize.hpp>
#include <bkio/error.hpp>

namespace bkio::bench {

std::vector<SweepMeasurement> measure_sweep(const std::vector<SweepFile>& files, int repetitions)
{
    BenchOptions options;
    options.method = Method::per_entry;
    options.quantity = Quantity::sum;
    options.repetitions = 1;

    std::vector<SweepMeasurement> out;
    for (const auto& f : files) {
        SweepMeasurement best;
        for (int rep = 0; rep < std::max(1, repetitions); ++rep) {
            const auto r = run_benchmark(f.path, options);
            if (rep == 0 || r.cpu_ms < best.cpu_ms) {
                best = {f.point, r.wall_ms, r.cpu_ms, r.unzip_ms, f.point.payload_bytes()};
            }
        }
        out.push_back(best);
    }
    return out;
}

std::vector<CodecRow> measure_codecs(std::uint64_t total_bytes, std::uint64_t seed, int repetitions)
{
    const auto values = sweep_values(total_bytes / 4, seed);
    const auto bytes = encode_elements(NativeArray(values));
    const std::vector<CompressionSpec> specs = {
        {Codec::deflate, 1}, {Codec::deflate, 6}, {Codec::deflate, 9},
        {Codec::lz4, 1},     {Codec::lz4hc, 4},   {Codec::lz4hc, 9},
    };
    RatioSpeedOptions options;
    options.repetitions = std::max(1, repetitions);
    return ratio_and_speed(bytes, specs, options);
}

namespace {

std::ofstream open_table(const std::filesystem::path& path, std::vector<std::string> header)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::io_failure, "cannot write " + path.string());
    }
    write_csv_row(out, header);
    return out;
}

} // namespace

std::vector<std::filesystem::path> run_report(const ReportOptions& options)
{
    namespace fs = std::filesystem;
    const auto data = options.out_dir / "data";
    fs::create_directories(data);
    std::vector<fs::path> written;

    // Read methods on the dimuon sample.
    {
        const auto path = options.out_dir / "read_methods.csv";
        auto out = open_table(path, {"method", "quantity", "codec", "events", "wall_ms", "cpu_ms", "unzip_ms",
                                     "events_per_sec", "bytes"});
        const std::uint64_t events = options.full ? 20'000'000 : 2'000'000;
        for (const auto& spec : {CompressionSpec{}, CompressionSpec{Codec::lz4, 1}, CompressionSpec{Codec::deflate, 6}}) {
            const auto file = data / ("dimuon_" + spec.label() + ".bkio");
            DimuonOptions d;
            d.events = events;
            d.spec = spec;
            d.seed = options.seed;
            generate_dimuon(file, d);
            const std::pair<Method, Quantity> runs[] = {
                {Method::per_entry, Quantity::momentum},    {Method::per_entry, Quantity::energy},
                {Method::bulk_raw, Quantity::momentum},     {Method::bulk_decoded, Quantity::momentum},
                {Method::range_copy, Quantity::momentum},   {Method::range_copy, Quantity::energy},
            };
            for (const auto& [method, quantity] : runs) {
                BenchOptions b;
                b.method = method;
                b.quantity = quantity;
                b.repetitions = options.repetitions;
                const auto r = run_benchmark(file, b);
                write_csv_row(out, std::vector<std::string>{r.method, std::string(to_string(quantity)), r.codec,
                                                            std::to_string(r.events), format_double(r.wall_ms),
                                                            format_double(r.cpu_ms), format_double(r.unzip_ms),
                                                            format_double(r.events_per_sec), std::to_string(r.bytes)});
            }
            fs::remove(file);
        }
        written.push_back(path);
    }

    const auto total = options.full ? full_sweep_bytes : desk_sweep_bytes;

    // Codec ratio and speed relative to deflate-6.
    {
        const auto path = options.out_dir / "codecs.csv";
        auto out = open_table(path, {"codec", "compressed_bytes", "compression_ratio", "decompress_bytes_per_sec",
                                     "relative_ratio", "relative_throughput"});
        for (const auto& row : measure_codecs(total, options.seed, options.repetitions)) {
            write_csv_row(out, std::vector<std::string>{row.spec.label(), std::to_string(row.compressed_bytes),
                                                        format_double(row.compression_ratio),
                                                        format_double(row.decompress_bytes_per_sec),
                                                        format_double(row.relative_ratio),
                                                        format_double(row.relative_throughput)});
        }
        written.push_back(path);
    }

    // Event-size sweep at constant total size.
    {
        const auto path = options.out_dir / "event_size.csv";
        auto out = open_table(path, {"floats_per_event", "events", "cpu_ms", "unzip_ms", "other_cpu_ns_per_event",
                                     "other_cpu_ns_per_byte", "unzip_ns_per_byte"});
        SweepOptions s;
        s.spec = {Codec::lz4, 1};
        s.seed = options.seed;
        const auto points = sweep_points(total);
        for (const auto& point : points) {
            const auto file = generate_sweep_point(data, point, total, s);
            const auto m = measure_sweep({file}, options.repetitions).front();
            write_csv_row(out, std::vector<std::string>{
                                   std::to_string(point.floats_per_event), std::to_string(point.events),
                                   format_double(m.cpu_ms), format_double(m.unzip_ms),
                                   format_double(m.other_cpu_ns_per_event()), format_double(m.other_cpu_ns_per_byte()),
                                   format_double(m.unzip_ns_per_byte())});
            fs::remove(file.path);
        }
        written.push_back(path);
    }

    // Serial against parallel unzip on deflate-6.
    {
        const auto path = options.out_dir / "parallel_unzip.csv";
        auto out = open_table(path, {"events", "mode", "threads", "wall_ms", "cpu_ms", "unzip_ms", "checksum"});
        std::vector<std::uint64_t> sizes = {500, 5'000, 50'000, 500'000};
        if (options.full) {
            sizes.push_back(5'000'000);
        }
        for (const auto events : sizes) {
            const auto file = data / ("dimuon_parallel_" + std::to_string(events) + ".bkio");
            DimuonOptions d;
            d.events = events;
            d.spec = {Codec::deflate, 6};
            d.seed = options.seed;
            d.cluster_every = std::max<std::uint64_t>(1, std::min<std::uint64_t>(events / 4, 100'000));
            generate_dimuon(file, d);
            for (const bool parallel : {false, true}) {
                BenchOptions b;
                b.method = Method::bulk_decoded;
                b.quantity = Quantity::energy;
                b.prefetch = parallel;
                b.threads = options.threads;
                b.repetitions = options.repetitions;
                const auto r = run_benchmark(file, b);
                const unsigned threads = parallel ? (options.threads ? options.threads
                                                                     : std::max(1U, std::thread::hardware_concurrency()))
                                                  : 1;
                write_csv_row(out, std::vector<std::string>{std::to_string(events), parallel ? "parallel" : "serial",
                                                            std::to_string(threads), format_double(r.wall_ms),
                                                            format_double(r.cpu_ms), format_double(r.unzip_ms),
                                                            format_double(r.checksum)});
            }
            fs::remove(file);
        }
        written.push_back(path);
    }

    fs::remove_all(data);

    const auto meta_path = options.out_dir / "report.meta.json";
    nlohmann::json meta = {{"seed", options.seed},
                           {"full", options.full},
                           {"repetitions", options.repetitions},
                           {"threads", options.threads},
                           {"logical_cores", std::thread::hardware_concurrency()},
                           {"sweep_total_bytes", total}};
    std::ofstream(meta_path) << meta.dump(2) << '\n';
    written.push_back(meta_path);
    return written;
}

} // namespace bkio::bench
