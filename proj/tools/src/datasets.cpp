#include <bkio/bench/datasets.hpp>

#include <algorithm>
#include <cmath>

#include <bkio/error.hpp>

namespace bkio::bench {

namespace {

// Detector-like resolution keeps the values from being pure noise to the codecs.
float quantize(double value, double step) { return static_cast<float>(std::round(value / step) * step); }

} // namespace

DimuonRecord make_dimuon(std::mt19937_64& rng)
{
    std::normal_distribution<double> transverse(0.0, 15.0);
    std::normal_distribution<double> longitudinal(0.0, 40.0);
    std::uniform_real_distribution<double> pick(0.0, 1.0);

    DimuonRecord r;
    r.px = quantize(transverse(rng), 1.0 / 64);
    r.py = quantize(transverse(rng), 1.0 / 64);
    r.pz = quantize(longitudinal(rng), 1.0 / 64);

    const double u = pick(rng);
    double mass = 0;
    if (u < 0.10) {
        mass = std::normal_distribution<double>(3.097, 0.03)(rng);
    } else if (u < 0.15) {
        mass = std::normal_distribution<double>(9.46, 0.08)(rng);
    } else if (u < 0.30) {
        mass = std::normal_distribution<double>(91.19, 2.5)(rng);
    } else {
        mass = 2.0 + std::exponential_distribution<double>(0.1)(rng);
    }
    r.mass = quantize(std::abs(mass), 1.0 / 1024);
    return r;
}

FileSummary generate_dimuon(const std::filesystem::path& path, const DimuonOptions& options)
{
    const auto mass_target = options.misaligned
                                 ? static_cast<std::uint32_t>(options.basket_bytes * options.mass_basket_factor)
                                 : options.basket_bytes;
    WriterConfig config;
    config.spec = options.spec;
    config.cluster_every = options.cluster_every;
    config.branches = {
        {0, "px", ElementKind::f32, BranchShape::scalar(), options.basket_bytes},
        {1, "py", ElementKind::f32, BranchShape::scalar(), options.basket_bytes},
        {2, "pz", ElementKind::f32, BranchShape::scalar(), options.basket_bytes},
        {3, "mass", ElementKind::f32, BranchShape::scalar(), mass_target},
    };
    auto writer = Writer::open(path, std::move(config));
    std::mt19937_64 rng(options.seed);
    for (std::uint64_t i = 0; i < options.events; ++i) {
        const auto r = make_dimuon(rng);
        writer.fill_entry({r.px, r.py, r.pz, r.mass});
    }
    return writer.close();
}

void SweepPoint::validate(std::uint64_t total_bytes) const
{
    if (events == 0 || floats_per_event == 0 || payload_bytes() != total_bytes) {
        throw Error(ErrorCode::invalid_config,
                    "sweep point " + std::to_string(events) + " x " + std::to_string(floats_per_event)
                        + " floats does not hold " + std::to_string(total_bytes) + " bytes");
    }
}

std::vector<SweepPoint> sweep_points(std::uint64_t total_bytes)
{
    std::vector<SweepPoint> points;
    for (std::uint64_t fpe = 10; fpe <= 1'000'000; fpe *= 10) {
        SweepPoint p{total_bytes / (4 * fpe), fpe};
        if (p.events == 0) {
            // Smaller totals simply stop the ladder early.
            break;
        }
        p.validate(total_bytes);
        points.push_back(p);
    }
    if (points.empty()) {
        throw Error(ErrorCode::invalid_config, "total of " + std::to_string(total_bytes)
                                                   + " bytes cannot hold one event of 10 floats");
    }
    return points;
}

std::vector<float> sweep_values(std::uint64_t count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<float> out(count);
    for (auto& v : out) {
        v = quantize(gauss(rng), 1.0 / 64);
    }
    return out;
}

std::string sweep_file_name(const SweepPoint& point, const CompressionSpec& spec)
{
    return "sweep_" + std::to_string(point.floats_per_event) + "fpe_" + spec.label() + ".bkio";
}

SweepFile generate_sweep_point(const std::filesystem::path& dir, const SweepPoint& point, std::uint64_t total_bytes,
                               const SweepOptions& options)
{
    point.validate(total_bytes);
    const auto fpe = point.floats_per_event;
    WriterConfig config;
    config.spec = options.spec;
    config.cluster_every = std::max<std::uint64_t>(1, options.cluster_bytes / (fpe * 4));
    config.branches = {{0, "x", ElementKind::f32, BranchShape::fixed_array(static_cast<std::uint32_t>(fpe)),
                        options.basket_bytes}};

    SweepFile file{point, dir / sweep_file_name(point, options.spec), {}};
    auto writer = Writer::open(file.path, std::move(config));

    // The value stream is the same for every point; only the event boundaries move.
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<float> event(fpe);
    for (std::uint64_t e = 0; e < point.events; ++e) {
        for (auto& v : event) {
            v = quantize(gauss(rng), 1.0 / 64);
        }
        writer.fill_entry({EntryValue(event)});
    }
    file.summary = writer.close();
    return file;
}

std::vector<SweepFile> generate_sweep(const std::filesystem::path& dir, std::span<const SweepPoint> points,
                                      std::uint64_t total_bytes, const SweepOptions& options)
{
    std::vector<SweepFile> files;
    for (const auto& p : points) {
        files.push_back(generate_sweep_point(dir, p, total_bytes, options));
    }
    return files;
}

} // namespace bkio::bench
