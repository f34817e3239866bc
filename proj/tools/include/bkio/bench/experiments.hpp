#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <bkio/bench/datasets.hpp>
#include <bkio/bench/runner.hpp>
#include <bkio/codec.hpp>

namespace bkio::bench {

/// Per-point measurements of the event-size sweep.
struct SweepMeasurement {
    SweepPoint point;
    double wall_ms = 0;
    double cpu_ms = 0;
    double unzip_ms = 0;
    std::uint64_t uncompressed_bytes = 0;

    [[nodiscard]] double other_cpu_ms() const noexcept { return cpu_ms - unzip_ms; }
    [[nodiscard]] double other_cpu_ns_per_event() const noexcept
    {
        return other_cpu_ms() * 1e6 / static_cast<double>(point.events);
    }
    [[nodiscard]] double other_cpu_ns_per_byte() const noexcept
    {
        return other_cpu_ms() * 1e6 / static_cast<double>(uncompressed_bytes);
    }
    [[nodiscard]] double unzip_ns_per_byte() const noexcept
    {
        return unzip_ms * 1e6 / static_cast<double>(uncompressed_bytes);
    }
};

/// Reads every file of a sweep entry by entry and keeps the repetition with
/// the least CPU time.
std::vector<SweepMeasurement> measure_sweep(const std::vector<SweepFile>& files, int repetitions);

/// Codec table over the sweep data (first point's payload in on-disk byte order).
std::vector<CodecRow> measure_codecs(std::uint64_t total_bytes, std::uint64_t seed, int repetitions);

struct ReportOptions {
    std::filesystem::path out_dir;
    bool full = false;
    int repetitions = 3;
    unsigned threads = 0;
    std::uint64_t seed = default_seed;
};

/// Regenerates the datasets and writes one CSV per figure into out_dir.
/// Returns the paths written.
std::vector<std::filesystem::path> run_report(const ReportOptions& options);

} // namespace bkio::bench
