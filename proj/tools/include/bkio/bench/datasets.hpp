#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <bkio/types.hpp>
#include <bkio/writer.hpp>

namespace bkio::bench {

inline constexpr std::uint64_t default_seed = 20170901;
inline constexpr std::uint64_t desk_sweep_bytes = 40'000'000;
inline constexpr std::uint64_t full_sweep_bytes = 400'000'000;

/// One simulated dimuon event: four single-precision scalars.
struct DimuonRecord {
    float px = 0;
    float py = 0;
    float pz = 0;
    float mass = 0;
};

/// Draws a record: Gaussian momenta, mass from a few resonances over a falling continuum.
DimuonRecord make_dimuon(std::mt19937_64& rng);

struct DimuonOptions {
    std::uint64_t events = 1'000'000;
    CompressionSpec spec;
    std::uint64_t seed = default_seed;
    std::uint32_t basket_bytes = 32000;
    /// mass gets basket_bytes * factor so its baskets do not line up with the momenta.
    double mass_basket_factor = 0.7;
    bool misaligned = true;
    std::uint64_t cluster_every = 100'000;
};

/// Branches px, py, pz, mass (ids 0..3).
FileSummary generate_dimuon(const std::filesystem::path& path, const DimuonOptions& options);

/// One point of the fixed-size sweep: events * floats_per_event * 4 == total bytes.
struct SweepPoint {
    std::uint64_t events = 0;
    std::uint64_t floats_per_event = 0;

    [[nodiscard]] std::uint64_t payload_bytes() const noexcept { return events * floats_per_event * 4; }
    /// Throws invalid_config unless the point carries exactly `total_bytes`.
    void validate(std::uint64_t total_bytes) const;

    friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

/// Six points from 10 floats/event up to 1M floats/event.
std::vector<SweepPoint> sweep_points(std::uint64_t total_bytes);

struct SweepOptions {
    CompressionSpec spec;
    std::uint64_t seed = default_seed;
    /// Same basket size at every point, so only the event boundaries differ.
    std::uint32_t basket_bytes = 4'000'000;
    std::uint64_t cluster_bytes = 4'000'000;
};

struct SweepFile {
    SweepPoint point;
    std::filesystem::path path;
    FileSummary summary;
};

/// Deterministic quantized-Gaussian floats; identical for every point with the same seed.
std::vector<float> sweep_values(std::uint64_t count, std::uint64_t seed);

/// One file per point with a single fixed_array branch "x".
SweepFile generate_sweep_point(const std::filesystem::path& dir, const SweepPoint& point, std::uint64_t total_bytes,
                               const SweepOptions& options);
std::vector<SweepFile> generate_sweep(const std::filesystem::path& dir, std::span<const SweepPoint> points,
                                      std::uint64_t total_bytes, const SweepOptions& options);

std::string sweep_file_name(const SweepPoint& point, const CompressionSpec& spec);

} // namespace bkio::bench
