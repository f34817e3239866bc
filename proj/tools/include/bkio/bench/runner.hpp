#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <bkio/basket_cache.hpp>

namespace bkio::bench {

enum class Method : std::uint8_t { per_entry, bulk_raw, bulk_decoded, range_copy };

/// What each event contributes to the reduction.
/// momentum and energy need the dimuon branches; sum adds every value of every branch.
enum class Quantity : std::uint8_t { momentum, energy, sum };

std::string_view to_string(Method method) noexcept;
std::string_view to_string(Quantity quantity) noexcept;
/// Accepts "per-entry"/"per_entry" etc.; throws invalid_config.
Method parse_method(std::string_view text);
/// "p", "E" or "sum"; throws invalid_config.
Quantity parse_quantity(std::string_view text);

struct BenchOptions {
    Method method = Method::bulk_decoded;
    Quantity quantity = Quantity::momentum;
    bool prefetch = false;
    unsigned threads = 0;
    int repetitions = 3;
};

struct BenchResult {
    std::string method;
    std::string codec;
    std::uint64_t events = 0;
    double wall_ms = 0;
    double cpu_ms = 0;
    double unzip_ms = 0;
    double events_per_sec = 0;
    /// Compressed bytes read from the file in one pass.
    std::uint64_t bytes = 0;
    /// Result of the reduction, identical across methods for the same file.
    double checksum = 0;
    /// Counters from the median-wall repetition.
    ReaderStats stats;
};

/// Times `repetitions` full passes with a fresh reader each and reports the
/// median wall, CPU and unzip time. Throws invalid_config for repetitions < 1.
BenchResult run_benchmark(const std::filesystem::path& path, const BenchOptions& options);

/// Process CPU time consumed so far, all threads.
double process_cpu_ms();

} // namespace bkio::bench
