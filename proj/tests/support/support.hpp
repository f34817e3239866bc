#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <bkio/deserialize.hpp>
#include <bkio/reader.hpp>
#include <bkio/types.hpp>
#include <bkio/writer.hpp>

namespace bkio::testing {

/// Directory removed with everything in it when the object dies.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }
    [[nodiscard]] std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// `n` values of `kind`; floats are finite so they compare with ==.
NativeArray random_values(ElementKind kind, std::size_t n, std::mt19937_64& rng);

/// Random writer configuration: 1..5 branches of every shape, random basket
/// targets, cluster sizes and codec.
WriterConfig random_config(std::mt19937_64& rng);

/// Everything a file was filled with, entry by entry (log[entry][branch]).
struct FillLog {
    WriterConfig config;
    std::vector<std::vector<NativeArray>> entries;
    FileSummary summary;
};

/// Writes `entries` random entries to `path` and remembers them.
FillLog write_random_file(const std::filesystem::path& path, const WriterConfig& config, std::uint64_t entries,
                          std::mt19937_64& rng);

/// Values of one branch over [begin, end) from the log, concatenated.
NativeArray logged_range(const FillLog& log, BranchId branch, EntryIndex begin, EntryIndex end);

/// Empty string when all three read paths reproduce the log, else the first difference.
std::string verify_three_paths(Reader& reader, const FillLog& log, std::mt19937_64& rng);

/// Byte-exact comparison through the on-disk encoding (NaN-safe).
bool same_values(const NativeArray& a, const NativeArray& b);

} // namespace bkio::testing
