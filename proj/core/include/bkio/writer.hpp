#pragma once

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <memory>
#include <span>
#include <vector>

#include <bkio/codec.hpp>
#include <bkio/io.hpp>
#include <bkio/types.hpp>

namespace bkio {

struct WriterConfig {
    std::vector<BranchDescriptor> branches;
    CompressionSpec spec;
    std::uint64_t cluster_every = 1000;

    /// Throws invalid_config.
    void validate() const;
};

/// Type-erased, non-owning value for one branch of one entry.
class EntryValue {
public:
    template <Element T>
    EntryValue(const T& scalar) noexcept // NOLINT(google-explicit-constructor)
        : kind_(ElementTraits<T>::kind), data_(&scalar), count_(1), is_array_(false)
    {}

    template <Element T>
    EntryValue(std::span<const T> values) noexcept // NOLINT(google-explicit-constructor)
        : kind_(ElementTraits<T>::kind), data_(values.data()), count_(values.size()), is_array_(true)
    {}

    template <Element T>
    EntryValue(const std::vector<T>& values) noexcept // NOLINT(google-explicit-constructor)
        : EntryValue(std::span<const T>(values))
    {}

    [[nodiscard]] ElementKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::size_t count() const noexcept { return count_; }
    [[nodiscard]] bool is_array() const noexcept { return is_array_; }
    [[nodiscard]] const void* data() const noexcept { return data_; }

private:
    ElementKind kind_;
    const void* data_;
    std::size_t count_;
    bool is_array_;
};

struct FileSummary {
    std::uint64_t total_entries = 0;
    std::uint64_t basket_count = 0;
    std::uint64_t bytes_written = 0;
    std::uint64_t uncompressed_payload_bytes = 0;
    CodecStats compression;
};

/// Single-threaded writer. Each branch accumulates into its own buffer and emits
/// a basket as soon as the buffer reaches the branch's basket_target_bytes; every
/// cluster_every entries all branches are flushed together.
class Writer {
public:
    /// Writes the file header; throws invalid_config or io_failure.
    static Writer open(const std::filesystem::path& path, WriterConfig config);

    Writer(Writer&&) noexcept;
    Writer& operator=(Writer&&) noexcept;
    Writer(const Writer&) = delete;
    Writer& operator=(const Writer&) = delete;
    /// Closes the file if close() was not called; errors are swallowed.
    ~Writer();

    /// One value per branch, in branch_id order. Throws type_mismatch naming
    /// the offending branch.
    void fill_entry(std::span<const EntryValue> values);
    void fill_entry(std::initializer_list<EntryValue> values) { fill_entry(std::span(values.begin(), values.size())); }

    /// Emits a basket for every branch with buffered entries and records a
    /// cluster boundary at the current entry count.
    void flush_cluster();

    /// Final flush, then footer and trailer. Throws writer_closed on a second call.
    FileSummary close();

    [[nodiscard]] std::uint64_t entries() const noexcept;
    [[nodiscard]] bool is_open() const noexcept;
    [[nodiscard]] const std::vector<BasketMeta>& baskets() const noexcept;
    [[nodiscard]] const ClusterIndex& clusters() const noexcept;
    [[nodiscard]] const WriterConfig& config() const noexcept;
    /// Entries currently buffered (not yet in a basket) for a branch.
    [[nodiscard]] std::uint32_t buffered_entries(BranchId branch) const;

private:
    struct State;
    explicit Writer(std::unique_ptr<State> state);
    std::unique_ptr<State> state_;
};

} // namespace bkio
