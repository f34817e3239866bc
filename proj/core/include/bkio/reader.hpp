#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <bkio/basket_cache.hpp>
#include <bkio/deserialize.hpp>
#include <bkio/endian.hpp>
#include <bkio/error.hpp>
#include <bkio/io.hpp>
#include <bkio/prefetch.hpp>
#include <bkio/types.hpp>

namespace bkio {

enum class DeliveryMode : std::uint8_t { raw_serialized, decoded_native };
enum class Ownership : std::uint8_t { view, copy };

std::string_view to_string(DeliveryMode mode) noexcept;
std::string_view to_string(Ownership ownership) noexcept;

/// Big-endian bytes seen as an array of T; each access decodes in place.
template <Element T>
class BigEndianView {
public:
    BigEndianView() = default;
    explicit BigEndianView(std::span<const std::uint8_t> bytes) noexcept : bytes_(bytes) {}

    [[nodiscard]] T operator[](std::size_t i) const noexcept { return load_be<T>(bytes_.data() + i * sizeof(T)); }
    [[nodiscard]] std::size_t size() const noexcept { return bytes_.size() / sizeof(T); }
    [[nodiscard]] std::span<const std::uint8_t> bytes() const noexcept { return bytes_; }

private:
    std::span<const std::uint8_t> bytes_;
};

/// Holds the data behind a view alive and remembers the generation it was taken at.
class ViewGuard {
public:
    ViewGuard() = default;
    ViewGuard(std::shared_ptr<const BasketSlot> slot, std::uint64_t stamp) : slot_(std::move(slot)), stamp_(stamp) {}

    [[nodiscard]] bool is_valid() const noexcept { return !slot_ || slot_->is_live(stamp_); }
    void check() const
    {
        if (!is_valid()) {
            throw Error(ErrorCode::stale_view, "the basket behind this view was evicted from the reader cache");
        }
    }

private:
    std::shared_ptr<const BasketSlot> slot_;
    std::uint64_t stamp_ = 0;
};

/// All entries of one basket, delivered by a single call.
class BulkSlice {
public:
    [[nodiscard]] BranchId branch_id() const noexcept { return branch_id_; }
    [[nodiscard]] EntryIndex first_entry() const noexcept { return first_entry_; }
    [[nodiscard]] std::uint32_t entry_count() const noexcept { return entry_count_; }
    [[nodiscard]] DeliveryMode mode() const noexcept { return mode_; }
    [[nodiscard]] Ownership ownership() const noexcept { return ownership_; }
    [[nodiscard]] ElementKind element() const noexcept { return element_; }
    [[nodiscard]] std::uint32_t values_per_entry() const noexcept { return values_per_entry_; }

    /// False once a view's basket has been evicted; copies are always valid.
    [[nodiscard]] bool is_valid() const noexcept { return guard_.is_valid(); }

    /// On-disk bytes (raw_serialized only).
    [[nodiscard]] std::span<const std::uint8_t> raw() const
    {
        require(DeliveryMode::raw_serialized);
        return raw_;
    }

    template <Element T>
    [[nodiscard]] BigEndianView<T> raw_as() const
    {
        require(DeliveryMode::raw_serialized);
        check_type<T>();
        return BigEndianView<T>(raw_);
    }

    /// Host-native values (decoded_native only).
    template <Element T>
    [[nodiscard]] std::span<const T> values() const
    {
        require(DeliveryMode::decoded_native);
        return native_span<T>(*decoded_);
    }

    /// Element `k` of local entry `entry`, in either mode.
    template <Element T>
    [[nodiscard]] T value(std::size_t entry, std::size_t k = 0) const
    {
        guard_.check();
        check_type<T>();
        const std::size_t index = entry * values_per_entry_ + k;
        if (entry >= entry_count_ || k >= values_per_entry_) {
            throw Error(ErrorCode::out_of_range, "slice element out of range");
        }
        if (mode_ == DeliveryMode::raw_serialized) {
            return load_be<T>(raw_.data() + index * sizeof(T));
        }
        return native_span<T>(*decoded_)[index];
    }

private:
    friend class Reader;

    void require(DeliveryMode mode) const
    {
        guard_.check();
        if (mode_ != mode) {
            throw Error(ErrorCode::type_mismatch, "slice was delivered as " + std::string(to_string(mode_)));
        }
    }

    template <Element T>
    void check_type() const
    {
        if (ElementTraits<T>::kind != element_) {
            throw Error(ErrorCode::type_mismatch, "slice holds " + std::string(to_string(element_)) + " elements");
        }
    }

    BranchId branch_id_ = 0;
    EntryIndex first_entry_ = 0;
    std::uint32_t entry_count_ = 0;
    DeliveryMode mode_ = DeliveryMode::raw_serialized;
    Ownership ownership_ = Ownership::view;
    ElementKind element_ = ElementKind::f32;
    std::uint32_t values_per_entry_ = 1;

    ViewGuard guard_;
    std::span<const std::uint8_t> raw_;
    const NativeArray* decoded_ = nullptr;
    std::shared_ptr<const std::vector<std::uint8_t>> owned_raw_;
    std::shared_ptr<const NativeArray> owned_decoded_;
};

/// One branch's values over an entry range, host-native and contiguous.
class ColumnArray {
public:
    [[nodiscard]] BranchId branch_id() const noexcept { return branch_id_; }
    [[nodiscard]] EntryIndex begin_entry() const noexcept { return begin_; }
    [[nodiscard]] std::uint64_t entry_count() const noexcept { return entry_count_; }
    [[nodiscard]] Ownership ownership() const noexcept { return ownership_; }
    [[nodiscard]] ElementKind element() const noexcept { return element_; }
    [[nodiscard]] std::uint32_t values_per_entry() const noexcept { return values_per_entry_; }
    [[nodiscard]] bool is_valid() const noexcept { return guard_.is_valid(); }

    template <Element T>
    [[nodiscard]] std::span<const T> values() const
    {
        guard_.check();
        return native_span<T>(*array_).subspan(offset_, length_);
    }

    [[nodiscard]] double as_double(std::size_t index) const
    {
        guard_.check();
        if (index >= length_) {
            throw Error(ErrorCode::out_of_range, "column element out of range");
        }
        return element_as_double(*array_, offset_ + index);
    }

private:
    friend class Reader;

    BranchId branch_id_ = 0;
    EntryIndex begin_ = 0;
    std::uint64_t entry_count_ = 0;
    Ownership ownership_ = Ownership::copy;
    ElementKind element_ = ElementKind::f32;
    std::uint32_t values_per_entry_ = 1;

    ViewGuard guard_;
    const NativeArray* array_ = nullptr;
    std::size_t offset_ = 0;
    std::size_t length_ = 0;
    std::shared_ptr<const NativeArray> owned_;
};

/// Decoded values of the requested branches for one entry.
class EntryProxy {
public:
    struct Field {
        BranchId branch_id;
        NativeArray values;
    };

    [[nodiscard]] EntryIndex entry() const noexcept { return entry_; }
    [[nodiscard]] std::size_t size() const noexcept { return fields_.size(); }
    [[nodiscard]] const Field& field(std::size_t i) const { return fields_.at(i); }
    /// Element count of field i (1 for scalars).
    [[nodiscard]] std::size_t length(std::size_t i) const { return size_of(fields_.at(i).values); }

    template <Element T>
    [[nodiscard]] T scalar(std::size_t i) const
    {
        return native_span<T>(fields_.at(i).values).front();
    }

    template <Element T>
    [[nodiscard]] std::span<const T> array(std::size_t i) const
    {
        return native_span<T>(fields_.at(i).values);
    }

    [[nodiscard]] double as_double(std::size_t i, std::size_t k = 0) const
    {
        return element_as_double(fields_.at(i).values, k);
    }

private:
    friend class Reader;
    EntryIndex entry_ = 0;
    std::vector<Field> fields_;
};

struct ReaderOptions {
    bool prefetch = false;
    PrefetchConfig prefetch_config;
};

/// Reads a BKIO file either one entry at a time or one basket per call.
/// A reader serves a single consumer thread; when prefetching is enabled the
/// unzip workers fill its basket cache concurrently.
///
/// The cache holds the consumer's current cluster plus the lookahead window;
/// moving to another cluster evicts everything else and invalidates views into it.
class Reader {
public:
    static Reader open(const std::filesystem::path& path, ReaderOptions options = {});
    static Reader open(std::unique_ptr<ByteSource> bytes, ReaderOptions options = {});

    Reader(Reader&&) noexcept;
    Reader& operator=(Reader&&) noexcept;
    Reader(const Reader&) = delete;
    Reader& operator=(const Reader&) = delete;
    ~Reader();

    [[nodiscard]] const FileTables& tables() const noexcept;
    [[nodiscard]] const std::vector<BranchDescriptor>& branches() const noexcept;
    [[nodiscard]] std::uint64_t total_entries() const noexcept;
    /// Throws out_of_range for unknown names.
    [[nodiscard]] BranchId branch_id(std::string_view name) const;
    [[nodiscard]] std::size_t basket_count(BranchId branch) const;
    [[nodiscard]] const BasketMeta& basket(BranchId branch, std::size_t index) const;

    EntryProxy get_entry(std::span<const BranchId> branches, EntryIndex entry);
    EntryProxy get_entry(std::initializer_list<BranchId> branches, EntryIndex entry)
    {
        return get_entry(std::span(branches.begin(), branches.size()), entry);
    }

    /// Every entry of the `index`-th basket of `branch`. Scalar and fixed_array only.
    BulkSlice read_basket_bulk(BranchId branch, std::size_t index, DeliveryMode mode,
                               Ownership ownership = Ownership::view);

    /// Copies the `index`-th basket's on-disk bytes into `dest`; returns bytes written.
    std::size_t read_basket_into(BranchId branch, std::size_t index, std::span<std::uint8_t> dest);

    /// Decodes the `index`-th basket straight into `dest`; returns values written.
    template <Element T>
    std::size_t read_basket_into(BranchId branch, std::size_t index, std::span<T> dest)
    {
        const auto raw = bulk_raw_for_copy(branch, index, ElementTraits<T>::kind);
        const std::size_t n = raw.size() / sizeof(T);
        if (dest.size() < n) {
            throw Error(ErrorCode::size_mismatch, "destination holds " + std::to_string(dest.size())
                                                      + " values, basket has " + std::to_string(n));
        }
        decode_into(raw, dest.first(n));
        note_decode_pass();
        return n;
    }

    /// Index-aligned arrays for [begin, end). A branch whose range sits inside a
    /// single basket is returned as a view; otherwise baskets are stitched into a copy.
    std::vector<ColumnArray> read_range_aligned(std::span<const BranchId> branches, EntryIndex begin, EntryIndex end,
                                                bool force_copy = false);

    [[nodiscard]] ReaderStats stats() const noexcept;
    void reset_stats() noexcept;
    [[nodiscard]] std::size_t cached_baskets() const;
    /// Drops every cached basket; outstanding views become stale.
    void evict_all();
    /// Null when prefetching is disabled.
    [[nodiscard]] Prefetcher* prefetcher() noexcept;

private:
    struct Impl;
    explicit Reader(std::unique_ptr<Impl> impl);

    std::span<const std::uint8_t> bulk_raw_for_copy(BranchId branch, std::size_t index, ElementKind expected);
    void note_decode_pass() noexcept;

    std::unique_ptr<Impl> impl_;
};

} // namespace bkio
