#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include <bkio/deserialize.hpp>
#include <bkio/io.hpp>
#include <bkio/types.hpp>

namespace bkio {

struct BasketKey {
    BranchId branch_id = 0;
    EntryIndex first_entry = 0;

    friend auto operator<=>(const BasketKey&, const BasketKey&) = default;
};

/// Instrumentation shared by the consumer thread and the unzip workers.
struct ReaderCounters {
    std::atomic<std::uint64_t> decompress_calls{0};
    std::atomic<std::uint64_t> decode_passes{0};
    std::atomic<std::uint64_t> proxy_constructions{0};
    std::atomic<std::uint64_t> bytes_read{0};
    std::atomic<std::uint64_t> unzip_nanos{0};
    std::atomic<std::uint64_t> baskets_evicted{0};
};

struct ReaderStats {
    std::uint64_t decompress_calls = 0;
    std::uint64_t decode_passes = 0;
    std::uint64_t proxy_constructions = 0;
    std::uint64_t bytes_read = 0;
    std::chrono::nanoseconds unzip_time{0};
    std::uint64_t baskets_evicted = 0;
};

/// Immutable file index plus positional payload access. Safe to share between threads.
class BasketSource {
public:
    BasketSource(std::unique_ptr<ByteSource> bytes, FileTables tables);

    [[nodiscard]] const FileTables& tables() const noexcept { return tables_; }
    [[nodiscard]] const BasketMeta& meta(std::size_t basket) const { return tables_.baskets.at(basket); }
    [[nodiscard]] BasketKey key(std::size_t basket) const
    {
        const auto& m = meta(basket);
        return {m.branch_id, m.first_entry};
    }

    /// Global basket indices of one branch, ordered by first_entry.
    [[nodiscard]] std::span<const std::size_t> branch_baskets(BranchId branch) const;
    /// Global index of the basket of `branch` that holds `entry`.
    [[nodiscard]] std::size_t locate(BranchId branch, EntryIndex entry) const;
    /// Position of that basket within branch_baskets(branch).
    [[nodiscard]] std::size_t locate_position(BranchId branch, EntryIndex entry) const;
    [[nodiscard]] std::size_t index_of(const BasketKey& key) const;
    [[nodiscard]] std::size_t cluster_of_basket(std::size_t basket) const { return basket_cluster_.at(basket); }
    /// Baskets of the listed branches that start inside `cluster`.
    [[nodiscard]] std::vector<std::size_t> cluster_baskets(std::size_t cluster, std::span<const BranchId> branches) const;

    /// Reads the record, cross-checks it against the footer and decompresses it.
    [[nodiscard]] std::vector<std::uint8_t> load(std::size_t basket) const;

    [[nodiscard]] ReaderCounters& counters() const noexcept { return counters_; }
    [[nodiscard]] ReaderStats stats() const noexcept;
    void reset_stats() const noexcept;

private:
    std::unique_ptr<ByteSource> bytes_;
    FileTables tables_;
    std::vector<std::vector<std::size_t>> per_branch_;
    std::vector<std::size_t> basket_cluster_;
    std::map<BasketKey, std::size_t> by_key_;
    mutable ReaderCounters counters_;
};

enum class BasketStatus : std::uint8_t { unscheduled, queued, running, ready, failed };

std::string_view to_string(BasketStatus status) noexcept;

/// One decompressed basket and its readiness signal. Status only moves forward:
/// unscheduled -> queued -> running -> ready | failed (queued may go straight to failed).
class BasketSlot {
public:
    BasketSlot(std::size_t basket, std::size_t cluster, std::uint64_t stamp, BasketStatus initial);

    [[nodiscard]] std::size_t basket() const noexcept { return basket_; }
    [[nodiscard]] std::size_t cluster() const noexcept { return cluster_; }
    [[nodiscard]] BasketStatus status() const;

    /// queued -> running; false if the slot is no longer queued.
    bool try_start();
    void set_ready(std::vector<std::uint8_t> bytes);
    void set_failed(std::exception_ptr error);

    /// Blocks until ready or failed; rethrows the stored error on failure.
    const std::vector<std::uint8_t>& wait() const;
    /// False on timeout.
    bool wait_for(std::chrono::milliseconds timeout) const;

    /// Decoded host-native copy of the payload, computed at most once.
    const NativeArray& decoded(ElementKind kind, ReaderCounters& counters) const;

    /// Generation stamp handed to views; retire() invalidates it.
    [[nodiscard]] std::uint64_t stamp() const noexcept { return stamp_; }
    [[nodiscard]] bool is_live(std::uint64_t stamp) const noexcept
    {
        return live_stamp_.load(std::memory_order_acquire) == stamp;
    }
    void retire() noexcept { live_stamp_.store(0, std::memory_order_release); }

private:
    std::size_t basket_;
    std::size_t cluster_;
    std::uint64_t stamp_;
    std::atomic<std::uint64_t> live_stamp_;

    mutable std::mutex mutex_;
    mutable std::condition_variable ready_cv_;
    BasketStatus status_;
    std::vector<std::uint8_t> bytes_;
    std::exception_ptr error_;

    mutable std::once_flag decode_once_;
    mutable NativeArray decoded_;
};

/// Concurrent map from basket key to slot.
class BasketCache {
public:
    /// Returns the existing slot, or inserts one with `initial` status (second = true).
    std::pair<std::shared_ptr<BasketSlot>, bool> find_or_insert(const BasketSource& source, std::size_t basket,
                                                                BasketStatus initial);
    [[nodiscard]] std::shared_ptr<BasketSlot> find(const BasketKey& key) const;

    /// Retires and drops every slot whose cluster lies outside [first, last].
    std::size_t evict_outside(std::size_t first_cluster, std::size_t last_cluster);
    void clear();
    [[nodiscard]] std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::map<BasketKey, std::shared_ptr<BasketSlot>> slots_;
    std::uint64_t next_stamp_ = 1;
};

/// Returns the ready slot for `basket`, decompressing on the calling thread if
/// nobody has scheduled it yet, otherwise waiting for whoever has.
std::shared_ptr<BasketSlot> acquire_basket(const BasketSource& source, BasketCache& cache, std::size_t basket);

} // namespace bkio
