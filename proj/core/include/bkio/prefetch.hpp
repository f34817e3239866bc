#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include <bkio/basket_cache.hpp>
#include <bkio/types.hpp>

namespace bkio {

inline constexpr std::size_t default_task_target_bytes = 102400;

/// A batch of baskets decompressed back to back by one worker.
struct UnzipTask {
    std::vector<BasketKey> baskets;
    std::uint64_t compressed_bytes = 0;
};

/// Packs one cluster's baskets into tasks in file-offset order: baskets are
/// added until the running compressed size reaches `target_bytes`, then a new
/// task starts. The last task may be smaller.
std::vector<UnzipTask> partition_baskets(std::span<const BasketMeta> baskets,
                                         std::size_t target_bytes = default_task_target_bytes);

/// Fixed set of worker threads draining a FIFO of jobs.
class WorkerPool {
public:
    struct Job {
        std::function<void()> run;
        std::function<void()> cancel; ///< called instead of run when the pool shuts down first
    };

    explicit WorkerPool(unsigned workers);
    ~WorkerPool();

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    /// False once shutdown() has begun.
    bool submit(Job job);
    /// Cancels queued jobs, lets running ones finish, joins the workers. Idempotent.
    void shutdown();

    [[nodiscard]] unsigned size() const noexcept { return static_cast<unsigned>(threads_.size()); }
    [[nodiscard]] bool is_running() const;

private:
    void worker_loop(std::stop_token stop);

    mutable std::mutex mutex_;
    std::condition_variable_any cv_;
    std::deque<Job> queue_;
    bool stopping_ = false;
    std::vector<std::jthread> threads_;
};

struct PrefetchConfig {
    unsigned workers = 0; ///< 0 = number of logical cores
    std::size_t task_target_bytes = default_task_target_bytes;
    unsigned lookahead_clusters = 1;
    /// Test hook run by a worker before each task (e.g. to inject delays).
    std::function<void(const UnzipTask&)> before_task;
};

/// Schedules whole clusters of basket decompression onto a worker pool; results
/// land in the shared BasketCache. The consumer blocks only in wait_basket.
class Prefetcher {
public:
    Prefetcher(std::shared_ptr<const BasketSource> source, std::shared_ptr<BasketCache> cache, PrefetchConfig config);
    ~Prefetcher();

    Prefetcher(const Prefetcher&) = delete;
    Prefetcher& operator=(const Prefetcher&) = delete;

    /// Queues every not-yet-known basket of `branches` in `cluster` and returns
    /// without waiting. Returns the number of tasks created; scheduling an
    /// already scheduled cluster creates none. Throws pool_shutdown.
    std::size_t schedule_cluster(std::size_t cluster, std::span<const BranchId> branches);

    /// Blocks until the basket is ready or failed. Unscheduled baskets are
    /// decompressed inline. Rethrows the basket's error on failure.
    std::shared_ptr<BasketSlot> wait_basket(std::size_t basket);

    [[nodiscard]] BasketStatus status(std::size_t basket) const;
    void shutdown();

    [[nodiscard]] const PrefetchConfig& config() const noexcept { return config_; }
    [[nodiscard]] unsigned worker_count() const noexcept { return pool_.size(); }
    [[nodiscard]] std::uint64_t tasks_submitted() const noexcept { return tasks_submitted_; }

private:
    std::shared_ptr<const BasketSource> source_;
    std::shared_ptr<BasketCache> cache_;
    PrefetchConfig config_;
    std::uint64_t tasks_submitted_ = 0;
    WorkerPool pool_;
};

} // namespace bkio
