#include <bkio/prefetch.hpp>

#include <algorithm>
#include <map>
#include <string>

#include <bkio/error.hpp>

namespace bkio {

std::vector<UnzipTask> partition_baskets(std::span<const BasketMeta> baskets, std::size_t target_bytes)
{
    std::vector<const BasketMeta*> ordered;
    ordered.reserve(baskets.size());
    for (const auto& m : baskets) {
        ordered.push_back(&m);
    }
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const BasketMeta* a, const BasketMeta* b) { return a->file_offset < b->file_offset; });

    std::vector<UnzipTask> tasks;
    UnzipTask current;
    for (const auto* m : ordered) {
        current.baskets.push_back({m->branch_id, m->first_entry});
        current.compressed_bytes += m->compressed_size;
        if (current.compressed_bytes >= target_bytes) {
            tasks.push_back(std::move(current));
            current = {};
        }
    }
    if (!current.baskets.empty()) {
        tasks.push_back(std::move(current));
    }
    return tasks;
}

WorkerPool::WorkerPool(unsigned workers)
{
    workers = std::max(workers, 1u);
    threads_.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) {
        threads_.emplace_back([this](std::stop_token stop) { worker_loop(stop); });
    }
}

WorkerPool::~WorkerPool() { shutdown(); }

bool WorkerPool::submit(Job job)
{
    {
        std::lock_guard lock(mutex_);
        if (stopping_) {
            return false;
        }
        queue_.push_back(std::move(job));
    }
    cv_.notify_one();
    return true;
}

bool WorkerPool::is_running() const
{
    std::lock_guard lock(mutex_);
    return !stopping_;
}

void WorkerPool::shutdown()
{
    std::deque<Job> abandoned;
    {
        std::lock_guard lock(mutex_);
        stopping_ = true;
        abandoned.swap(queue_);
    }
    cv_.notify_all();
    for (auto& job : abandoned) {
        if (job.cancel) {
            job.cancel();
        }
    }
    for (auto& t : threads_) {
        t.request_stop();
    }
    for (auto& t : threads_) {
        if (t.joinable()) {
            t.join();
        }
    }
}

void WorkerPool::worker_loop(std::stop_token stop)
{
    while (true) {
        Job job;
        {
            std::unique_lock lock(mutex_);
            cv_.wait(lock, stop, [this] { return stopping_ || !queue_.empty(); });
            if (stopping_ || queue_.empty()) {
                return;
            }
            job = std::move(queue_.front());
            queue_.pop_front();
        }
        try {
            job.run();
        } catch (...) {
            // Jobs report their own failures through basket slots.
        }
    }
}

Prefetcher::Prefetcher(std::shared_ptr<const BasketSource> source, std::shared_ptr<BasketCache> cache,
                       PrefetchConfig config)
    : source_(std::move(source)), cache_(std::move(cache)), config_(std::move(config)),
      pool_(config_.workers != 0 ? config_.workers : std::max(std::thread::hardware_concurrency(), 1u))
{
    config_.workers = pool_.size();
}

Prefetcher::~Prefetcher() { shutdown(); }

std::size_t Prefetcher::schedule_cluster(std::size_t cluster, std::span<const BranchId> branches)
{
    if (!pool_.is_running()) {
        throw Error(ErrorCode::pool_shutdown, "cannot schedule cluster " + std::to_string(cluster)
                                                  + " on a shut-down pool");
    }
    if (cluster >= source_->tables().clusters.cluster_count()) {
        throw Error(ErrorCode::out_of_range, "no cluster " + std::to_string(cluster));
    }

    std::vector<BasketMeta> fresh;
    std::map<BasketKey, std::shared_ptr<BasketSlot>> slots;
    for (const auto basket : source_->cluster_baskets(cluster, branches)) {
        auto [slot, created] = cache_->find_or_insert(*source_, basket, BasketStatus::queued);
        if (created) {
            fresh.push_back(source_->meta(basket));
            slots.emplace(source_->key(basket), std::move(slot));
        }
    }

    auto tasks = partition_baskets(fresh, config_.task_target_bytes);
    for (auto& task : tasks) {
        std::vector<std::shared_ptr<BasketSlot>> task_slots;
        task_slots.reserve(task.baskets.size());
        for (const auto& key : task.baskets) {
            task_slots.push_back(slots.at(key));
        }

        WorkerPool::Job job;
        job.cancel = [task_slots] {
            for (const auto& slot : task_slots) {
                slot->set_failed(std::make_exception_ptr(
                    Error(ErrorCode::pool_shutdown, "basket was still queued when the unzip pool shut down")));
            }
        };
        job.run = [task_slots, task = std::move(task), source = source_, hook = config_.before_task] {
            if (hook) {
                hook(task);
            }
            for (const auto& slot : task_slots) {
                if (!slot->try_start()) {
                    continue;
                }
                if (!slot->is_live(slot->stamp())) {
                    slot->set_failed(std::make_exception_ptr(
                        Error(ErrorCode::stale_view, "basket evicted before decompression")));
                    continue;
                }
                try {
                    slot->set_ready(source->load(slot->basket()));
                } catch (...) {
                    slot->set_failed(std::current_exception());
                }
            }
        };
        auto cancel = job.cancel;
        if (!pool_.submit(std::move(job))) {
            cancel();
            throw Error(ErrorCode::pool_shutdown, "unzip pool shut down while scheduling");
        }
        ++tasks_submitted_;
    }
    return tasks.size();
}

std::shared_ptr<BasketSlot> Prefetcher::wait_basket(std::size_t basket)
{
    return acquire_basket(*source_, *cache_, basket);
}

BasketStatus Prefetcher::status(std::size_t basket) const
{
    const auto slot = cache_->find(source_->key(basket));
    return slot ? slot->status() : BasketStatus::unscheduled;
}

void Prefetcher::shutdown() { pool_.shutdown(); }

} // namespace bkio
