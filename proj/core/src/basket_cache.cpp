#include <bkio/basket_cache.hpp>

#include <algorithm>
#include <string>

#include <bkio/codec.hpp>
#include <bkio/error.hpp>
#include <bkio/format.hpp>

namespace bkio {

BasketSource::BasketSource(std::unique_ptr<ByteSource> bytes, FileTables tables)
    : bytes_(std::move(bytes)), tables_(std::move(tables)), per_branch_(tables_.branches.size())
{
    basket_cluster_.reserve(tables_.baskets.size());
    for (std::size_t i = 0; i < tables_.baskets.size(); ++i) {
        const auto& m = tables_.baskets[i];
        per_branch_.at(m.branch_id).push_back(i);
        basket_cluster_.push_back(tables_.clusters.cluster_of(m.first_entry));
        by_key_.emplace(BasketKey{m.branch_id, m.first_entry}, i);
    }
    for (auto& list : per_branch_) {
        std::sort(list.begin(), list.end(), [this](std::size_t a, std::size_t b) {
            return tables_.baskets[a].first_entry < tables_.baskets[b].first_entry;
        });
    }
}

std::span<const std::size_t> BasketSource::branch_baskets(BranchId branch) const
{
    if (branch >= per_branch_.size()) {
        throw Error(ErrorCode::out_of_range, "no branch with id " + std::to_string(branch));
    }
    return per_branch_[branch];
}

std::size_t BasketSource::locate(BranchId branch, EntryIndex entry) const
{
    return branch_baskets(branch)[locate_position(branch, entry)];
}

std::size_t BasketSource::locate_position(BranchId branch, EntryIndex entry) const
{
    const auto list = branch_baskets(branch);
    const auto it = std::upper_bound(list.begin(), list.end(), entry, [this](EntryIndex e, std::size_t b) {
        return e < tables_.baskets[b].first_entry;
    });
    if (it == list.begin() || entry >= tables_.baskets[*(it - 1)].end_entry()) {
        throw Error(ErrorCode::out_of_range, "entry " + std::to_string(entry) + " is not in the file ("
                                                 + std::to_string(tables_.total_entries) + " entries)");
    }
    return static_cast<std::size_t>(it - list.begin()) - 1;
}

std::size_t BasketSource::index_of(const BasketKey& key) const
{
    const auto it = by_key_.find(key);
    if (it == by_key_.end()) {
        throw Error(ErrorCode::out_of_range, "no basket of branch " + std::to_string(key.branch_id)
                                                 + " starts at entry " + std::to_string(key.first_entry));
    }
    return it->second;
}

std::vector<std::size_t> BasketSource::cluster_baskets(std::size_t cluster, std::span<const BranchId> branches) const
{
    std::vector<std::size_t> out;
    if (cluster >= tables_.clusters.cluster_count()) {
        return out;
    }
    const auto begin = tables_.clusters.cluster_begin(cluster);
    const auto end = tables_.clusters.cluster_end(cluster);
    for (const auto branch : branches) {
        const auto list = branch_baskets(branch);
        auto it = std::lower_bound(list.begin(), list.end(), begin, [this](std::size_t b, EntryIndex e) {
            return tables_.baskets[b].first_entry < e;
        });
        for (; it != list.end() && tables_.baskets[*it].first_entry < end; ++it) {
            out.push_back(*it);
        }
    }
    std::sort(out.begin(), out.end(), [this](std::size_t a, std::size_t b) {
        return tables_.baskets[a].file_offset < tables_.baskets[b].file_offset;
    });
    return out;
}

std::vector<std::uint8_t> BasketSource::load(std::size_t basket) const
{
    const auto& m = meta(basket);
    const auto record = bytes_->read_vector(m.file_offset, basket_record_header_size + m.compressed_size);
    counters_.bytes_read.fetch_add(record.size(), std::memory_order_relaxed);

    const auto rec = decode_basket_record(record);
    if (rec.meta.branch_id != m.branch_id || rec.meta.first_entry != m.first_entry
        || rec.meta.entry_count != m.entry_count || rec.meta.spec != m.spec
        || rec.meta.uncompressed_size != m.uncompressed_size || rec.meta.compressed_size != m.compressed_size) {
        throw Error(ErrorCode::invalid_index, "record at offset " + std::to_string(m.file_offset)
                                                  + " disagrees with the footer");
    }

    std::vector<std::uint8_t> out(m.uncompressed_size);
    const auto stats = decompress_into(rec.payload, m.spec, out);
    counters_.decompress_calls.fetch_add(1, std::memory_order_relaxed);
    counters_.unzip_nanos.fetch_add(static_cast<std::uint64_t>(stats.elapsed.count()), std::memory_order_relaxed);
    return out;
}

ReaderStats BasketSource::stats() const noexcept
{
    ReaderStats s;
    s.decompress_calls = counters_.decompress_calls.load();
    s.decode_passes = counters_.decode_passes.load();
    s.proxy_constructions = counters_.proxy_constructions.load();
    s.bytes_read = counters_.bytes_read.load();
    s.unzip_time = std::chrono::nanoseconds(counters_.unzip_nanos.load());
    s.baskets_evicted = counters_.baskets_evicted.load();
    return s;
}

void BasketSource::reset_stats() const noexcept
{
    counters_.decompress_calls = 0;
    counters_.decode_passes = 0;
    counters_.proxy_constructions = 0;
    counters_.bytes_read = 0;
    counters_.unzip_nanos = 0;
    counters_.baskets_evicted = 0;
}

std::string_view to_string(BasketStatus status) noexcept
{
    switch (status) {
    case BasketStatus::unscheduled: return "unscheduled";
    case BasketStatus::queued: return "queued";
    case BasketStatus::running: return "running";
    case BasketStatus::ready: return "ready";
    case BasketStatus::failed: return "failed";
    }
    return "?";
}

BasketSlot::BasketSlot(std::size_t basket, std::size_t cluster, std::uint64_t stamp, BasketStatus initial)
    : basket_(basket), cluster_(cluster), stamp_(stamp), live_stamp_(stamp), status_(initial)
{}

BasketStatus BasketSlot::status() const
{
    std::lock_guard lock(mutex_);
    return status_;
}

bool BasketSlot::try_start()
{
    std::lock_guard lock(mutex_);
    if (status_ != BasketStatus::queued) {
        return false;
    }
    status_ = BasketStatus::running;
    return true;
}

void BasketSlot::set_ready(std::vector<std::uint8_t> bytes)
{
    {
        std::lock_guard lock(mutex_);
        if (status_ == BasketStatus::ready || status_ == BasketStatus::failed) {
            return;
        }
        bytes_ = std::move(bytes);
        status_ = BasketStatus::ready;
    }
    ready_cv_.notify_all();
}

void BasketSlot::set_failed(std::exception_ptr error)
{
    {
        std::lock_guard lock(mutex_);
        if (status_ == BasketStatus::ready || status_ == BasketStatus::failed) {
            return;
        }
        error_ = std::move(error);
        status_ = BasketStatus::failed;
    }
    ready_cv_.notify_all();
}

const std::vector<std::uint8_t>& BasketSlot::wait() const
{
    std::unique_lock lock(mutex_);
    ready_cv_.wait(lock, [this] { return status_ == BasketStatus::ready || status_ == BasketStatus::failed; });
    if (status_ == BasketStatus::failed) {
        std::rethrow_exception(error_);
    }
    return bytes_;
}

bool BasketSlot::wait_for(std::chrono::milliseconds timeout) const
{
    std::unique_lock lock(mutex_);
    return ready_cv_.wait_for(lock, timeout,
                              [this] { return status_ == BasketStatus::ready || status_ == BasketStatus::failed; });
}

const NativeArray& BasketSlot::decoded(ElementKind kind, ReaderCounters& counters) const
{
    const auto& raw = wait();
    std::call_once(decode_once_, [&] {
        decoded_ = decode_elements(raw, kind);
        counters.decode_passes.fetch_add(1, std::memory_order_relaxed);
    });
    return decoded_;
}

std::pair<std::shared_ptr<BasketSlot>, bool> BasketCache::find_or_insert(const BasketSource& source,
                                                                         std::size_t basket, BasketStatus initial)
{
    const auto key = source.key(basket);
    std::lock_guard lock(mutex_);
    const auto it = slots_.find(key);
    if (it != slots_.end()) {
        return {it->second, false};
    }
    auto slot = std::make_shared<BasketSlot>(basket, source.cluster_of_basket(basket), next_stamp_++, initial);
    slots_.emplace(key, slot);
    return {std::move(slot), true};
}

std::shared_ptr<BasketSlot> BasketCache::find(const BasketKey& key) const
{
    std::lock_guard lock(mutex_);
    const auto it = slots_.find(key);
    return it == slots_.end() ? nullptr : it->second;
}

std::size_t BasketCache::evict_outside(std::size_t first_cluster, std::size_t last_cluster)
{
    std::lock_guard lock(mutex_);
    return std::erase_if(slots_, [&](auto& entry) {
        const auto cluster = entry.second->cluster();
        if (cluster >= first_cluster && cluster <= last_cluster) {
            return false;
        }
        entry.second->retire();
        return true;
    });
}

void BasketCache::clear()
{
    std::lock_guard lock(mutex_);
    for (auto& [key, slot] : slots_) {
        slot->retire();
    }
    slots_.clear();
}

std::size_t BasketCache::size() const
{
    std::lock_guard lock(mutex_);
    return slots_.size();
}

std::shared_ptr<BasketSlot> acquire_basket(const BasketSource& source, BasketCache& cache, std::size_t basket)
{
    auto [slot, created] = cache.find_or_insert(source, basket, BasketStatus::running);
    if (created) {
        try {
            slot->set_ready(source.load(basket));
        } catch (...) {
            slot->set_failed(std::current_exception());
        }
    }
    slot->wait();
    return slot;
}

} // namespace bkio
