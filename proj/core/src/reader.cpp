#include <bkio/reader.hpp>

#include <algorithm>
#include <cstring>
#include <limits>
#include <string>

#include <bkio/format.hpp>

namespace bkio {

std::string_view to_string(DeliveryMode mode) noexcept
{
    return mode == DeliveryMode::raw_serialized ? "raw_serialized" : "decoded_native";
}

std::string_view to_string(Ownership ownership) noexcept
{
    return ownership == Ownership::view ? "view" : "copy";
}

namespace {

constexpr std::size_t no_cluster = std::numeric_limits<std::size_t>::max();

struct Cursor {
    std::size_t basket = 0;
    EntryIndex begin = 0;
    EntryIndex end = 0; // empty range: no basket loaded
    std::shared_ptr<BasketSlot> slot;
    const std::uint8_t* bytes = nullptr;
};

} // namespace

struct Reader::Impl {
    std::shared_ptr<BasketSource> source;
    std::shared_ptr<BasketCache> cache = std::make_shared<BasketCache>();
    std::unique_ptr<Prefetcher> prefetcher;
    unsigned lookahead = 1;

    std::size_t current_cluster = no_cluster;
    std::vector<bool> active;
    std::vector<BranchId> active_list;
    std::vector<Cursor> cursors;
    std::shared_ptr<BasketSlot> pinned; // keeps read_basket_into's source bytes alive

    Impl(std::unique_ptr<ByteSource> bytes, const ReaderOptions& options)
    {
        auto tables = decode_file(*bytes);
        source = std::make_shared<BasketSource>(std::move(bytes), std::move(tables));
        const auto n = source->tables().branches.size();
        active.assign(n, false);
        cursors.resize(n);
        lookahead = options.prefetch_config.lookahead_clusters;
        if (options.prefetch) {
            prefetcher = std::make_unique<Prefetcher>(source, cache, options.prefetch_config);
        }
    }

    ~Impl()
    {
        if (prefetcher) {
            prefetcher->shutdown();
        }
    }

    const BranchDescriptor& branch(BranchId id) const
    {
        const auto& branches = source->tables().branches;
        if (id >= branches.size()) {
            throw Error(ErrorCode::out_of_range, "no branch with id " + std::to_string(id));
        }
        return branches[id];
    }

    std::size_t last_window_cluster(std::size_t cluster) const
    {
        const auto count = source->tables().clusters.cluster_count();
        return std::min(cluster + lookahead, count == 0 ? 0 : count - 1);
    }

    void activate(BranchId id)
    {
        branch(id);
        if (active[id]) {
            return;
        }
        active[id] = true;
        active_list.push_back(id);
        if (prefetcher && current_cluster != no_cluster) {
            const BranchId single[] = {id};
            for (auto c = current_cluster; c <= last_window_cluster(current_cluster); ++c) {
                prefetcher->schedule_cluster(c, single);
            }
        }
    }

    void enter_cluster(std::size_t cluster)
    {
        if (cluster == current_cluster) {
            return;
        }
        current_cluster = cluster;
        const auto last = last_window_cluster(cluster);
        const auto evicted = cache->evict_outside(cluster, last);
        source->counters().baskets_evicted.fetch_add(evicted, std::memory_order_relaxed);
        if (prefetcher) {
            for (auto c = cluster; c <= last; ++c) {
                prefetcher->schedule_cluster(c, active_list);
            }
        }
    }

    std::shared_ptr<BasketSlot> acquire(std::size_t basket)
    {
        enter_cluster(source->cluster_of_basket(basket));
        return prefetcher ? prefetcher->wait_basket(basket) : acquire_basket(*source, *cache, basket);
    }

    std::size_t basket_of(BranchId id, std::size_t index) const
    {
        const auto list = source->branch_baskets(id);
        if (index >= list.size()) {
            throw Error(ErrorCode::out_of_range, "branch '" + branch(id).name + "' has " + std::to_string(list.size())
                                                     + " baskets, requested index " + std::to_string(index));
        }
        return list[index];
    }

    const BranchDescriptor& bulk_branch(BranchId id) const
    {
        const auto& b = branch(id);
        if (b.shape.kind == ShapeKind::var_array) {
            throw Error(ErrorCode::unsupported_shape, "bulk access does not support var_array branch '" + b.name + "'");
        }
        return b;
    }
};

Reader::Reader(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Reader::Reader(Reader&&) noexcept = default;
Reader& Reader::operator=(Reader&&) noexcept = default;
Reader::~Reader() = default;

Reader Reader::open(const std::filesystem::path& path, ReaderOptions options)
{
    return open(std::make_unique<FileSource>(path), std::move(options));
}

Reader Reader::open(std::unique_ptr<ByteSource> bytes, ReaderOptions options)
{
    return Reader(std::make_unique<Impl>(std::move(bytes), options));
}

const FileTables& Reader::tables() const noexcept { return impl_->source->tables(); }
const std::vector<BranchDescriptor>& Reader::branches() const noexcept { return tables().branches; }
std::uint64_t Reader::total_entries() const noexcept { return tables().total_entries; }

BranchId Reader::branch_id(std::string_view name) const
{
    for (const auto& b : branches()) {
        if (b.name == name) {
            return b.branch_id;
        }
    }
    throw Error(ErrorCode::out_of_range, "no branch named '" + std::string(name) + "'");
}

std::size_t Reader::basket_count(BranchId branch) const { return impl_->source->branch_baskets(branch).size(); }

const BasketMeta& Reader::basket(BranchId branch, std::size_t index) const
{
    return impl_->source->meta(impl_->basket_of(branch, index));
}

EntryProxy Reader::get_entry(std::span<const BranchId> branches, EntryIndex entry)
{
    auto& s = *impl_;
    if (entry >= total_entries()) {
        throw Error(ErrorCode::out_of_range, "entry " + std::to_string(entry) + " out of range [0, "
                                                 + std::to_string(total_entries()) + ")");
    }
    for (const auto id : branches) {
        s.activate(id);
    }

    EntryProxy proxy;
    proxy.entry_ = entry;
    proxy.fields_.reserve(branches.size());
    for (const auto id : branches) {
        const auto& b = s.branch(id);
        auto& cur = s.cursors[id];
        if (entry < cur.begin || entry >= cur.end) {
            const auto basket = s.source->locate(id, entry);
            const auto& meta = s.source->meta(basket);
            cur.slot = s.acquire(basket);
            cur.basket = basket;
            cur.begin = meta.first_entry;
            cur.end = meta.end_entry();
            cur.bytes = cur.slot->wait().data();
        }

        const auto width = element_width(b.element);
        const auto local = entry - cur.begin;
        std::span<const std::uint8_t> bytes;
        if (b.shape.kind == ShapeKind::var_array) {
            const auto count = cur.end - cur.begin;
            const auto lo = load_be<std::uint32_t>(cur.bytes + local * 4);
            const auto hi = load_be<std::uint32_t>(cur.bytes + (local + 1) * 4);
            const auto* elements = cur.bytes + (count + 1) * 4;
            bytes = std::span(elements + std::size_t{lo} * width, std::size_t{hi - lo} * width);
        } else {
            const std::size_t per_entry = std::size_t{b.shape.values_per_entry()} * width;
            bytes = std::span(cur.bytes + local * per_entry, per_entry);
        }
        proxy.fields_.push_back({id, decode_elements(bytes, b.element)});
    }
    s.source->counters().proxy_constructions.fetch_add(1, std::memory_order_relaxed);
    return proxy;
}

BulkSlice Reader::read_basket_bulk(BranchId branch, std::size_t index, DeliveryMode mode, Ownership ownership)
{
    auto& s = *impl_;
    const auto& b = s.bulk_branch(branch);
    const auto basket = s.basket_of(branch, index);
    s.activate(branch);
    auto slot = s.acquire(basket);
    const auto& meta = s.source->meta(basket);

    BulkSlice slice;
    slice.branch_id_ = branch;
    slice.first_entry_ = meta.first_entry;
    slice.entry_count_ = meta.entry_count;
    slice.mode_ = mode;
    slice.ownership_ = ownership;
    slice.element_ = b.element;
    slice.values_per_entry_ = b.shape.values_per_entry();

    if (mode == DeliveryMode::raw_serialized) {
        if (ownership == Ownership::view) {
            slice.raw_ = slot->wait();
            slice.guard_ = ViewGuard(slot, slot->stamp());
        } else {
            slice.owned_raw_ = std::make_shared<const std::vector<std::uint8_t>>(slot->wait());
            slice.raw_ = *slice.owned_raw_;
        }
    } else {
        const auto& decoded = slot->decoded(b.element, s.source->counters());
        if (ownership == Ownership::view) {
            slice.decoded_ = &decoded;
            slice.guard_ = ViewGuard(slot, slot->stamp());
        } else {
            slice.owned_decoded_ = std::make_shared<const NativeArray>(decoded);
            slice.decoded_ = slice.owned_decoded_.get();
        }
    }
    return slice;
}

std::span<const std::uint8_t> Reader::bulk_raw_for_copy(BranchId branch, std::size_t index, ElementKind expected)
{
    auto& s = *impl_;
    const auto& b = s.bulk_branch(branch);
    if (b.element != expected) {
        throw Error(ErrorCode::type_mismatch, "branch '" + b.name + "' holds " + std::string(to_string(b.element))
                                                  + " elements");
    }
    const auto basket = s.basket_of(branch, index);
    s.activate(branch);
    s.pinned = s.acquire(basket);
    return s.pinned->wait();
}

void Reader::note_decode_pass() noexcept
{
    impl_->source->counters().decode_passes.fetch_add(1, std::memory_order_relaxed);
}

std::size_t Reader::read_basket_into(BranchId branch, std::size_t index, std::span<std::uint8_t> dest)
{
    auto& s = *impl_;
    const auto raw = bulk_raw_for_copy(branch, index, s.bulk_branch(branch).element);
    if (dest.size() < raw.size()) {
        throw Error(ErrorCode::size_mismatch, "destination holds " + std::to_string(dest.size())
                                                  + " bytes, basket has " + std::to_string(raw.size()));
    }
    std::memcpy(dest.data(), raw.data(), raw.size());
    return raw.size();
}

std::vector<ColumnArray> Reader::read_range_aligned(std::span<const BranchId> branches, EntryIndex begin,
                                                    EntryIndex end, bool force_copy)
{
    auto& s = *impl_;
    if (begin > end || end > total_entries()) {
        throw Error(ErrorCode::out_of_range, "range [" + std::to_string(begin) + ", " + std::to_string(end)
                                                 + ") is not within [0, " + std::to_string(total_entries()) + ")");
    }
    for (const auto id : branches) {
        s.bulk_branch(id);
        s.activate(id);
    }

    std::vector<ColumnArray> out;
    out.reserve(branches.size());
    for (const auto id : branches) {
        const auto& b = s.branch(id);
        const std::size_t per_entry = b.shape.values_per_entry();

        ColumnArray col;
        col.branch_id_ = id;
        col.begin_ = begin;
        col.entry_count_ = end - begin;
        col.element_ = b.element;
        col.values_per_entry_ = b.shape.values_per_entry();
        col.length_ = (end - begin) * per_entry;

        if (begin == end) {
            col.ownership_ = Ownership::copy;
            col.owned_ = std::make_shared<const NativeArray>(make_native_array(b.element));
            col.array_ = col.owned_.get();
            out.push_back(std::move(col));
            continue;
        }

        const auto list = s.source->branch_baskets(id);
        const auto first_pos = s.source->locate_position(id, begin);
        const auto first = list[first_pos];
        const auto& first_meta = s.source->meta(first);
        if (!force_copy && end <= first_meta.end_entry()) {
            auto slot = s.acquire(first);
            col.ownership_ = Ownership::view;
            col.array_ = &slot->decoded(b.element, s.source->counters());
            col.offset_ = (begin - first_meta.first_entry) * per_entry;
            col.guard_ = ViewGuard(slot, slot->stamp());
            out.push_back(std::move(col));
            continue;
        }

        auto stitched = make_native_array(b.element, col.length_);
        auto pos = list.begin() + static_cast<std::ptrdiff_t>(first_pos);
        std::size_t written = 0;
        for (; pos != list.end() && s.source->meta(*pos).first_entry < end; ++pos) {
            const auto& meta = s.source->meta(*pos);
            auto slot = s.acquire(*pos);
            const auto& decoded = slot->decoded(b.element, s.source->counters());
            const auto lo = std::max(begin, meta.first_entry);
            const auto hi = std::min(end, meta.end_entry());
            std::visit(
                [&](auto& dst) {
                    using T = typename std::decay_t<decltype(dst)>::value_type;
                    const auto src = native_span<T>(decoded);
                    std::copy_n(src.begin() + (lo - meta.first_entry) * per_entry, (hi - lo) * per_entry,
                                dst.begin() + written);
                },
                stitched);
            written += (hi - lo) * per_entry;
        }
        col.ownership_ = Ownership::copy;
        col.owned_ = std::make_shared<const NativeArray>(std::move(stitched));
        col.array_ = col.owned_.get();
        out.push_back(std::move(col));
    }
    return out;
}

ReaderStats Reader::stats() const noexcept { return impl_->source->stats(); }
void Reader::reset_stats() noexcept { impl_->source->reset_stats(); }
std::size_t Reader::cached_baskets() const { return impl_->cache->size(); }

void Reader::evict_all()
{
    auto& s = *impl_;
    s.cache->clear();
    s.current_cluster = no_cluster;
    s.pinned.reset();
    for (auto& cur : s.cursors) {
        cur = Cursor{};
    }
}

Prefetcher* Reader::prefetcher() noexcept { return impl_->prefetcher.get(); }

} // namespace bkio
