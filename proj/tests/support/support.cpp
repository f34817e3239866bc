#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <sstream>
#include <unistd.h>

namespace bkio::testing {

namespace fs = std::filesystem;

TempDir::TempDir()
{
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path()
            / ("bkio_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter.fetch_add(1)));
    fs::remove_all(path_);
    fs::create_directories(path_);
}

TempDir::~TempDir()
{
    std::error_code ec;
    fs::remove_all(path_, ec);
}

NativeArray random_values(ElementKind kind, std::size_t n, std::mt19937_64& rng)
{
    // Half the time draw from a narrow range so the codecs find something to compress.
    const bool narrow = std::uniform_int_distribution<int>(0, 1)(rng) == 0;
    auto out = make_native_array(kind);
    std::visit(
        [&](auto& values) {
            using T = typename std::decay_t<decltype(values)>::value_type;
            values.resize(n);
            for (auto& v : values) {
                if constexpr (std::is_floating_point_v<T>) {
                    const double scale = narrow ? 4.0 : 1e6;
                    v = static_cast<T>(std::round(std::normal_distribution<double>(0.0, scale)(rng) * 16) / 16);
                } else {
                    using Wide = std::conditional_t<std::is_signed_v<T>, std::int64_t, std::uint64_t>;
                    const Wide lo = narrow ? 0 : static_cast<Wide>(std::numeric_limits<T>::min());
                    const Wide hi = narrow ? 9 : static_cast<Wide>(std::numeric_limits<T>::max());
                    v = static_cast<T>(std::uniform_int_distribution<Wide>(lo, hi)(rng));
                }
            }
        },
        out);
    return out;
}

WriterConfig random_config(std::mt19937_64& rng)
{
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    static const CompressionSpec specs[] = {
        {Codec::none, 0},  {Codec::deflate, 1}, {Codec::deflate, 6}, {Codec::deflate, 9},
        {Codec::lz4, 1},   {Codec::lz4hc, 1},   {Codec::lz4hc, 9},   {Codec::lz4hc, 12},
    };
    WriterConfig config;
    config.spec = specs[pick(0, static_cast<int>(std::size(specs)) - 1)];
    config.cluster_every = static_cast<std::uint64_t>(pick(1, 300));
    const int n = pick(1, 5);
    for (int i = 0; i < n; ++i) {
        BranchDescriptor b;
        b.branch_id = static_cast<BranchId>(i);
        b.name = "b" + std::to_string(i);
        b.element = static_cast<ElementKind>(pick(0, 4));
        switch (pick(0, 2)) {
        case 0: b.shape = BranchShape::scalar(); break;
        case 1: b.shape = BranchShape::fixed_array(static_cast<std::uint32_t>(pick(1, 8))); break;
        default: b.shape = BranchShape::var_array(); break;
        }
        b.basket_target_bytes = static_cast<std::uint32_t>(
            std::max<int>(pick(1, 2000), static_cast<int>(element_width(b.element))));
        config.branches.push_back(std::move(b));
    }
    return config;
}

FillLog write_random_file(const fs::path& path, const WriterConfig& config, std::uint64_t entries,
                          std::mt19937_64& rng)
{
    FillLog log;
    log.config = config;
    auto writer = Writer::open(path, config);
    std::vector<EntryValue> values;
    for (std::uint64_t e = 0; e < entries; ++e) {
        std::vector<NativeArray> row;
        for (const auto& b : config.branches) {
            std::size_t n = 1;
            if (b.shape.kind == ShapeKind::fixed_array) {
                n = b.shape.fixed_len;
            } else if (b.shape.kind == ShapeKind::var_array) {
                n = static_cast<std::size_t>(std::uniform_int_distribution<int>(0, 6)(rng));
            }
            row.push_back(random_values(b.element, n, rng));
        }
        values.clear();
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::visit(
                [&](const auto& v) {
                    using T = typename std::decay_t<decltype(v)>::value_type;
                    if (config.branches[i].shape.kind == ShapeKind::scalar) {
                        values.emplace_back(v.front());
                    } else {
                        values.emplace_back(std::span<const T>(v));
                    }
                },
                row[i]);
        }
        writer.fill_entry(values);
        log.entries.push_back(std::move(row));
    }
    log.summary = writer.close();
    return log;
}

NativeArray logged_range(const FillLog& log, BranchId branch, EntryIndex begin, EntryIndex end)
{
    auto out = make_native_array(log.config.branches.at(branch).element);
    std::visit(
        [&](auto& dst) {
            using V = std::decay_t<decltype(dst)>;
            for (auto e = begin; e < end; ++e) {
                const auto& src = std::get<V>(log.entries[e][branch]);
                dst.insert(dst.end(), src.begin(), src.end());
            }
        },
        out);
    return out;
}

bool same_values(const NativeArray& a, const NativeArray& b)
{
    return a.index() == b.index() && encode_elements(a) == encode_elements(b);
}

namespace {

template <typename T>
NativeArray to_array(std::span<const T> s)
{
    return NativeArray(std::vector<T>(s.begin(), s.end()));
}

NativeArray column_values(const ColumnArray& c)
{
    return std::visit([&](const auto& tag) -> NativeArray {
        using T = typename std::decay_t<decltype(tag)>::value_type;
        return to_array(c.values<T>());
    }, make_native_array(c.element()));
}

NativeArray slice_values(const BulkSlice& s)
{
    return std::visit([&](const auto& tag) -> NativeArray {
        using T = typename std::decay_t<decltype(tag)>::value_type;
        return to_array(s.values<T>());
    }, make_native_array(s.element()));
}

} // namespace

std::string verify_three_paths(Reader& reader, const FillLog& log, std::mt19937_64& rng)
{
    std::ostringstream why;
    const auto n = log.entries.size();
    if (reader.total_entries() != n) {
        why << "total_entries " << reader.total_entries() << " != " << n;
        return why.str();
    }
    std::vector<BranchId> all;
    std::vector<BranchId> flat;
    for (const auto& b : log.config.branches) {
        all.push_back(b.branch_id);
        if (b.shape.kind != ShapeKind::var_array) {
            flat.push_back(b.branch_id);
        }
    }

    // Per entry.
    for (EntryIndex e = 0; e < n; ++e) {
        const auto proxy = reader.get_entry(all, e);
        for (std::size_t i = 0; i < all.size(); ++i) {
            if (!same_values(proxy.field(i).values, log.entries[e][i])) {
                why << "get_entry differs at entry " << e << " branch " << i;
                return why.str();
            }
        }
    }

    // Bulk, both delivery modes.
    for (const auto id : flat) {
        for (std::size_t k = 0; k < reader.basket_count(id); ++k) {
            const auto& m = reader.basket(id, k);
            const auto expected = logged_range(log, id, m.first_entry, m.end_entry());
            const auto decoded = reader.read_basket_bulk(id, k, DeliveryMode::decoded_native);
            if (!same_values(slice_values(decoded), expected)) {
                why << "decoded bulk differs in basket " << k << " of branch " << id;
                return why.str();
            }
            const auto raw = reader.read_basket_bulk(id, k, DeliveryMode::raw_serialized, Ownership::copy);
            const auto bytes = raw.raw();
            if (std::vector<std::uint8_t>(bytes.begin(), bytes.end()) != encode_elements(expected)) {
                why << "raw bulk differs in basket " << k << " of branch " << id;
                return why.str();
            }
        }
    }

    // Aligned ranges: the whole file, then random windows.
    if (!flat.empty()) {
        std::vector<std::pair<EntryIndex, EntryIndex>> ranges = {{0, n}};
        for (int i = 0; i < 8 && n > 0; ++i) {
            const auto a = std::uniform_int_distribution<EntryIndex>(0, n)(rng);
            const auto b = std::uniform_int_distribution<EntryIndex>(0, n)(rng);
            ranges.emplace_back(std::min(a, b), std::max(a, b));
        }
        for (const auto& [begin, end] : ranges) {
            const auto columns = reader.read_range_aligned(flat, begin, end);
            for (std::size_t i = 0; i < flat.size(); ++i) {
                if (!same_values(column_values(columns[i]), logged_range(log, flat[i], begin, end))) {
                    why << "range [" << begin << "," << end << ") differs for branch " << flat[i];
                    return why.str();
                }
            }
        }
    }
    return {};
}

} // namespace bkio::testing
