#include <bkio/bench/runner.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <numeric>
#include <string>
#include <vector>

#include <bkio/error.hpp>
#include <bkio/reader.hpp>

namespace bkio::bench {

std::string_view to_string(Method method) noexcept
{
    switch (method) {
    case Method::per_entry: return "per_entry";
    case Method::bulk_raw: return "bulk_raw";
    case Method::bulk_decoded: return "bulk_decoded";
    case Method::range_copy: return "range_copy";
    }
    return "?";
}

std::string_view to_string(Quantity quantity) noexcept
{
    switch (quantity) {
    case Quantity::momentum: return "p";
    case Quantity::energy: return "E";
    case Quantity::sum: return "sum";
    }
    return "?";
}

Method parse_method(std::string_view text)
{
    std::string t(text);
    std::replace(t.begin(), t.end(), '-', '_');
    for (auto m : {Method::per_entry, Method::bulk_raw, Method::bulk_decoded, Method::range_copy}) {
        if (t == to_string(m)) {
            return m;
        }
    }
    throw Error(ErrorCode::invalid_config, "unknown method '" + std::string(text) + "'");
}

Quantity parse_quantity(std::string_view text)
{
    for (auto q : {Quantity::momentum, Quantity::energy, Quantity::sum}) {
        if (text == to_string(q)) {
            return q;
        }
    }
    throw Error(ErrorCode::invalid_config, "unknown quantity '" + std::string(text) + "' (p, E or sum)");
}

double process_cpu_ms()
{
    timespec ts{};
    clock_gettime(CLOCK_PROCESS_CPUTIME_ID, &ts);
    return static_cast<double>(ts.tv_sec) * 1e3 + static_cast<double>(ts.tv_nsec) * 1e-6;
}

namespace {

template <typename Fn>
decltype(auto) dispatch(ElementKind kind, Fn&& fn)
{
    switch (kind) {
    case ElementKind::f32: return fn(float{});
    case ElementKind::f64: return fn(double{});
    case ElementKind::i32: return fn(std::int32_t{});
    case ElementKind::i64: return fn(std::int64_t{});
    case ElementKind::u8: return fn(std::uint8_t{});
    }
    throw Error(ErrorCode::type_mismatch, "unknown element kind");
}

double event_value(Quantity q, double px, double py, double pz, double m)
{
    const double p2 = px * px + py * py + pz * pz;
    return q == Quantity::energy ? std::sqrt(p2 + m * m) : std::sqrt(p2);
}

std::string file_codec(const FileTables& tables)
{
    for (const auto& b : tables.baskets) {
        if (b.spec.codec != Codec::none) {
            return b.spec.label();
        }
    }
    return CompressionSpec{}.label();
}

/// Branch ids the quantity reads, in the order the reduction consumes them.
std::vector<BranchId> quantity_branches(const Reader& reader, Quantity q)
{
    std::vector<BranchId> ids;
    if (q == Quantity::sum) {
        for (const auto& b : reader.branches()) {
            ids.push_back(b.branch_id);
        }
        return ids;
    }
    for (const char* name : {"px", "py", "pz"}) {
        ids.push_back(reader.branch_id(name));
    }
    if (q == Quantity::energy) {
        ids.push_back(reader.branch_id("mass"));
    }
    for (const auto id : ids) {
        const auto& b = reader.branches()[id];
        if (b.element != ElementKind::f32 || b.shape.kind != ShapeKind::scalar) {
            throw Error(ErrorCode::type_mismatch, "branch '" + b.name + "' must be a float32 scalar");
        }
    }
    return ids;
}

double finish(const std::vector<double>& partial)
{
    return std::accumulate(partial.begin(), partial.end(), 0.0);
}

// ---- per entry ------------------------------------------------------------

double pass_per_entry(Reader& reader, Quantity q, const std::vector<BranchId>& ids)
{
    const auto n = reader.total_entries();
    if (q != Quantity::sum) {
        double total = 0;
        for (EntryIndex e = 0; e < n; ++e) {
            const auto proxy = reader.get_entry(ids, e);
            total += event_value(q, proxy.scalar<float>(0), proxy.scalar<float>(1), proxy.scalar<float>(2),
                                 q == Quantity::energy ? proxy.scalar<float>(3) : 0.0F);
        }
        return total;
    }
    std::vector<double> partial(ids.size(), 0.0);
    for (EntryIndex e = 0; e < n; ++e) {
        const auto proxy = reader.get_entry(ids, e);
        for (std::size_t f = 0; f < proxy.size(); ++f) {
            std::visit(
                [&](const auto& values) {
                    for (const auto v : values) {
                        partial[f] += static_cast<double>(v);
                    }
                },
                proxy.field(f).values);
        }
    }
    return finish(partial);
}

// ---- bulk -----------------------------------------------------------------

/// Current basket of one branch while walking entries in step across branches.
struct Cursor {
    BranchId branch = 0;
    std::size_t next = 0;
    BulkSlice slice;
    EntryIndex begin = 0;
    EntryIndex end = 0;
};

template <typename Access>
double pass_bulk_events(Reader& reader, Quantity q, const std::vector<BranchId>& ids, DeliveryMode mode,
                        Access access)
{
    std::vector<Cursor> cursors(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        cursors[i].branch = ids[i];
    }
    const auto n = reader.total_entries();
    double total = 0;
    EntryIndex e = 0;
    while (e < n) {
        EntryIndex chunk_end = n;
        for (auto& c : cursors) {
            if (e >= c.end) {
                c.slice = reader.read_basket_bulk(c.branch, c.next++, mode);
                c.begin = c.slice.first_entry();
                c.end = c.begin + c.slice.entry_count();
            }
            chunk_end = std::min(chunk_end, c.end);
        }
        const auto px = access(cursors[0].slice);
        const auto py = access(cursors[1].slice);
        const auto pz = access(cursors[2].slice);
        if (q == Quantity::energy) {
            const auto m = access(cursors[3].slice);
            for (EntryIndex k = e; k < chunk_end; ++k) {
                total += event_value(q, px[k - cursors[0].begin], py[k - cursors[1].begin], pz[k - cursors[2].begin],
                                     m[k - cursors[3].begin]);
            }
        } else {
            for (EntryIndex k = e; k < chunk_end; ++k) {
                total += event_value(q, px[k - cursors[0].begin], py[k - cursors[1].begin], pz[k - cursors[2].begin],
                                     0.0);
            }
        }
        e = chunk_end;
    }
    return total;
}

double pass_bulk_sum(Reader& reader, const std::vector<BranchId>& ids, DeliveryMode mode)
{
    std::vector<double> partial(ids.size(), 0.0);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const auto id = ids[i];
        dispatch(reader.branches()[id].element, [&](auto tag) {
            using T = decltype(tag);
            for (std::size_t k = 0; k < reader.basket_count(id); ++k) {
                const auto slice = reader.read_basket_bulk(id, k, mode);
                if (mode == DeliveryMode::raw_serialized) {
                    const auto view = slice.raw_as<T>();
                    for (std::size_t j = 0; j < view.size(); ++j) {
                        partial[i] += static_cast<double>(view[j]);
                    }
                } else {
                    for (const auto v : slice.values<T>()) {
                        partial[i] += static_cast<double>(v);
                    }
                }
            }
        });
    }
    return finish(partial);
}

// ---- range ----------------------------------------------------------------

double pass_range(Reader& reader, Quantity q, const std::vector<BranchId>& ids)
{
    std::vector<double> partial(ids.size(), 0.0);
    double total = 0;
    const auto lead = ids.front();
    for (std::size_t k = 0; k < reader.basket_count(lead); ++k) {
        const auto& meta = reader.basket(lead, k);
        const auto columns = reader.read_range_aligned(ids, meta.first_entry, meta.end_entry());
        if (q == Quantity::sum) {
            for (std::size_t i = 0; i < columns.size(); ++i) {
                dispatch(columns[i].element(), [&](auto tag) {
                    using T = decltype(tag);
                    for (const auto v : columns[i].values<T>()) {
                        partial[i] += static_cast<double>(v);
                    }
                });
            }
            continue;
        }
        const auto px = columns[0].values<float>();
        const auto py = columns[1].values<float>();
        const auto pz = columns[2].values<float>();
        if (q == Quantity::energy) {
            const auto m = columns[3].values<float>();
            for (std::size_t j = 0; j < px.size(); ++j) {
                total += event_value(q, px[j], py[j], pz[j], m[j]);
            }
        } else {
            for (std::size_t j = 0; j < px.size(); ++j) {
                total += event_value(q, px[j], py[j], pz[j], 0.0);
            }
        }
    }
    return q == Quantity::sum ? finish(partial) : total;
}

double one_pass(Reader& reader, const BenchOptions& options, const std::vector<BranchId>& ids)
{
    const auto q = options.quantity;
    switch (options.method) {
    case Method::per_entry: return pass_per_entry(reader, q, ids);
    case Method::bulk_raw:
        if (q == Quantity::sum) {
            return pass_bulk_sum(reader, ids, DeliveryMode::raw_serialized);
        }
        return pass_bulk_events(reader, q, ids, DeliveryMode::raw_serialized,
                                [](const BulkSlice& s) { return s.raw_as<float>(); });
    case Method::bulk_decoded:
        if (q == Quantity::sum) {
            return pass_bulk_sum(reader, ids, DeliveryMode::decoded_native);
        }
        return pass_bulk_events(reader, q, ids, DeliveryMode::decoded_native,
                                [](const BulkSlice& s) { return s.values<float>(); });
    case Method::range_copy: return pass_range(reader, q, ids);
    }
    throw Error(ErrorCode::invalid_config, "unknown method");
}

struct Sample {
    double wall_ms;
    double cpu_ms;
    double checksum;
    ReaderStats stats;
};

} // namespace

BenchResult run_benchmark(const std::filesystem::path& path, const BenchOptions& options)
{
    if (options.repetitions < 1) {
        throw Error(ErrorCode::invalid_config, "repetitions must be at least 1");
    }
    ReaderOptions ropts;
    ropts.prefetch = options.prefetch;
    ropts.prefetch_config.workers = options.threads;

    BenchResult result;
    result.method = std::string(to_string(options.method));
    std::vector<Sample> samples;
    for (int rep = 0; rep < options.repetitions; ++rep) {
        auto reader = Reader::open(path, ropts);
        if (rep == 0) {
            result.codec = file_codec(reader.tables());
            result.events = reader.total_entries();
        }
        const auto ids = quantity_branches(reader, options.quantity);
        reader.reset_stats();
        const double cpu0 = process_cpu_ms();
        const auto t0 = std::chrono::steady_clock::now();
        const double checksum = one_pass(reader, options, ids);
        const auto t1 = std::chrono::steady_clock::now();
        const double cpu1 = process_cpu_ms();
        samples.push_back({std::chrono::duration<double, std::milli>(t1 - t0).count(), cpu1 - cpu0, checksum,
                           reader.stats()});
    }

    auto median = [&](auto key) {
        std::vector<double> v;
        for (const auto& s : samples) {
            v.push_back(key(s));
        }
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
        return v[v.size() / 2];
    };
    result.wall_ms = median([](const Sample& s) { return s.wall_ms; });
    result.cpu_ms = median([](const Sample& s) { return s.cpu_ms; });
    result.unzip_ms = median([](const Sample& s) { return std::chrono::duration<double, std::milli>(s.stats.unzip_time).count(); });
    result.events_per_sec = result.wall_ms > 0 ? static_cast<double>(result.events) * 1e3 / result.wall_ms : 0.0;

    const auto at_median = std::min_element(samples.begin(), samples.end(), [&](const Sample& a, const Sample& b) {
        return std::abs(a.wall_ms - result.wall_ms) < std::abs(b.wall_ms - result.wall_ms);
    });
    result.stats = at_median->stats;
    result.bytes = at_median->stats.bytes_read;
    result.checksum = at_median->checksum;
    return result;
}

} // namespace bkio::bench
