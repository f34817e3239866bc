#include <bkio/writer.hpp>

#include <cstring>
#include <set>
#include <string>

#include <bkio/deserialize.hpp>
#include <bkio/endian.hpp>
#include <bkio/error.hpp>
#include <bkio/format.hpp>

namespace bkio {

void WriterConfig::validate() const
{
    auto fail = [](const std::string& message) { throw Error(ErrorCode::invalid_config, message); };
    spec.validate();
    if (cluster_every < 1) {
        fail("cluster_every must be at least 1");
    }
    std::set<std::string_view> names;
    for (std::size_t i = 0; i < branches.size(); ++i) {
        const auto& b = branches[i];
        if (b.branch_id != i) {
            fail("branch '" + b.name + "' has id " + std::to_string(b.branch_id) + ", expected " + std::to_string(i));
        }
        if (b.name.empty() || b.name.size() > 0xFFFF) {
            fail("branch " + std::to_string(i) + " needs a name of 1..65535 bytes");
        }
        if (!names.insert(b.name).second) {
            fail("duplicate branch name '" + b.name + "'");
        }
        if (b.shape.kind == ShapeKind::fixed_array && b.shape.fixed_len < 1) {
            fail("branch '" + b.name + "' fixed_array length must be at least 1");
        }
        if (b.shape.kind != ShapeKind::fixed_array && b.shape.fixed_len != 0) {
            fail("branch '" + b.name + "' has a length but is not a fixed_array");
        }
        if (b.basket_target_bytes < element_width(b.element)) {
            fail("branch '" + b.name + "' basket_target_bytes is smaller than one element");
        }
    }
}

namespace {

struct BranchBuffer {
    std::vector<std::uint8_t> elements; // big-endian, ready for the payload
    std::vector<std::uint32_t> offsets; // var_array only: element count prefix sums, leading 0
    std::uint32_t entries = 0;
    EntryIndex first_entry = 0;

    [[nodiscard]] std::size_t payload_size(bool var) const noexcept
    {
        return elements.size() + (var ? (std::size_t{entries} + 1) * 4 : 0);
    }
};

} // namespace

struct Writer::State {
    WriterConfig config;
    FileSink sink;
    std::vector<BranchBuffer> buffers;
    std::vector<BasketMeta> baskets;
    ClusterIndex clusters;
    EntryIndex next_entry = 0;
    FileSummary summary;
    bool closed = false;

    State(WriterConfig cfg, FileSink out) : config(std::move(cfg)), sink(std::move(out)), buffers(config.branches.size())
    {
        for (auto& buf : buffers) {
            buf.offsets.push_back(0);
        }
    }

    void flush_branch(BranchId id)
    {
        auto& buf = buffers[id];
        if (buf.entries == 0) {
            return;
        }
        const auto& branch = config.branches[id];
        const bool var = branch.shape.kind == ShapeKind::var_array;

        std::vector<std::uint8_t> payload;
        if (var) {
            payload.resize(buf.offsets.size() * 4 + buf.elements.size());
            for (std::size_t i = 0; i < buf.offsets.size(); ++i) {
                store_be<std::uint32_t>(payload.data() + i * 4, buf.offsets[i]);
            }
            std::memcpy(payload.data() + buf.offsets.size() * 4, buf.elements.data(), buf.elements.size());
        } else {
            payload.swap(buf.elements);
        }

        auto compressed = compress(payload, config.spec);
        BasketMeta meta;
        meta.branch_id = id;
        meta.first_entry = buf.first_entry;
        meta.entry_count = buf.entries;
        meta.file_offset = sink.position();
        meta.compressed_size = static_cast<std::uint32_t>(compressed.bytes.size());
        meta.uncompressed_size = static_cast<std::uint32_t>(payload.size());
        meta.spec = compressed.stored_as;

        sink.write(encode_basket_record(meta, compressed.bytes));
        baskets.push_back(meta);
        summary.compression += compressed.stats;
        summary.uncompressed_payload_bytes += payload.size();

        buf.elements.clear();
        buf.offsets.assign(1, 0);
        buf.entries = 0;
        buf.first_entry = next_entry;
    }

    void check_value(const BranchDescriptor& branch, const EntryValue& value) const
    {
        auto fail = [&](const std::string& why) {
            throw Error(ErrorCode::type_mismatch, "branch '" + branch.name + "': " + why);
        };
        if (value.kind() != branch.element) {
            fail("expected " + std::string(to_string(branch.element)) + " elements, got "
                 + std::string(to_string(value.kind())));
        }
        switch (branch.shape.kind) {
        case ShapeKind::scalar:
            if (value.count() != 1) {
                fail("expected a scalar, got " + std::to_string(value.count()) + " elements");
            }
            break;
        case ShapeKind::fixed_array:
            if (value.count() != branch.shape.fixed_len) {
                fail("expected " + std::to_string(branch.shape.fixed_len) + " elements, got "
                     + std::to_string(value.count()));
            }
            break;
        case ShapeKind::var_array:
            if (value.count() > 0xFFFFFFFFu / 2) {
                fail("variable array too long");
            }
            break;
        }
    }

    void append(BranchId id, const EntryValue& value)
    {
        const auto& branch = config.branches[id];
        const bool var = branch.shape.kind == ShapeKind::var_array;
        auto& buf = buffers[id];
        const std::size_t bytes = value.count() * element_width(branch.element);
        const std::size_t entry_cost = bytes + (var ? 4 : 0);

        if (buf.entries > 0 && buf.payload_size(var) + entry_cost > branch.basket_target_bytes) {
            flush_branch(id);
        }

        const auto at = buf.elements.size();
        buf.elements.resize(at + bytes);
        auto* dst = buf.elements.data() + at;
        switch (branch.element) {
        case ElementKind::f32:
            encode_into(std::span(static_cast<const float*>(value.data()), value.count()), dst);
            break;
        case ElementKind::f64:
            encode_into(std::span(static_cast<const double*>(value.data()), value.count()), dst);
            break;
        case ElementKind::i32:
            encode_into(std::span(static_cast<const std::int32_t*>(value.data()), value.count()), dst);
            break;
        case ElementKind::i64:
            encode_into(std::span(static_cast<const std::int64_t*>(value.data()), value.count()), dst);
            break;
        case ElementKind::u8:
            std::memcpy(dst, value.data(), bytes);
            break;
        }
        if (var) {
            buf.offsets.push_back(buf.offsets.back() + static_cast<std::uint32_t>(value.count()));
        }
        ++buf.entries;
    }

    void flush_cluster()
    {
        for (BranchId id = 0; id < buffers.size(); ++id) {
            flush_branch(id);
        }
        const EntryIndex last = clusters.boundaries.empty() ? 0 : clusters.boundaries.back();
        if (next_entry > last) {
            clusters.boundaries.push_back(next_entry);
        }
    }
};

Writer::Writer(std::unique_ptr<State> state) : state_(std::move(state)) {}
Writer::Writer(Writer&&) noexcept = default;
Writer& Writer::operator=(Writer&&) noexcept = default;

Writer::~Writer()
{
    if (state_ && !state_->closed) {
        try {
            close();
        } catch (...) {
        }
    }
}

Writer Writer::open(const std::filesystem::path& path, WriterConfig config)
{
    config.validate();
    FileSink sink(path);
    sink.write(encode_file_header(format_version));
    return Writer(std::make_unique<State>(std::move(config), std::move(sink)));
}

void Writer::fill_entry(std::span<const EntryValue> values)
{
    auto& s = *state_;
    if (s.closed) {
        throw Error(ErrorCode::writer_closed, "fill_entry on a closed writer");
    }
    if (values.size() != s.config.branches.size()) {
        throw Error(ErrorCode::type_mismatch, "expected " + std::to_string(s.config.branches.size())
                                                  + " values, got " + std::to_string(values.size()));
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        s.check_value(s.config.branches[i], values[i]);
    }

    for (BranchId id = 0; id < values.size(); ++id) {
        s.append(id, values[id]);
    }
    ++s.next_entry;

    for (BranchId id = 0; id < values.size(); ++id) {
        const auto& branch = s.config.branches[id];
        if (s.buffers[id].payload_size(branch.shape.kind == ShapeKind::var_array) >= branch.basket_target_bytes) {
            s.flush_branch(id);
        }
    }
    if (s.next_entry % s.config.cluster_every == 0) {
        s.flush_cluster();
    }
}

void Writer::flush_cluster()
{
    if (state_->closed) {
        throw Error(ErrorCode::writer_closed, "flush_cluster on a closed writer");
    }
    state_->flush_cluster();
}

FileSummary Writer::close()
{
    auto& s = *state_;
    if (s.closed) {
        throw Error(ErrorCode::writer_closed, "writer already closed");
    }
    s.closed = true;
    s.flush_cluster();

    FileTables tables;
    tables.branches = s.config.branches;
    tables.baskets = s.baskets;
    tables.clusters = s.clusters;
    tables.total_entries = s.next_entry;
    s.sink.write(encode_footer(tables, s.sink.position()));
    s.sink.close();

    s.summary.total_entries = s.next_entry;
    s.summary.basket_count = s.baskets.size();
    s.summary.bytes_written = s.sink.position();
    return s.summary;
}

std::uint64_t Writer::entries() const noexcept { return state_->next_entry; }
bool Writer::is_open() const noexcept { return state_ && !state_->closed; }
const std::vector<BasketMeta>& Writer::baskets() const noexcept { return state_->baskets; }
const ClusterIndex& Writer::clusters() const noexcept { return state_->clusters; }
const WriterConfig& Writer::config() const noexcept { return state_->config; }

std::uint32_t Writer::buffered_entries(BranchId branch) const
{
    if (branch >= state_->buffers.size()) {
        throw Error(ErrorCode::out_of_range, "no branch " + std::to_string(branch));
    }
    return state_->buffers[branch].entries;
}

} // namespace bkio
