#include <bkio/format.hpp>

#include <algorithm>
#include <cstring>
#include <set>
#include <string>

#include <bkio/endian.hpp>
#include <bkio/error.hpp>

namespace bkio {

namespace {

class ByteWriter {
public:
    explicit ByteWriter(std::vector<std::uint8_t>& out) : out_(out) {}

    template <Trivial T>
    void put(T value)
    {
        const auto at = out_.size();
        out_.resize(at + sizeof(T));
        store_be<T>(out_.data() + at, value);
    }

    void put_bytes(std::span<const std::uint8_t> bytes) { out_.insert(out_.end(), bytes.begin(), bytes.end()); }

private:
    std::vector<std::uint8_t>& out_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    template <Trivial T>
    T get()
    {
        require(sizeof(T));
        const T value = load_be<T>(bytes_.data() + pos_);
        pos_ += sizeof(T);
        return value;
    }

    std::span<const std::uint8_t> get_bytes(std::size_t n)
    {
        require(n);
        const auto out = bytes_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    [[nodiscard]] std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

private:
    void require(std::size_t n) const
    {
        if (bytes_.size() - pos_ < n) {
            throw Error(ErrorCode::truncated, "need " + std::to_string(n) + " bytes, " + std::to_string(bytes_.size() - pos_)
                                                  + " left");
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

bool has_magic(std::span<const std::uint8_t> bytes, const std::array<std::uint8_t, 4>& magic)
{
    return bytes.size() >= magic.size() && std::equal(magic.begin(), magic.end(), bytes.begin());
}

[[noreturn]] void invalid(const std::string& message)
{
    throw Error(ErrorCode::invalid_index, message);
}

CompressionSpec read_spec(std::uint8_t codec, std::uint8_t level)
{
    if (codec > static_cast<std::uint8_t>(Codec::lz4hc)) {
        invalid("unknown codec id " + std::to_string(codec));
    }
    const CompressionSpec spec{static_cast<Codec>(codec), level};
    if (!spec.is_valid()) {
        invalid("invalid compression spec " + spec.label());
    }
    return spec;
}

/// Parses the footer tables starting at the footer magic. With `leftover`,
/// trailing bytes are reported instead of rejected.
FileTables parse_footer(std::span<const std::uint8_t> footer, std::uint64_t footer_offset,
                        std::size_t* leftover = nullptr)
{
    ByteReader r(footer);
    if (!has_magic(r.get_bytes(footer_magic.size()), footer_magic)) {
        throw Error(ErrorCode::bad_magic, "footer magic missing at offset " + std::to_string(footer_offset));
    }

    FileTables t;
    t.total_entries = r.get<std::uint64_t>();

    const auto n_branches = r.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < n_branches; ++i) {
        BranchDescriptor b;
        b.branch_id = r.get<std::uint32_t>();
        const auto element = r.get<std::uint8_t>();
        const auto shape = r.get<std::uint8_t>();
        if (!is_valid_element_kind(element) || shape > static_cast<std::uint8_t>(ShapeKind::var_array)) {
            invalid("unknown element or shape code in branch table");
        }
        b.element = static_cast<ElementKind>(element);
        b.shape.kind = static_cast<ShapeKind>(shape);
        b.shape.fixed_len = r.get<std::uint32_t>();
        b.basket_target_bytes = r.get<std::uint32_t>();
        const auto name_len = r.get<std::uint16_t>();
        const auto name = r.get_bytes(name_len);
        b.name.assign(reinterpret_cast<const char*>(name.data()), name.size());
        t.branches.push_back(std::move(b));
    }

    const auto n_clusters = r.get<std::uint32_t>();
    if (n_clusters > r.remaining() / 8) {
        throw Error(ErrorCode::truncated, "cluster table runs past the footer");
    }
    t.clusters.boundaries.reserve(n_clusters);
    for (std::uint32_t i = 0; i < n_clusters; ++i) {
        t.clusters.boundaries.push_back(r.get<std::uint64_t>());
    }

    const auto n_baskets = r.get<std::uint32_t>();
    constexpr std::size_t basket_entry_size = 34;
    if (n_baskets > r.remaining() / basket_entry_size) {
        throw Error(ErrorCode::truncated, "basket table runs past the footer");
    }
    t.baskets.reserve(n_baskets);
    for (std::uint32_t i = 0; i < n_baskets; ++i) {
        BasketMeta m;
        m.branch_id = r.get<std::uint32_t>();
        m.first_entry = r.get<std::uint64_t>();
        m.entry_count = r.get<std::uint32_t>();
        m.file_offset = r.get<std::uint64_t>();
        const auto codec = r.get<std::uint8_t>();
        const auto level = r.get<std::uint8_t>();
        m.spec = read_spec(codec, level);
        m.uncompressed_size = r.get<std::uint32_t>();
        m.compressed_size = r.get<std::uint32_t>();
        if (m.file_offset < file_header_size
            || m.file_offset + basket_record_header_size + m.compressed_size > footer_offset) {
            invalid("basket record at offset " + std::to_string(m.file_offset) + " lies outside the body");
        }
        t.baskets.push_back(m);
    }
    if (leftover) {
        *leftover = r.remaining();
    } else if (r.remaining() != 0) {
        invalid(std::to_string(r.remaining()) + " unexpected bytes after footer tables");
    }
    return t;

}

// Walks basket records from the header to tell a damaged trailer apart from
// a file that simply ends early.
ErrorCode diagnose_missing_trailer(const ByteSource& source)
{
    const auto size = source.size();
    std::uint64_t pos = file_header_size;
    std::array<std::uint8_t, basket_record_header_size> head{};
    while (true) {
        if (size - pos < footer_magic.size()) {
            return ErrorCode::truncated;
        }
        source.read_at(pos, std::span(head).first(footer_magic.size()));
        if (has_magic(head, footer_magic)) {
            // A footer that parses but is not followed by a whole trailer was cut short.
            const auto rest = source.read_vector(pos, size - pos);
            std::size_t leftover = 0;
            try {
                (void)parse_footer(rest, pos, &leftover);
            } catch (const Error& e) {
                return e.code() == ErrorCode::truncated ? ErrorCode::truncated : ErrorCode::bad_trailer;
            }
            return leftover < trailer_size ? ErrorCode::truncated : ErrorCode::bad_trailer;
        }
        if (size - pos < basket_record_header_size) {
            return ErrorCode::truncated;
        }
        source.read_at(pos, head);
        const auto compressed = load_be<std::uint32_t>(head.data() + 22);
        pos += basket_record_header_size;
        if (size - pos < compressed) {
            return ErrorCode::truncated;
        }
        pos += compressed;
    }
}

} // namespace

std::vector<std::uint8_t> encode_file_header(std::uint32_t version)
{
    if (version != format_version) {
        throw Error(ErrorCode::unsupported_version, "unsupported version " + std::to_string(version));
    }
    std::vector<std::uint8_t> out;
    out.reserve(file_header_size);
    ByteWriter w(out);
    w.put_bytes(file_magic);
    w.put<std::uint32_t>(version);
    w.put<std::uint32_t>(0);
    return out;
}

std::uint32_t decode_file_header(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() < file_header_size) {
        throw Error(ErrorCode::truncated, "file header needs 12 bytes");
    }
    if (!has_magic(bytes, file_magic)) {
        throw Error(ErrorCode::bad_magic, "file does not start with BKIO");
    }
    const auto version = load_be<std::uint32_t>(bytes.data() + 4);
    if (version != format_version) {
        throw Error(ErrorCode::unsupported_version, "unsupported version " + std::to_string(version));
    }
    return version;
}

std::vector<std::uint8_t> encode_basket_record(const BasketMeta& meta, std::span<const std::uint8_t> payload)
{
    if (payload.size() != meta.compressed_size) {
        throw Error(ErrorCode::size_mismatch, "payload has " + std::to_string(payload.size())
                                                  + " bytes but compressed_size is "
                                                  + std::to_string(meta.compressed_size));
    }
    std::vector<std::uint8_t> out;
    out.reserve(basket_record_header_size + payload.size());
    ByteWriter w(out);
    w.put<std::uint32_t>(meta.branch_id);
    w.put<std::uint64_t>(meta.first_entry);
    w.put<std::uint32_t>(meta.entry_count);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(meta.spec.codec));
    w.put<std::uint8_t>(meta.spec.level);
    w.put<std::uint32_t>(meta.uncompressed_size);
    w.put<std::uint32_t>(meta.compressed_size);
    w.put_bytes(payload);
    return out;
}

DecodedRecord decode_basket_record(std::span<const std::uint8_t> bytes)
{
    ByteReader r(bytes);
    DecodedRecord rec;
    rec.meta.branch_id = r.get<std::uint32_t>();
    rec.meta.first_entry = r.get<std::uint64_t>();
    rec.meta.entry_count = r.get<std::uint32_t>();
    const auto codec = r.get<std::uint8_t>();
    const auto level = r.get<std::uint8_t>();
    rec.meta.spec = read_spec(codec, level);
    rec.meta.uncompressed_size = r.get<std::uint32_t>();
    rec.meta.compressed_size = r.get<std::uint32_t>();
    rec.payload = r.get_bytes(rec.meta.compressed_size);
    return rec;
}

std::vector<std::uint8_t> encode_footer(const FileTables& tables, std::uint64_t footer_offset)
{
    validate_tables(tables);

    std::vector<std::uint8_t> out;
    ByteWriter w(out);
    w.put_bytes(footer_magic);
    w.put<std::uint64_t>(tables.total_entries);

    w.put<std::uint32_t>(static_cast<std::uint32_t>(tables.branches.size()));
    for (const auto& b : tables.branches) {
        w.put<std::uint32_t>(b.branch_id);
        w.put<std::uint8_t>(static_cast<std::uint8_t>(b.element));
        w.put<std::uint8_t>(static_cast<std::uint8_t>(b.shape.kind));
        w.put<std::uint32_t>(b.shape.fixed_len);
        w.put<std::uint32_t>(b.basket_target_bytes);
        w.put<std::uint16_t>(static_cast<std::uint16_t>(b.name.size()));
        w.put_bytes(std::span(reinterpret_cast<const std::uint8_t*>(b.name.data()), b.name.size()));
    }

    w.put<std::uint32_t>(static_cast<std::uint32_t>(tables.clusters.boundaries.size()));
    for (const auto boundary : tables.clusters.boundaries) {
        w.put<std::uint64_t>(boundary);
    }

    w.put<std::uint32_t>(static_cast<std::uint32_t>(tables.baskets.size()));
    for (const auto& m : tables.baskets) {
        w.put<std::uint32_t>(m.branch_id);
        w.put<std::uint64_t>(m.first_entry);
        w.put<std::uint32_t>(m.entry_count);
        w.put<std::uint64_t>(m.file_offset);
        w.put<std::uint8_t>(static_cast<std::uint8_t>(m.spec.codec));
        w.put<std::uint8_t>(m.spec.level);
        w.put<std::uint32_t>(m.uncompressed_size);
        w.put<std::uint32_t>(m.compressed_size);
    }

    w.put<std::uint64_t>(footer_offset);
    w.put_bytes(file_magic);
    return out;
}

void validate_tables(const FileTables& tables)
{
    std::set<std::string_view> names;
    for (std::size_t i = 0; i < tables.branches.size(); ++i) {
        const auto& b = tables.branches[i];
        if (b.branch_id != i) {
            invalid("branch ids must be dense from 0; branch '" + b.name + "' has id " + std::to_string(b.branch_id));
        }
        if (b.name.empty() || b.name.size() > 0xFFFF) {
            invalid("branch " + std::to_string(i) + " has an empty or oversized name");
        }
        if (!names.insert(b.name).second) {
            invalid("duplicate branch name '" + b.name + "'");
        }
        if (!is_valid_element_kind(static_cast<std::uint8_t>(b.element))) {
            invalid("branch '" + b.name + "' has an unknown element kind");
        }
        if (b.shape.kind == ShapeKind::fixed_array ? b.shape.fixed_len < 1 : b.shape.fixed_len != 0) {
            invalid("branch '" + b.name + "' has an invalid shape length");
        }
        if (b.shape.kind > ShapeKind::var_array) {
            invalid("branch '" + b.name + "' has an unknown shape");
        }
        if (b.basket_target_bytes < element_width(b.element)) {
            invalid("branch '" + b.name + "' basket_target_bytes is smaller than one element");
        }
    }

    const auto& bounds = tables.clusters.boundaries;
    for (std::size_t k = 0; k < bounds.size(); ++k) {
        if (bounds[k] == 0 || (k > 0 && bounds[k] <= bounds[k - 1])) {
            invalid("cluster boundaries must be positive and strictly increasing");
        }
    }
    if (!bounds.empty() && bounds.back() > tables.total_entries) {
        invalid("cluster boundary past total_entries");
    }
    if (tables.total_entries > 0 && (bounds.empty() || bounds.back() != tables.total_entries)) {
        invalid("last cluster boundary must equal total_entries");
    }

    // Per-branch contiguity, coverage and cluster alignment.
    std::vector<std::vector<const BasketMeta*>> per_branch(tables.branches.size());
    for (const auto& m : tables.baskets) {
        if (m.branch_id >= tables.branches.size()) {
            invalid("basket references undefined branch " + std::to_string(m.branch_id));
        }
        if (m.entry_count == 0) {
            invalid("basket with zero entries");
        }
        if (!m.spec.is_valid()) {
            invalid("basket has invalid compression spec " + m.spec.label());
        }
        if (m.spec.codec == Codec::none && m.compressed_size != m.uncompressed_size) {
            invalid("uncompressed basket with differing sizes");
        }
        const auto& b = tables.branches[m.branch_id];
        const auto width = element_width(b.element);
        if (b.shape.kind == ShapeKind::var_array) {
            const std::uint64_t offsets = (std::uint64_t{m.entry_count} + 1) * 4;
            if (m.uncompressed_size < offsets || (m.uncompressed_size - offsets) % width != 0) {
                invalid("var_array basket of '" + b.name + "' has inconsistent uncompressed size");
            }
        } else if (std::uint64_t{m.uncompressed_size}
                   != std::uint64_t{m.entry_count} * b.shape.values_per_entry() * width) {
            invalid("basket of '" + b.name + "' has uncompressed size " + std::to_string(m.uncompressed_size)
                    + " inconsistent with " + std::to_string(m.entry_count) + " entries");
        }
        per_branch[m.branch_id].push_back(&m);
    }

    for (std::size_t id = 0; id < per_branch.size(); ++id) {
        auto& list = per_branch[id];
        std::sort(list.begin(), list.end(), [](auto* a, auto* b) { return a->first_entry < b->first_entry; });
        EntryIndex expected = 0;
        for (const auto* m : list) {
            if (m->first_entry != expected) {
                invalid("baskets of branch '" + tables.branches[id].name + "' are not contiguous at entry "
                        + std::to_string(expected));
            }
            expected = m->end_entry();
        }
        if (expected != tables.total_entries) {
            invalid("baskets of branch '" + tables.branches[id].name + "' cover " + std::to_string(expected)
                    + " entries, expected " + std::to_string(tables.total_entries));
        }
        for (const auto boundary : bounds) {
            if (boundary == tables.total_entries) {
                continue;
            }
            const auto it = std::lower_bound(list.begin(), list.end(), boundary,
                                             [](const BasketMeta* m, EntryIndex e) { return m->first_entry < e; });
            if (it == list.end() || (*it)->first_entry != boundary) {
                invalid("branch '" + tables.branches[id].name + "' has no basket starting at cluster boundary "
                        + std::to_string(boundary));
            }
        }
    }
}

FileTables decode_file(const ByteSource& source)
{
    const auto size = source.size();
    if (size < file_header_size) {
        throw Error(ErrorCode::truncated, "file shorter than its header");
    }
    std::array<std::uint8_t, file_header_size> header{};
    source.read_at(0, header);
    decode_file_header(header);

    if (size < file_header_size + trailer_size) {
        throw Error(ErrorCode::truncated, "file shorter than header plus trailer");
    }
    std::array<std::uint8_t, trailer_size> trailer{};
    source.read_at(size - trailer_size, trailer);
    if (!has_magic(std::span(trailer).subspan(8), file_magic)) {
        const auto code = diagnose_missing_trailer(source);
        throw Error(code, code == ErrorCode::truncated ? "file ends before its footer"
                                                       : "trailing magic is damaged");
    }

    const auto footer_offset = load_be<std::uint64_t>(trailer.data());
    const auto footer_end = size - trailer_size;
    if (footer_offset > footer_end) {
        invalid("footer offset points past the trailer");
    }
    if (footer_offset < file_header_size) {
        invalid("footer offset overlaps the file header");
    }

    const auto footer = source.read_vector(footer_offset, footer_end - footer_offset);
    auto t = parse_footer(footer, footer_offset);
    validate_tables(t);
    return t;
}

} // namespace bkio
