#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bkio {

using BranchId = std::uint32_t;
using EntryIndex = std::uint64_t;

enum class ElementKind : std::uint8_t { f32 = 0, f64 = 1, i32 = 2, i64 = 3, u8 = 4 };

constexpr std::size_t element_width(ElementKind kind) noexcept
{
    switch (kind) {
    case ElementKind::f32: return 4;
    case ElementKind::f64: return 8;
    case ElementKind::i32: return 4;
    case ElementKind::i64: return 8;
    case ElementKind::u8: return 1;
    }
    return 0;
}

std::string_view to_string(ElementKind kind) noexcept;
bool is_valid_element_kind(std::uint8_t raw) noexcept;

template <typename T> struct ElementTraits;
template <> struct ElementTraits<float> { static constexpr ElementKind kind = ElementKind::f32; };
template <> struct ElementTraits<double> { static constexpr ElementKind kind = ElementKind::f64; };
template <> struct ElementTraits<std::int32_t> { static constexpr ElementKind kind = ElementKind::i32; };
template <> struct ElementTraits<std::int64_t> { static constexpr ElementKind kind = ElementKind::i64; };
template <> struct ElementTraits<std::uint8_t> { static constexpr ElementKind kind = ElementKind::u8; };

template <typename T>
concept Element = requires { ElementTraits<T>::kind; };

enum class ShapeKind : std::uint8_t { scalar = 0, fixed_array = 1, var_array = 2 };

struct BranchShape {
    ShapeKind kind = ShapeKind::scalar;
    std::uint32_t fixed_len = 0; ///< only meaningful for fixed_array

    static constexpr BranchShape scalar() noexcept { return {ShapeKind::scalar, 0}; }
    static constexpr BranchShape fixed_array(std::uint32_t len) noexcept { return {ShapeKind::fixed_array, len}; }
    static constexpr BranchShape var_array() noexcept { return {ShapeKind::var_array, 0}; }

    /// Elements per entry for scalar and fixed_array shapes; 0 for var_array.
    [[nodiscard]] constexpr std::uint32_t values_per_entry() const noexcept
    {
        switch (kind) {
        case ShapeKind::scalar: return 1;
        case ShapeKind::fixed_array: return fixed_len;
        case ShapeKind::var_array: return 0;
        }
        return 0;
    }

    friend bool operator==(const BranchShape&, const BranchShape&) = default;
};

struct BranchDescriptor {
    BranchId branch_id = 0;
    std::string name;
    ElementKind element = ElementKind::f32;
    BranchShape shape;
    /// Uncompressed buffer size at which the branch emits a basket.
    std::uint32_t basket_target_bytes = 32000;

    friend bool operator==(const BranchDescriptor&, const BranchDescriptor&) = default;
};

enum class Codec : std::uint8_t { none = 0, deflate = 1, lz4 = 2, lz4hc = 3 };

std::string_view to_string(Codec codec) noexcept;

struct CompressionSpec {
    Codec codec = Codec::none;
    std::uint8_t level = 0;

    [[nodiscard]] bool is_valid() const noexcept;
    /// Throws invalid_config when the codec/level pair is not allowed.
    void validate() const;
    /// "none-0", "deflate-6", "lz4-1", "lz4hc-9"
    [[nodiscard]] std::string label() const;

    friend bool operator==(const CompressionSpec&, const CompressionSpec&) = default;
};

/// Parses labels of the form produced by CompressionSpec::label().
CompressionSpec parse_compression_spec(std::string_view label);

struct BasketMeta {
    BranchId branch_id = 0;
    EntryIndex first_entry = 0;
    std::uint32_t entry_count = 0;
    std::uint64_t file_offset = 0;
    std::uint32_t compressed_size = 0;
    std::uint32_t uncompressed_size = 0;
    CompressionSpec spec;

    [[nodiscard]] EntryIndex end_entry() const noexcept { return first_entry + entry_count; }

    friend bool operator==(const BasketMeta&, const BasketMeta&) = default;
};

/// Cluster k spans [boundaries[k-1], boundaries[k]) with an implicit leading 0.
struct ClusterIndex {
    std::vector<EntryIndex> boundaries;

    [[nodiscard]] std::size_t cluster_count() const noexcept { return boundaries.size(); }
    [[nodiscard]] EntryIndex cluster_begin(std::size_t cluster) const noexcept
    {
        return cluster == 0 ? 0 : boundaries[cluster - 1];
    }
    [[nodiscard]] EntryIndex cluster_end(std::size_t cluster) const noexcept { return boundaries[cluster]; }
    /// Index of the cluster containing `entry`; cluster_count() when past the end.
    [[nodiscard]] std::size_t cluster_of(EntryIndex entry) const noexcept;

    friend bool operator==(const ClusterIndex&, const ClusterIndex&) = default;
};

/// Everything the footer describes.
struct FileTables {
    std::vector<BranchDescriptor> branches;
    std::vector<BasketMeta> baskets;
    ClusterIndex clusters;
    std::uint64_t total_entries = 0;

    friend bool operator==(const FileTables&, const FileTables&) = default;
};

} // namespace bkio
