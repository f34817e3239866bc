#include <bkio/types.hpp>

#include <algorithm>
#include <charconv>

#include <bkio/error.hpp>

namespace bkio {

std::string_view to_string(ElementKind kind) noexcept
{
    switch (kind) {
    case ElementKind::f32: return "f32";
    case ElementKind::f64: return "f64";
    case ElementKind::i32: return "i32";
    case ElementKind::i64: return "i64";
    case ElementKind::u8: return "u8";
    }
    return "?";
}

bool is_valid_element_kind(std::uint8_t raw) noexcept
{
    return raw <= static_cast<std::uint8_t>(ElementKind::u8);
}

std::string_view to_string(Codec codec) noexcept
{
    switch (codec) {
    case Codec::none: return "none";
    case Codec::deflate: return "deflate";
    case Codec::lz4: return "lz4";
    case Codec::lz4hc: return "lz4hc";
    }
    return "?";
}

bool CompressionSpec::is_valid() const noexcept
{
    switch (codec) {
    case Codec::none: return level == 0;
    case Codec::deflate: return level >= 1 && level <= 9;
    case Codec::lz4: return level == 1;
    case Codec::lz4hc: return level >= 1 && level <= 12;
    }
    return false;
}

void CompressionSpec::validate() const
{
    if (!is_valid()) {
        throw Error(ErrorCode::invalid_config, "level " + std::to_string(level) + " is not valid for codec "
                                                   + std::string(to_string(codec)));
    }
}

std::string CompressionSpec::label() const
{
    return std::string(to_string(codec)) + "-" + std::to_string(level);
}

CompressionSpec parse_compression_spec(std::string_view label)
{
    const auto dash = label.rfind('-');
    if (dash == std::string_view::npos) {
        throw Error(ErrorCode::invalid_config, "expected <codec>-<level>, got '" + std::string(label) + "'");
    }
    const auto name = label.substr(0, dash);
    const auto digits = label.substr(dash + 1);

    CompressionSpec spec;
    if (name == "none") {
        spec.codec = Codec::none;
    } else if (name == "deflate" || name == "zlib") {
        spec.codec = Codec::deflate;
    } else if (name == "lz4") {
        spec.codec = Codec::lz4;
    } else if (name == "lz4hc") {
        spec.codec = Codec::lz4hc;
    } else {
        throw Error(ErrorCode::invalid_config, "unknown codec '" + std::string(name) + "'");
    }

    unsigned level = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), level);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || level > 255) {
        throw Error(ErrorCode::invalid_config, "bad level in '" + std::string(label) + "'");
    }
    spec.level = static_cast<std::uint8_t>(level);
    spec.validate();
    return spec;
}

std::size_t ClusterIndex::cluster_of(EntryIndex entry) const noexcept
{
    const auto it = std::upper_bound(boundaries.begin(), boundaries.end(), entry);
    return static_cast<std::size_t>(it - boundaries.begin());
}

} // namespace bkio
