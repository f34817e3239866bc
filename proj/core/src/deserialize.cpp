#include <bkio/deserialize.hpp>

#include <string>

namespace bkio {

NativeArray make_native_array(ElementKind kind, std::size_t size)
{
    switch (kind) {
    case ElementKind::f32: return std::vector<float>(size);
    case ElementKind::f64: return std::vector<double>(size);
    case ElementKind::i32: return std::vector<std::int32_t>(size);
    case ElementKind::i64: return std::vector<std::int64_t>(size);
    case ElementKind::u8: return std::vector<std::uint8_t>(size);
    }
    throw Error(ErrorCode::type_mismatch, "unknown element kind");
}

ElementKind kind_of(const NativeArray& array) noexcept
{
    return std::visit([](const auto& v) { return ElementTraits<typename std::decay_t<decltype(v)>::value_type>::kind; },
                      array);
}

std::size_t size_of(const NativeArray& array) noexcept
{
    return std::visit([](const auto& v) { return v.size(); }, array);
}

NativeArray decode_elements(std::span<const std::uint8_t> raw, ElementKind kind)
{
    const auto width = element_width(kind);
    if (raw.size() % width != 0) {
        throw Error(ErrorCode::size_mismatch, std::to_string(raw.size()) + " bytes is not a whole number of "
                                                  + std::string(to_string(kind)) + " elements");
    }
    NativeArray out = make_native_array(kind, raw.size() / width);
    std::visit([&](auto& values) { decode_into(raw, std::span(values)); }, out);
    return out;
}

std::vector<std::uint8_t> encode_elements(const NativeArray& values)
{
    return std::visit(
        [](const auto& typed) {
            using T = typename std::decay_t<decltype(typed)>::value_type;
            std::vector<std::uint8_t> out(typed.size() * sizeof(T));
            encode_into(std::span<const T>(typed), out.data());
            return out;
        },
        values);
}

double element_as_double(const NativeArray& array, std::size_t index)
{
    return std::visit([index](const auto& v) { return static_cast<double>(v.at(index)); }, array);
}

} // namespace bkio
