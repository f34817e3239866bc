#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include <bkio/endian.hpp>
#include <bkio/error.hpp>
#include <bkio/types.hpp>

namespace bkio {

/// Host-native element storage, one alternative per ElementKind.
using NativeArray = std::variant<std::vector<float>, std::vector<double>, std::vector<std::int32_t>,
                                 std::vector<std::int64_t>, std::vector<std::uint8_t>>;

NativeArray make_native_array(ElementKind kind, std::size_t size = 0);
ElementKind kind_of(const NativeArray& array) noexcept;
std::size_t size_of(const NativeArray& array) noexcept;

/// Converts big-endian on-disk bytes into host-native values.
/// Throws size_mismatch when raw.size() is not a multiple of the element width.
NativeArray decode_elements(std::span<const std::uint8_t> raw, ElementKind kind);

/// Inverse of decode_elements; used by the writer.
std::vector<std::uint8_t> encode_elements(const NativeArray& values);

template <Element T>
inline void decode_into(std::span<const std::uint8_t> raw, std::span<T> out) noexcept
{
    const std::uint8_t* src = raw.data();
    for (std::size_t i = 0; i < out.size(); ++i, src += sizeof(T)) {
        out[i] = load_be<T>(src);
    }
}

template <Element T>
inline void encode_into(std::span<const T> values, std::uint8_t* dst) noexcept
{
    for (const T value : values) {
        store_be<T>(dst, value);
        dst += sizeof(T);
    }
}

template <Element T>
[[nodiscard]] std::span<const T> native_span(const NativeArray& array)
{
    const auto* typed = std::get_if<std::vector<T>>(&array);
    if (typed == nullptr) {
        throw Error(ErrorCode::type_mismatch, "requested element type does not match stored element type");
    }
    return *typed;
}

/// Widens element `index` of any native array to double.
double element_as_double(const NativeArray& array, std::size_t index);

} // namespace bkio
