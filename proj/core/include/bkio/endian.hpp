#pragma once

#include <bit>
#include <concepts>
#include <cstdint>
#include <cstring>
#include <type_traits>

// Header-only so the consumer's loop can inline the byte swaps.

namespace bkio {

namespace detail {

template <typename U>
constexpr U byteswap(U value) noexcept
{
    if constexpr (sizeof(U) == 1) {
        return value;
    } else if constexpr (sizeof(U) == 2) {
        return static_cast<U>(__builtin_bswap16(value));
    } else if constexpr (sizeof(U) == 4) {
        return static_cast<U>(__builtin_bswap32(value));
    } else {
        static_assert(sizeof(U) == 8);
        return static_cast<U>(__builtin_bswap64(value));
    }
}

template <std::size_t N> struct UnsignedOfSize;
template <> struct UnsignedOfSize<1> { using type = std::uint8_t; };
template <> struct UnsignedOfSize<2> { using type = std::uint16_t; };
template <> struct UnsignedOfSize<4> { using type = std::uint32_t; };
template <> struct UnsignedOfSize<8> { using type = std::uint64_t; };

} // namespace detail

template <typename T>
concept Trivial = std::is_trivially_copyable_v<T> && (sizeof(T) == 1 || sizeof(T) == 2 || sizeof(T) == 4 || sizeof(T) == 8);

/// Reads a big-endian T from `src` (no alignment requirement).
template <Trivial T>
[[nodiscard]] inline T load_be(const std::uint8_t* src) noexcept
{
    using U = typename detail::UnsignedOfSize<sizeof(T)>::type;
    U raw;
    std::memcpy(&raw, src, sizeof(U));
    if constexpr (std::endian::native == std::endian::little) {
        raw = detail::byteswap(raw);
    }
    return std::bit_cast<T>(raw);
}

template <Trivial T>
inline void store_be(std::uint8_t* dst, T value) noexcept
{
    using U = typename detail::UnsignedOfSize<sizeof(T)>::type;
    auto raw = std::bit_cast<U>(value);
    if constexpr (std::endian::native == std::endian::little) {
        raw = detail::byteswap(raw);
    }
    std::memcpy(dst, &raw, sizeof(U));
}

} // namespace bkio
