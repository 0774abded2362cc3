#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace splitcodec::detail {

template <typename T>
void put_le(std::string& out, T value)
{
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
    }
}

template <typename T>
[[nodiscard]] T get_le(std::string_view in, std::size_t pos)
{
    std::uint64_t value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        value |= std::uint64_t{static_cast<std::uint8_t>(in[pos + i])} << (8 * i);
    }
    return static_cast<T>(value);
}

} // namespace splitcodec::detail
