#pragma once

#include <array>
#include <charconv>
#include <string>

namespace pnoise::detail {

/// Shortest round-trip decimal form of a double. Locale independent, so CSV
/// output is byte-identical across runs and machines.
inline std::string fmt(double value) {
    std::array<char, 32> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

}  // namespace pnoise::detail
