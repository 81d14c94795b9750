#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <string>

namespace hrst {

/// Shortest decimal form that reads back to the same double; nan, inf, -inf
/// for non-finite values.
inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
    return std::string(buf.data(), res.ptr);
}

}  // namespace hrst
