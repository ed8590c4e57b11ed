#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pnoise::linksim {

enum class Constellation { qpsk, qam16 };

inline const char* constellation_name(Constellation c) {
    return c == Constellation::qpsk ? "qpsk" : "qam16";
}

inline Constellation parse_constellation(const std::string& s) {
    if (s == "qpsk" || s == "QPSK") return Constellation::qpsk;
    if (s == "qam16" || s == "QAM16" || s == "16qam") return Constellation::qam16;
    throw std::invalid_argument("unknown constellation '" + s + "' (qpsk, qam16)");
}

inline int bits_per_symbol(Constellation c) { return c == Constellation::qpsk ? 2 : 4; }

namespace detail {

// Gray 4-PAM: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3
inline double pam4(unsigned b) {
    static constexpr double lv[4] = {-3.0, -1.0, 3.0, 1.0};
    return lv[b & 3u];
}

inline unsigned pam4_decide(double v) {
    if (v < -2.0) return 0u;
    if (v < 0.0) return 1u;
    if (v < 2.0) return 3u;
    return 2u;
}

}  // namespace detail

/// Gray-mapped, unit average energy. `bits` holds bits_per_symbol bits,
/// first bit in the most significant position used.
inline std::complex<double> map_symbol(Constellation c, unsigned bits) {
    if (c == Constellation::qpsk) {
        const double s = 1.0 / std::sqrt(2.0);
        return {(bits & 2u) ? -s : s, (bits & 1u) ? -s : s};
    }
    const double s = 1.0 / std::sqrt(10.0);
    return {detail::pam4(bits >> 2) * s, detail::pam4(bits) * s};
}

/// Hard decision; inverse of map_symbol on the noiseless points.
inline unsigned demap_symbol(Constellation c, std::complex<double> y) {
    if (c == Constellation::qpsk) {
        return (y.real() < 0.0 ? 2u : 0u) | (y.imag() < 0.0 ? 1u : 0u);
    }
    const double s = std::sqrt(10.0);
    return (detail::pam4_decide(y.real() * s) << 2) | detail::pam4_decide(y.imag() * s);
}

}  // namespace pnoise::linksim
