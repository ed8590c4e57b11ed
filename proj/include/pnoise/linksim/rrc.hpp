#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace pnoise::linksim {

/// Root-raised-cosine taps, time in symbol periods t = (i - (N-1)/2) / osf,
/// N = span*osf + 1. Scaled so that sum(p^2)/osf = 1, i.e. unit pulse energy
/// with Ts = 1; p convolved with itself and divided by osf is then a unit
/// Nyquist pulse at symbol spacing osf.
inline std::vector<double> rrc_taps(double rolloff, int span_symbols = 32, int osf = 5) {
    if (!(rolloff >= 0.0 && rolloff <= 1.0)) throw std::invalid_argument("rrc_taps: rolloff must lie in [0, 1]");
    if (span_symbols < 16) throw std::invalid_argument("rrc_taps: span must be >= 16 symbols");
    if (span_symbols % 2 != 0) throw std::invalid_argument("rrc_taps: span must be even");
    if (osf < 2) throw std::invalid_argument("rrc_taps: osf must be >= 2");

    const double pi = std::numbers::pi;
    const double b = rolloff;
    const int n = span_symbols * osf + 1;
    const int mid = (n - 1) / 2;
    std::vector<double> h(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const double t = static_cast<double>(i - mid) / osf;
        double v;
        if (i == mid) {
            v = 1.0 - b + 4.0 * b / pi;
        } else if (b > 0.0 && std::abs(std::abs(4.0 * b * t) - 1.0) < 1e-12) {
            v = b / std::sqrt(2.0) *
                ((1.0 + 2.0 / pi) * std::sin(pi / (4.0 * b)) + (1.0 - 2.0 / pi) * std::cos(pi / (4.0 * b)));
        } else {
            const double num = std::sin(pi * t * (1.0 - b)) + 4.0 * b * t * std::cos(pi * t * (1.0 + b));
            const double den = pi * t * (1.0 - (4.0 * b * t) * (4.0 * b * t));
            v = num / den;
        }
        h[static_cast<std::size_t>(i)] = v;
    }
    // exact symmetry regardless of rounding in t
    for (int i = 0; i < mid; ++i) h[static_cast<std::size_t>(n - 1 - i)] = h[static_cast<std::size_t>(i)];
    double e = 0.0;
    for (double v : h) e += v * v;
    const double scale = std::sqrt(static_cast<double>(osf) / e);
    for (double& v : h) v *= scale;
    return h;
}

/// (p * p)[m] / osf at m = centre + l*osf, l = -span..span: the cascade seen
/// at the symbol instants. Entry `span` is the l = 0 peak.
inline std::vector<double> cascade_at_symbols(const std::vector<double>& p, int osf) {
    const int n = static_cast<int>(p.size());
    const int span = (n - 1) / osf;
    std::vector<double> out;
    for (int l = -span; l <= span; ++l) {
        double acc = 0.0;
        const int shift = l * osf;
        for (int j = 0; j < n; ++j) {
            const int k = j + shift;
            if (k >= 0 && k < n) acc += p[static_cast<std::size_t>(j)] * p[static_cast<std::size_t>(k)];
        }
        out.push_back(acc / osf);
    }
    return out;
}

}  // namespace pnoise::linksim
