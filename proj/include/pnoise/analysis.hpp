#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "pnoise/error.hpp"
#include "pnoise/psd_models.hpp"

// Discretization error of the symbol-rate channel z_k = x_k e^{j theta_k} + w_k
// for a free-running oscillator and an ideal sinc pulse. Everything is a
// function of rho = pi K Ts, the phasor 3-dB bandwidth over the symbol rate.
//
// The closed forms are templates so tests can run them in extended precision;
// math calls are unqualified and resolve through ADL for non-builtin types.

namespace pnoise {

struct Rho {
    double value;
    explicit Rho(double v) : value(v) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw domain_error("Rho: value must be finite and > 0, got " + std::to_string(v));
        }
    }
};

inline Rho rho(const OscillatorParams& p, double ts) {
    if (!(ts > 0.0) || !std::isfinite(ts)) throw domain_error("rho: ts must be > 0");
    return Rho(std::numbers::pi * p.K() * ts);
}

namespace detail {

template <class T>
T pi_of() {
    using std::atan;
    return 4 * atan(T(1));
}

template <class T>
void require_positive_rho(const T& r) {
    if (!(r > 0)) throw domain_error("rho must be > 0");
}

// log(1 + 1/rho^2) without overflow for tiny rho.
template <class T>
T log1p_inv_sq(const T& r) {
    using std::log;
    using std::log1p;
    if (r < 1) return -2 * log(r) + log1p(r * r);
    return log1p(1 / (r * r));
}

// Large-rho series in u = 1/rho; all converge fast for u <= 1/2.
template <class T>
T series_sum(const T& u, int kind) {
    using std::abs;
    const T eps = std::numeric_limits<T>::epsilon();
    const T u2 = u * u;
    T total = 0;
    T power = u;  // u^{2m+1}
    for (int m = 0; m < 400; ++m) {
        const T k = T(2 * m + 1);
        T term;
        switch (kind) {
            case 0: term = power / (k * (k + 1)); break;        // atan(u) - log1p(u^2)/(2u)
            case 1: term = power / ((k + 1) * (k + 2)); break;  // eta_isi
            default: term = power / (k * (k + 2)); break;       // eta_d
        }
        if (m % 2 == 1) term = -term;
        total += term;
        if (abs(term) <= eps * abs(total)) break;
        power *= u2;
    }
    return total;
}

}  // namespace detail

/// E|y'_k|^2 over all taps: (2/pi)[atan(1/rho) - (rho/2) log(1 + 1/rho^2)].
template <class T>
T sum_gamma(const T& r) {
    using std::atan2;
    detail::require_positive_rho(r);
    const T pi = detail::pi_of<T>();
    if (r > 2) return 2 / pi * detail::series_sum(T(1 / r), 0);
    return 2 / pi * (atan2(T(1), r) - r / 2 * detail::log1p_inv_sq(r));
}

/// Re E{e^{-j theta_k} g_{0,k}}; numerically the same closed form as
/// sum_gamma, kept separate because it enters eta_d with its own meaning.
template <class T>
T corr_g(const T& r) {
    return sum_gamma(r);
}

/// Mean-square ISI power, sum of gamma_l over l != 0.
template <class T>
T eta_isi(const T& r) {
    using std::atan2;
    detail::require_positive_rho(r);
    const T pi = detail::pi_of<T>();
    if (r > 2) return 2 / pi * detail::series_sum(T(1 / r), 1);
    return 2 / pi * (r * r * atan2(T(1), r) + r / 2 * detail::log1p_inv_sq(r) - r);
}

/// Power of the direct gain, E|g_{0,k}|^2.
template <class T>
T gamma0(const T& r) {
    using std::atan2;
    detail::require_positive_rho(r);
    if (r > 2) return sum_gamma(r) - eta_isi(r);
    const T pi = detail::pi_of<T>();
    return 2 / pi * (atan2(T(1), r) * (1 - r * r) - r * detail::log1p_inv_sq(r) + r);
}

/// Direct-path (power-loss) part of the mean-square error.
template <class T>
T eta_d(const T& r) {
    using std::atan;
    detail::require_positive_rho(r);
    const T pi = detail::pi_of<T>();
    if (r > 2) return 1 - 4 / pi * detail::series_sum(T(1 / r), 2);
    // 1 + (2/pi)[rho - (1 + rho^2) atan(1/rho)], rewritten with atan(rho)
    return 2 / pi * r - r * r + 2 / pi * (1 + r * r) * atan(r);
}

/// Total mean-square error of the symbol-rate model.
template <class T>
T eta(const T& r) {
    using std::atan;
    detail::require_positive_rho(r);
    const T pi = detail::pi_of<T>();
    return 2 / pi * (atan(r) + r / 2 * detail::log1p_inv_sq(r));
}

inline double sum_gamma(Rho r) { return sum_gamma(r.value); }
inline double corr_g(Rho r) { return corr_g(r.value); }
inline double eta_isi(Rho r) { return eta_isi(r.value); }
inline double gamma0(Rho r) { return gamma0(r.value); }
inline double eta_d(Rho r) { return eta_d(r.value); }
inline double eta(Rho r) { return eta(r.value); }

/// gamma_0 / sum_{l != 0} gamma_l, linear.
template <class T>
T sir_from_rho(const T& r) {
    return gamma0(r) / eta_isi(r);
}
inline double sir_from_rho(Rho r) { return sir_from_rho(r.value); }

/// Same SIR parametrized by the Wiener increment std-dev at the symbol rate,
/// rho = sigma_u^2 / (4 pi).
template <class T>
T sir_from_sigma_u(const T& sigma_u) {
    if (!(sigma_u > 0)) throw domain_error("sir_from_sigma_u: sigma_u must be > 0");
    return sir_from_rho(T(sigma_u * sigma_u / (4 * detail::pi_of<T>())));
}

struct ErrorBreakdown {
    double eta = 0.0;
    double eta_d = 0.0;
    double eta_isi = 0.0;
    double sir_linear = 0.0;
};

inline ErrorBreakdown error_breakdown(Rho r) {
    return {eta(r), eta_d(r), eta_isi(r), sir_from_rho(r)};
}

/// PN power folded into the symbol band by sampling at 1/ts:
/// 2 * int_{1/(2ts)}^inf K/(f3db^2 + f^2) df = 2 K atan(2 f3db ts) / f3db.
inline double aliasing_variance(const OscillatorParams& p, double ts) {
    if (p.free_running()) throw domain_error("aliasing_variance: requires f3db > 0");
    if (!(ts > 0.0)) throw domain_error("aliasing_variance: ts must be > 0");
    return 2.0 * p.K() * std::atan(2.0 * p.f3db() * ts) / p.f3db();
}

/// Aliased power relative to the in-band PN power.
inline double normalized_aliasing(const OscillatorParams& p, double ts) {
    if (p.free_running()) throw domain_error("normalized_aliasing: requires f3db > 0");
    if (!(ts > 0.0)) throw domain_error("normalized_aliasing: ts must be > 0");
    const double x = 2.0 * p.f3db() * ts;
    return std::atan(x) / std::atan(1.0 / x);
}

}  // namespace pnoise
