#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "pnoise/detail/format.hpp"
#include "pnoise/detail/rng.hpp"
#include "pnoise/error.hpp"
#include "pnoise/psd_models.hpp"

namespace pnoise {

/// theta_k = a * theta_{k-1} + u_k,  u_k ~ N(0, sigma_u_sq).
struct ArCoefficients {
    double a = 1.0;
    double sigma_u_sq = 0.0;
    double ts = 0.0;
    bool wiener = false;          // a == 1: random walk, no stationary law
    bool validity_warning = false;  // f3db*ts in (0.01, 0.1]

    double stationary_variance() const {
        if (wiener) throw domain_error("ArCoefficients: Wiener mode has no stationary variance");
        return sigma_u_sq / (1.0 - a * a);
    }
};

/// Increment variance of the free-running (Wiener) phase at period ts:
/// 4 pi^2 K ts.
inline double wiener_sigma(const OscillatorParams& p, double ts) {
    if (!(ts > 0.0)) throw domain_error("wiener_sigma: ts must be > 0");
    return 4.0 * std::numbers::pi * std::numbers::pi * p.K() * ts;
}

inline ArCoefficients ar_coefficients(const OscillatorParams& p, double ts) {
    if (!(ts >= 0.0) || !std::isfinite(ts)) throw domain_error("ar_coefficients: ts must be >= 0");
    if (p.free_running()) {
        throw domain_error("ar_coefficients: f3db = 0 is free-running; use wiener_sigma/gen_wiener");
    }
    if (ts == 0.0) return {1.0, 0.0, 0.0, true, false};
    const double x = p.f3db() * ts;
    if (x > 0.1) {
        throw validity_error("ar_coefficients: f3db*ts = " + detail::fmt(x) +
                             " > 0.1, discrete-time model invalid");
    }
    const double pi = std::numbers::pi;
    ArCoefficients c;
    c.ts = ts;
    c.a = std::exp(-2.0 * pi * x);
    // pi K / f3db * (1 - e^{-4 pi x}), without cancellation at small x
    c.sigma_u_sq = pi * p.K() / p.f3db() * -std::expm1(-4.0 * pi * x);
    c.validity_warning = x > 0.01;
    return c;
}

struct ModelDescriptor {
    std::string kind;  // "ar", "wiener", "white", "composite", ...
    std::vector<std::pair<std::string, double>> values;

    /// Compact JSON object, fixed key order.
    std::string json() const {
        std::string s = "{\"kind\":\"" + kind + "\"";
        for (const auto& [k, v] : values) s += ",\"" + k + "\":" + detail::fmt(v);
        return s + "}";
    }
};

struct PnStream {
    std::vector<double> samples;
    double ts = 0.0;
    std::uint64_t seed = 0;
    ModelDescriptor model;
};

namespace detail {

// Sub-stream indices. Composite member i > 0 uses derive_seed(master, i);
// these sit far away from any realistic member count.
inline constexpr std::uint64_t theta0_stream = 0x7E7A0;
inline constexpr std::uint64_t floor_stream = 0xF100;

inline void require_count(std::size_t n, const char* who) {
    if (n < 1) throw std::invalid_argument(std::string(who) + ": n must be >= 1");
}

}  // namespace detail

/// Stationary AR(1) stream: theta_0 is drawn from N(0, sigma_u^2/(1-a^2)) on
/// a separate sub-stream, so the innovations u_1.. are the same draws
/// gen_wiener uses for the same seed.
inline PnStream gen_ar(const ArCoefficients& c, std::size_t n, std::uint64_t seed) {
    detail::require_count(n, "gen_ar");
    if (c.wiener || c.a >= 1.0) throw domain_error("gen_ar: a = 1 is the Wiener limit; use gen_wiener");
    if (!(c.a >= 0.0) || !(c.sigma_u_sq >= 0.0)) {
        throw std::invalid_argument("gen_ar: need 0 <= a < 1 and sigma_u_sq >= 0");
    }
    PnStream s{std::vector<double>(n), c.ts, seed,
               {"ar", {{"a", c.a}, {"sigma_u_sq", c.sigma_u_sq}}}};
    const double sigma = std::sqrt(c.sigma_u_sq);
    detail::GaussianSource init(detail::derive_seed(seed, detail::theta0_stream));
    detail::GaussianSource innov(seed);
    double theta = std::sqrt(c.stationary_variance()) * init();
    s.samples[0] = theta;
    for (std::size_t k = 1; k < n; ++k) {
        theta = c.a * theta + sigma * innov();
        s.samples[k] = theta;
    }
    return s;
}

/// Random walk from theta_0 = 0 with i.i.d. N(0, sigma_u_sq) increments.
inline PnStream gen_wiener(double sigma_u_sq, std::size_t n, std::uint64_t seed, double ts = 0.0) {
    detail::require_count(n, "gen_wiener");
    if (!(sigma_u_sq >= 0.0)) throw domain_error("gen_wiener: sigma_u_sq must be >= 0");
    PnStream s{std::vector<double>(n), ts, seed, {"wiener", {{"sigma_u_sq", sigma_u_sq}}}};
    const double sigma = std::sqrt(sigma_u_sq);
    detail::GaussianSource innov(seed);
    double theta = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        theta += sigma * innov();
        s.samples[k] = theta;
    }
    return s;
}

/// i.i.d. N(0, linf_sq / ts): a white floor bandlimited to the sample rate.
inline PnStream gen_white_floor(double linf_sq, double ts, std::size_t n, std::uint64_t seed) {
    detail::require_count(n, "gen_white_floor");
    if (!(linf_sq >= 0.0)) throw domain_error("gen_white_floor: linf_sq must be >= 0");
    if (!(ts > 0.0)) throw domain_error("gen_white_floor: ts must be > 0");
    PnStream s{std::vector<double>(n, 0.0), ts, seed, {"white", {{"linf_sq", linf_sq}}}};
    if (linf_sq == 0.0) return s;
    const double sigma = std::sqrt(linf_sq / ts);
    detail::GaussianSource src(seed);
    for (auto& v : s.samples) v = sigma * src();
    return s;
}

/// One full process at period ts: AR (or Wiener when f3db = 0) plus its
/// white floor on a sub-derived seed.
inline PnStream gen_process(const OscillatorParams& p, double ts, std::size_t n,
                            std::uint64_t seed) {
    if (!(ts > 0.0)) throw domain_error("gen_process: ts must be > 0");
    PnStream s = p.free_running() ? gen_wiener(wiener_sigma(p, ts), n, seed, ts)
                                  : gen_ar(ar_coefficients(p, ts), n, seed);
    if (p.linf_sq() > 0.0) {
        const PnStream fl =
            gen_white_floor(p.linf_sq(), ts, n, detail::derive_seed(seed, detail::floor_stream));
        for (std::size_t k = 0; k < n; ++k) s.samples[k] += fl.samples[k];
    }
    s.ts = ts;
    s.seed = seed;
    s.model = {"process",
               {{"f3db", p.f3db()}, {"l100_sq", p.l100_sq()}, {"linf_sq", p.linf_sq()},
                {"f_ref", p.f_ref()}}};
    return s;
}

/// Seed used for member i of a composite. Member 0 keeps the master seed so
/// a one-member composite reproduces gen_process exactly.
inline std::uint64_t member_seed(std::uint64_t master, std::size_t i) {
    return i == 0 ? master : detail::derive_seed(master, i);
}

inline PnStream gen_composite(const CompositeModel& m, double ts, std::size_t n,
                              std::uint64_t seed) {
    PnStream out{std::vector<double>(n, 0.0), ts, seed, {"composite", {}}};
    for (std::size_t i = 0; i < m.size(); ++i) {
        const auto& p = m.processes()[i];
        const PnStream s = gen_process(p, ts, n, member_seed(seed, i));
        for (std::size_t k = 0; k < n; ++k) out.samples[k] += s.samples[k];
        const std::string tag = "p" + std::to_string(i) + "_";
        out.model.values.emplace_back(tag + "f3db", p.f3db());
        out.model.values.emplace_back(tag + "l100_sq", p.l100_sq());
        out.model.values.emplace_back(tag + "linf_sq", p.linf_sq());
    }
    return out;
}

inline PnStream gen_composite(const OscillatorParams& p, double ts, std::size_t n,
                              std::uint64_t seed) {
    return gen_composite(CompositeModel({p}), ts, n, seed);
}

}  // namespace pnoise
