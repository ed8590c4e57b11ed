#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "pnoise/db.hpp"
#include "pnoise/detail/quadrature.hpp"
#include "pnoise/error.hpp"

namespace pnoise {

/// One Lorentzian phase-noise process:
///
///     S(f) = f_ref^2 * l100^2 / (f3db^2 + f^2) + linf^2      [rad^2/Hz]
///
/// Levels are linear, double-sided. f3db = 0 is a free-running oscillator
/// (Wiener phase), f3db > 0 a PLL-locked one (stationary Gauss-Markov phase).
/// With the default f_ref = 100 kHz, l100^2 is the level at 100 kHz offset.
class OscillatorParams {
public:
    OscillatorParams(double f3db, double l100_sq, double linf_sq = 0.0, double f_ref = 1e5)
        : f3db_(f3db), l100_sq_(l100_sq), linf_sq_(linf_sq), f_ref_(f_ref) {
        if (!(f3db >= 0.0) || !std::isfinite(f3db)) {
            throw std::invalid_argument("OscillatorParams: f3db must be finite and >= 0");
        }
        if (!(l100_sq > 0.0) || !std::isfinite(l100_sq)) {
            throw std::invalid_argument("OscillatorParams: l100_sq must be finite and > 0");
        }
        if (!(linf_sq >= 0.0) || !std::isfinite(linf_sq)) {
            throw std::invalid_argument("OscillatorParams: linf_sq must be finite and >= 0");
        }
        if (!(f_ref > 0.0) || !std::isfinite(f_ref)) {
            throw std::invalid_argument("OscillatorParams: f_ref must be finite and > 0");
        }
    }

    /// Levels in dB (10*log10). linf_db = -inf means no floor.
    static OscillatorParams from_db(double f3db, double l100_db,
                                    double linf_db = -std::numeric_limits<double>::infinity(),
                                    double f_ref = 1e5) {
        const double linf = std::isinf(linf_db) && linf_db < 0 ? 0.0 : undb(linf_db);
        return OscillatorParams(f3db, undb(l100_db), linf, f_ref);
    }

    double f3db() const { return f3db_; }
    double l100_sq() const { return l100_sq_; }
    double linf_sq() const { return linf_sq_; }
    double f_ref() const { return f_ref_; }

    /// Numerator of the Lorentzian, f_ref^2 * l100^2.
    double K() const { return f_ref_ * f_ref_ * l100_sq_; }

    bool free_running() const { return f3db_ == 0.0; }

    /// The l100 calibration treats the reference offset as far above the
    /// corner. False when f3db > f_ref/10; the model still evaluates, but
    /// l100^2 is no longer the level actually seen at f_ref.
    bool reference_offset_valid() const { return f3db_ <= f_ref_ / 10.0; }

    OscillatorParams with_linf_sq(double linf_sq) const {
        return OscillatorParams(f3db_, l100_sq_, linf_sq, f_ref_);
    }
    OscillatorParams with_f3db(double f3db) const {
        return OscillatorParams(f3db, l100_sq_, linf_sq_, f_ref_);
    }

    friend bool operator==(const OscillatorParams&, const OscillatorParams&) = default;

private:
    double f3db_;
    double l100_sq_;
    double linf_sq_;
    double f_ref_;
};

/// Phasor spectrum split into a spectral line at f = 0 and a density.
struct PhasorPsdValue {
    double delta_weight = 0.0;
    double continuous = 0.0;
};

enum class PhasorBranch { free_running, pll, general };

inline double pn_psd(const OscillatorParams& p, double f) {
    if (!std::isfinite(f)) throw domain_error("pn_psd: frequency must be finite");
    if (p.free_running() && f == 0.0) throw domain_error("free-running PSD singular at f=0");
    return p.K() / (p.f3db() * p.f3db() + f * f) + p.linf_sq();
}

inline double l0_sq_from_l100(const OscillatorParams& p) {
    if (p.free_running()) throw domain_error("l0_sq_from_l100: free-running oscillator has no finite l0");
    return p.K() / (p.f3db() * p.f3db());
}

namespace detail {

inline void require_no_floor(const OscillatorParams& p, const char* who) {
    if (p.linf_sq() != 0.0) {
        throw std::invalid_argument(std::string(who) +
                                    ": defined for linf_sq = 0 (use the *_with_floor variant)");
    }
}

}  // namespace detail

inline double pn_autocorr(const OscillatorParams& p, double tau) {
    detail::require_no_floor(p, "pn_autocorr");
    if (p.free_running()) {
        throw domain_error("pn_autocorr: free-running phase is nonstationary; use wiener_sigma");
    }
    const double pi = std::numbers::pi;
    return pi * p.K() / p.f3db() * std::exp(-2.0 * pi * p.f3db() * std::abs(tau));
}

inline double phasor_autocorr(const OscillatorParams& p, double tau) {
    detail::require_no_floor(p, "phasor_autocorr");
    const double pi = std::numbers::pi;
    const double t = std::abs(tau);
    if (p.free_running()) return std::exp(-2.0 * pi * pi * p.K() * t);
    const double c = pi * p.K() / p.f3db();
    return std::exp(-c * -std::expm1(-2.0 * pi * p.f3db() * t));
}

inline PhasorBranch phasor_branch(const OscillatorParams& p) {
    if (p.free_running()) return PhasorBranch::free_running;
    if (p.f3db() >= 10.0 * std::numbers::pi * p.K()) return PhasorBranch::pll;
    return PhasorBranch::general;
}

namespace detail {

/// Cosine transform of the phasor autocorrelation with its f = 0 line
/// removed:
///     S_c(f) = 2 * int_0^inf [R_h(tau) - e^{-c}] cos(2 pi f tau) dtau
/// with R_h(tau) = exp(-c (1 - e^{-a tau})), c = pi K / f3db, a = 2 pi f3db.
class GeneralPhasorSpectrum {
public:
    explicit GeneralPhasorSpectrum(const OscillatorParams& p)
        : c_(std::numbers::pi * p.K() / p.f3db()), a_(2.0 * std::numbers::pi * p.f3db()) {
        floor_ = std::exp(-c_);
        omega0_sq_ = a_ * a_ * (1.0 + 3.0 * c_ + c_ * c_);
        // g is decreasing; bisect for the point where it drops below 1e-13 g(0).
        const double target = 1e-13 * g(0.0);
        double hi = 1.0 / a_;
        while (g(hi) > target) hi *= 2.0;
        double lo = 0.0;
        for (int i = 0; i < 200 && hi - lo > 1e-6 * hi; ++i) {
            const double mid = 0.5 * (lo + hi);
            (g(mid) > target ? lo : hi) = mid;
        }
        tau_max_ = hi;
        // Decay scale near the origin sets the panel width for low f.
        tau_scale_ = std::min(1.0 / (c_ * a_), 1.0 / a_);
        area_ = integrate_g(0.0);
    }

    double c() const { return c_; }
    double a() const { return a_; }
    double delta_weight() const { return floor_; }
    double tau_max() const { return tau_max_; }

    double g(double tau) const {
        if (c_ > 40.0) return std::exp(-c_ * -std::expm1(-a_ * tau));
        return floor_ * std::expm1(c_ * std::exp(-a_ * tau));
    }

    /// True when the two-term large-frequency expansion is accurate to
    /// roughly 1e-8 relative.
    bool asymptotic(double f) const {
        const double w = 2.0 * std::numbers::pi * f;
        return w * w > 1e4 * omega0_sq_;
    }

    double continuous(double f) const {
        f = std::abs(f);
        const double w = 2.0 * std::numbers::pi * f;
        if (asymptotic(f)) {
            const double w2 = w * w;
            return 2.0 * c_ * a_ / w2 -
                   2.0 * c_ * a_ * a_ * a_ * (1.0 + 3.0 * c_ + c_ * c_) / (w2 * w2);
        }
        return 2.0 * integrate_g(f);
    }

    /// C(nu) = int_0^nu S_c(f) df, odd in nu.
    double cumulative(double nu) const {
        if (nu < 0.0) return -cumulative(-nu);
        if (nu == 0.0) return 0.0;
        const double half_power = 0.5 * (1.0 - floor_);
        if (asymptotic(nu)) {
            const double w = 2.0 * std::numbers::pi * nu;
            const double tail = 2.0 * c_ * a_ / (2.0 * std::numbers::pi * w) -
                                2.0 * c_ * a_ * a_ * a_ * (1.0 + 3.0 * c_ + c_ * c_) /
                                    (3.0 * 2.0 * std::numbers::pi * w * w * w);
            return half_power - tail;
        }
        // int_0^nu 2 cos(2 pi f t) df = sin(2 pi nu t) / (pi t)
        const double w = 2.0 * std::numbers::pi * nu;
        auto kern = [&](double t) {
            if (t == 0.0) return g(0.0) * 2.0 * nu;
            return g(t) * std::sin(w * t) / (std::numbers::pi * t);
        };
        const double width = std::min(0.5 / nu, tau_max_ / 32.0);
        auto r = integrate(kern, panel_breaks(0.0, tau_max_, std::min(width, 4.0 * tau_scale_)),
                           1e-11 * area_, 1e-11, 200000);
        require_converged(r, "phasor_psd cumulative");
        return r.value;
    }

private:
    double integrate_g(double f) const {
        const double w = 2.0 * std::numbers::pi * f;
        auto integrand = [&](double t) { return g(t) * std::cos(w * t); };
        double width = tau_max_ / 32.0;
        if (f > 0.0) width = std::min(width, 0.5 / f);
        width = std::min(width, 4.0 * tau_scale_);
        const double tol = f == 0.0 ? 0.0 : 1e-11 * area_;
        auto r = integrate(integrand, panel_breaks(0.0, tau_max_, width), tol, 1e-11, 200000);
        require_converged(r, "phasor_psd general branch (f=" + std::to_string(f) + ")");
        return r.value;
    }

    double c_;
    double a_;
    double floor_ = 0.0;
    double omega0_sq_ = 0.0;
    double tau_max_ = 0.0;
    double tau_scale_ = 0.0;
    double area_ = 1.0;
};

}  // namespace detail

/// Spectrum of exp(j theta(t)), floor-free model. Free-running gives a
/// Lorentzian of half-width pi K; well inside the PLL regime
/// (f3db >= 10 pi K) a carrier line plus the PN Lorentzian; in between the
/// autocorrelation is transformed numerically.
inline PhasorPsdValue phasor_psd(const OscillatorParams& p, double f) {
    detail::require_no_floor(p, "phasor_psd");
    if (!std::isfinite(f)) throw domain_error("phasor_psd: frequency must be finite");
    const double pi = std::numbers::pi;
    const double K = p.K();
    switch (phasor_branch(p)) {
        case PhasorBranch::free_running:
            return {0.0, K / (pi * pi * K * K + f * f)};
        case PhasorBranch::pll:
            return {1.0 - pi * K / p.f3db(), K / (p.f3db() * p.f3db() + f * f)};
        case PhasorBranch::general: {
            detail::GeneralPhasorSpectrum s(p);
            return {s.delta_weight(), s.continuous(f)};
        }
    }
    return {};
}

/// Batch evaluation; reuses the general-branch setup across frequencies.
inline std::vector<PhasorPsdValue> phasor_psd(const OscillatorParams& p,
                                              const std::vector<double>& freqs) {
    std::vector<PhasorPsdValue> out;
    out.reserve(freqs.size());
    if (phasor_branch(p) != PhasorBranch::general) {
        for (double f : freqs) out.push_back(phasor_psd(p, f));
        return out;
    }
    detail::require_no_floor(p, "phasor_psd");
    detail::GeneralPhasorSpectrum s(p);
    for (double f : freqs) out.push_back({s.delta_weight(), s.continuous(f)});
    return out;
}

/// int_0^nu of the continuous part of phasor_psd (floor-free).
inline double phasor_psd_cumulative(const OscillatorParams& p, double nu) {
    detail::require_no_floor(p, "phasor_psd_cumulative");
    const double pi = std::numbers::pi;
    const double K = p.K();
    switch (phasor_branch(p)) {
        case PhasorBranch::free_running:
            return std::atan(nu / (pi * K)) / pi;
        case PhasorBranch::pll:
            return K / p.f3db() * std::atan(nu / p.f3db());
        case PhasorBranch::general:
            return detail::GeneralPhasorSpectrum(p).cumulative(nu);
    }
    return 0.0;
}

/// Phasor spectrum including a white floor of level linf^2 bandlimited to
/// b_theta:
///     (1 - linf^2 B) S_h(f) + linf^2 * int_{f-B/2}^{f+B/2} S_h
/// First-order in linf^2 B, so linf^2 * b_theta must stay below 0.1.
inline PhasorPsdValue phasor_psd_with_floor(const OscillatorParams& p, double f,
                                            double b_theta) {
    if (!(b_theta > 0.0) || !(b_theta < 1e10)) {
        throw validity_error("phasor_psd_with_floor: b_theta must lie in (0, 1e10) Hz");
    }
    const double lb = p.linf_sq() * b_theta;
    if (lb >= 0.1) {
        throw validity_error("phasor_psd_with_floor: linf_sq * b_theta = " + std::to_string(lb) +
                             " >= 0.1, first-order floor approximation invalid");
    }
    const OscillatorParams bare = p.with_linf_sq(0.0);
    if (p.linf_sq() == 0.0) return phasor_psd(bare, f);
    if (!std::isfinite(f)) throw domain_error("phasor_psd_with_floor: frequency must be finite");

    const double pi = std::numbers::pi;
    const double K = p.K();
    const double lo = f - 0.5 * b_theta;
    const double hi = f + 0.5 * b_theta;
    PhasorPsdValue base;
    double window = 0.0;
    switch (phasor_branch(bare)) {
        case PhasorBranch::free_running:
            base = phasor_psd(bare, f);
            window = (std::atan(hi / (pi * K)) - std::atan(lo / (pi * K))) / pi;
            break;
        case PhasorBranch::pll:
            base = phasor_psd(bare, f);
            window = K / p.f3db() * (std::atan(hi / p.f3db()) - std::atan(lo / p.f3db()));
            break;
        case PhasorBranch::general: {
            detail::GeneralPhasorSpectrum s(bare);
            base = {s.delta_weight(), s.continuous(f)};
            window = s.cumulative(hi) - s.cumulative(lo);
            break;
        }
    }
    if (lo < 0.0 && hi > 0.0) window += base.delta_weight;
    return {(1.0 - lb) * base.delta_weight, (1.0 - lb) * base.continuous + p.linf_sq() * window};
}

/// In-band shortcut S_h(f) + linf^2, valid for |f| well inside b_theta/2.
inline PhasorPsdValue phasor_psd_inband(const OscillatorParams& p, double f) {
    PhasorPsdValue v = phasor_psd(p.with_linf_sq(0.0), f);
    v.continuous += p.linf_sq();
    return v;
}

/// Sum of independent Lorentzian processes.
class CompositeModel {
public:
    explicit CompositeModel(std::vector<OscillatorParams> processes)
        : processes_(std::move(processes)) {
        if (processes_.empty()) throw std::invalid_argument("CompositeModel: no processes");
    }
    const std::vector<OscillatorParams>& processes() const { return processes_; }
    std::size_t size() const { return processes_.size(); }

private:
    std::vector<OscillatorParams> processes_;
};

inline double composite_psd(const CompositeModel& m, double f) {
    double s = 0.0;
    for (const auto& p : m.processes()) s += pn_psd(p, f);
    return s;
}

/// Multi-pole/zero spectrum
///     PSD0 * prod(1 + (f/fz)^az) / prod(1 + (f/fp)^ap)
struct ThreeGppParams {
    struct Corner {
        double freq;
        double exponent;
    };
    double psd0 = 1.0;
    std::vector<Corner> zeros;
    std::vector<Corner> poles;

    void validate() const {
        if (!(psd0 > 0.0)) throw std::invalid_argument("ThreeGppParams: psd0 must be > 0");
        if (zeros.empty() || poles.empty()) {
            throw std::invalid_argument("ThreeGppParams: need at least one zero and one pole");
        }
        for (const auto* list : {&zeros, &poles}) {
            for (const auto& c : *list) {
                if (!(c.freq > 0.0) || !std::isfinite(c.exponent)) {
                    throw std::invalid_argument("ThreeGppParams: corner frequencies must be > 0");
                }
            }
        }
    }

    /// 45 GHz carrier parameter set.
    static ThreeGppParams carrier_45ghz() {
        return {3675.0,
                {{3e3, 2.37}, {451e3, 2.7}, {458e6, 2.53}},
                {{1.0, 3.3}, {1.54e6, 3.3}, {30e6, 1.0}}};
    }
};

inline double threegpp_psd(const ThreeGppParams& p, double f) {
    if (!(f > 0.0)) throw domain_error("threegpp_psd: frequency must be > 0");
    p.validate();
    // Accumulate in the log domain: individual factors overflow for the
    // steep poles well before the ratio does.
    double log_s = std::log(p.psd0);
    for (const auto& z : p.zeros) log_s += std::log1p(std::pow(f / z.freq, z.exponent));
    for (const auto& q : p.poles) log_s -= std::log1p(std::pow(f / q.freq, q.exponent));
    return std::exp(log_s);
}

/// Two-process approximation of the 45 GHz curve (low- and high-frequency
/// dominated parts).
inline CompositeModel threegpp_two_process_reference() {
    return CompositeModel({OscillatorParams::from_db(7e2, -105.0, -200.0),
                           OscillatorParams::from_db(2e6, -65.0, -140.0)});
}

}  // namespace pnoise
