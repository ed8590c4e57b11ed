#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "pnoise/db.hpp"
#include "pnoise/error.hpp"
#include "pnoise/psd_models.hpp"

namespace pnoise {

struct PsdPoint {
    double freq_hz;
    double level_db;
};

struct FitResult {
    std::vector<OscillatorParams> params;
    double residual_rms_db = std::numeric_limits<double>::infinity();
    int iterations = 0;  // objective evaluations, all stages
    bool converged = false;
    // Some fitted corner sits below the lowest supplied frequency: the data
    // cannot tell that process from a free-running one.
    bool free_running_like = false;
    std::vector<double> stage_residuals;
};

struct FitOptions {
    int max_evaluations = 20000;
    double rel_tol = 1e-6;
    double abs_tol = 1e-9;  // dB; lets exact fits terminate
    int max_restarts = 6;
    double f_ref = 1e5;
};

namespace detail {

struct NelderMeadResult {
    std::vector<double> x;
    double fx = 0.0;
    int evaluations = 0;
    bool converged = false;
};

/// Nelder & Mead (1965) with the standard coefficients (reflection 1,
/// expansion 2, contraction 1/2, shrink 1/2). Stops when the spread of
/// simplex values is within rel_tol*|f_best| + abs_tol and the simplex has
/// shrunk to 1e-6 of its initial size. Converged runs are
/// restarted from the best vertex with a fresh simplex until a restart no
/// longer improves the value beyond tolerance.
template <class F>
NelderMeadResult nelder_mead(F&& f, std::vector<double> x0, const std::vector<double>& step,
                             int max_evals, double rel_tol, double abs_tol, int max_restarts) {
    const std::size_t n = x0.size();
    NelderMeadResult best{x0, f(x0), 1, false};
    auto eval = [&](const std::vector<double>& x) {
        ++best.evaluations;
        return f(x);
    };

    for (int restart = 0; restart <= max_restarts; ++restart) {
        const double start_value = best.fx;
        std::vector<std::vector<double>> s(n + 1, best.x);
        std::vector<double> fv(n + 1, best.fx);
        for (std::size_t i = 0; i < n; ++i) {
            s[i + 1][i] += step[i];
            fv[i + 1] = eval(s[i + 1]);
        }
        bool local_converged = false;
        std::vector<std::size_t> order(n + 1);
        std::vector<double> centroid(n);
        std::vector<double> xr(n);
        std::vector<double> xe(n);
        std::vector<double> xc(n);
        while (best.evaluations < max_evals) {
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
            const std::size_t lo = order.front();
            const std::size_t hi = order.back();
            const std::size_t nh = order[n - 1];
            double diameter = 0.0;
            for (std::size_t i = 0; i <= n; ++i) {
                for (std::size_t j = 0; j < n; ++j) {
                    diameter = std::max(diameter, std::abs(s[i][j] - s[lo][j]) / step[j]);
                }
            }
            // A flat spread alone also happens on a simplex stretched along a
            // valley, so the simplex must have shrunk as well.
            if (std::abs(fv[hi] - fv[lo]) <= rel_tol * std::abs(fv[lo]) + abs_tol &&
                diameter <= 1e-6) {
                local_converged = true;
                break;
            }
            std::fill(centroid.begin(), centroid.end(), 0.0);
            for (std::size_t i = 0; i <= n; ++i) {
                if (i == hi) continue;
                for (std::size_t j = 0; j < n; ++j) centroid[j] += s[i][j] / static_cast<double>(n);
            }
            for (std::size_t j = 0; j < n; ++j) xr[j] = centroid[j] + (centroid[j] - s[hi][j]);
            const double fr = eval(xr);
            if (fr < fv[lo]) {
                for (std::size_t j = 0; j < n; ++j) xe[j] = centroid[j] + 2.0 * (centroid[j] - s[hi][j]);
                const double fe = eval(xe);
                if (fe < fr) {
                    s[hi] = xe;
                    fv[hi] = fe;
                } else {
                    s[hi] = xr;
                    fv[hi] = fr;
                }
                continue;
            }
            if (fr < fv[nh]) {
                s[hi] = xr;
                fv[hi] = fr;
                continue;
            }
            // contraction, outside if the reflection helped at all
            const bool outside = fr < fv[hi];
            const auto& ref = outside ? xr : s[hi];
            for (std::size_t j = 0; j < n; ++j) xc[j] = centroid[j] + 0.5 * (ref[j] - centroid[j]);
            const double fc = eval(xc);
            if (fc < (outside ? fr : fv[hi])) {
                s[hi] = xc;
                fv[hi] = fc;
                continue;
            }
            for (std::size_t i = 0; i <= n; ++i) {
                if (i == lo) continue;
                for (std::size_t j = 0; j < n; ++j) s[i][j] = s[lo][j] + 0.5 * (s[i][j] - s[lo][j]);
                fv[i] = eval(s[i]);
            }
        }
        const auto it = std::min_element(fv.begin(), fv.end());
        if (*it < best.fx) {
            best.fx = *it;
            best.x = s[static_cast<std::size_t>(it - fv.begin())];
        }
        best.converged = local_converged;
        if (!local_converged) break;
        if (restart > 0 && start_value - best.fx <= rel_tol * std::abs(best.fx) + abs_tol) break;
    }
    return best;
}

// Per-process parameter vector: (log10 f3db, l100 dB, linf dB).
inline constexpr double min_log_f3db = -6.0;
inline constexpr double max_log_f3db = 12.0;
inline constexpr double min_linf_db = -400.0;

inline double process_level(const double* x, double f, double f_ref) {
    const double f3 = std::pow(10.0, std::clamp(x[0], min_log_f3db, max_log_f3db));
    const double linf = std::pow(10.0, std::max(x[2], min_linf_db) / 10.0);
    return f_ref * f_ref * std::pow(10.0, x[1] / 10.0) / (f3 * f3 + f * f) + linf;
}

inline double rms_db(const std::vector<double>& x, const std::vector<PsdPoint>& pts, double f_ref) {
    double acc = 0.0;
    const std::size_t k = x.size() / 3;
    for (const auto& p : pts) {
        double s = 0.0;
        for (std::size_t i = 0; i < k; ++i) s += process_level(&x[3 * i], p.freq_hz, f_ref);
        const double d = 10.0 * std::log10(s) - p.level_db;
        acc += d * d;
    }
    const double r = std::sqrt(acc / static_cast<double>(pts.size()));
    return std::isfinite(r) ? r : std::numeric_limits<double>::max();
}

inline std::vector<OscillatorParams> to_params(const std::vector<double>& x, double f_ref) {
    std::vector<OscillatorParams> out;
    for (std::size_t i = 0; i + 2 < x.size(); i += 3) {
        const double f3 = std::pow(10.0, std::clamp(x[i], min_log_f3db, max_log_f3db));
        const double linf_db = std::max(x[i + 2], min_linf_db);
        out.push_back(OscillatorParams(f3, undb(x[i + 1]), undb(linf_db), f_ref));
    }
    return out;
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

inline void check_points(const std::vector<PsdPoint>& pts) {
    if (pts.size() < 4) throw std::invalid_argument("fit: need at least 4 points");
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!(pts[i].freq_hz > 0.0) || !std::isfinite(pts[i].level_db)) {
            throw std::invalid_argument("fit: frequencies must be > 0 and levels finite");
        }
        if (i > 0 && !(pts[i].freq_hz > pts[i - 1].freq_hz)) {
            throw std::invalid_argument("fit: frequencies must be strictly increasing");
        }
    }
    if (pts.back().freq_hz / pts.front().freq_hz < 100.0) {
        throw std::invalid_argument("fit: points must span at least two decades");
    }
}

}  // namespace detail

/// Deterministic starting point (log10 f3db, l100 dB, linf dB) read off the
/// point shape: local slopes between -25 and -15 dB/decade mark the
/// Lorentzian skirt, |slope| < 5 dB/decade the plateaus on either side.
inline std::vector<double> fit_initial_guess(const std::vector<PsdPoint>& pts, double f_ref = 1e5) {
    detail::check_points(pts);
    const std::size_t n = pts.size();
    std::vector<double> slope(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        slope[i] = (pts[i + 1].level_db - pts[i].level_db) /
                   (std::log10(pts[i + 1].freq_hz) - std::log10(pts[i].freq_hz));
    }
    std::vector<std::size_t> skirt;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (slope[i] >= -25.0 && slope[i] <= -15.0) skirt.push_back(i);
    }
    if (skirt.empty()) {
        // fall back to the segment closest to -20 dB/decade
        std::size_t b = 0;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (std::abs(slope[i] + 20.0) < std::abs(slope[b] + 20.0)) b = i;
        }
        skirt.push_back(b);
    }
    // point on the skirt nearest f_ref (log distance), projected to f_ref
    std::size_t ref = skirt.front();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i : skirt) {
        for (std::size_t j : {i, i + 1}) {
            const double d = std::abs(std::log10(pts[j].freq_hz / f_ref));
            if (d < best) {
                best = d;
                ref = j;
            }
        }
    }
    const double l100_db = pts[ref].level_db + 20.0 * std::log10(pts[ref].freq_hz / f_ref);

    std::vector<double> low;
    std::vector<double> high;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(slope[i]) >= 5.0) continue;
        if (i < skirt.front()) {
            low.push_back(pts[i].level_db);
            low.push_back(pts[i + 1].level_db);
        } else if (i > skirt.back()) {
            high.push_back(pts[i].level_db);
            high.push_back(pts[i + 1].level_db);
        }
    }
    double log_f3 = std::log10(pts.front().freq_hz) - 1.0;
    if (!low.empty()) {
        const double l0_db = detail::median(low);
        // K / f3db^2 = l0^2  =>  f3db = f_ref * 10^((l100 - l0)/20)
        log_f3 = std::log10(f_ref) + (l100_db - l0_db) / 20.0;
    }
    double linf_db = std::min_element(pts.begin(), pts.end(), [](auto& a, auto& b) {
                         return a.level_db < b.level_db;
                     })->level_db - 30.0;
    if (!high.empty()) linf_db = detail::median(high);
    return {std::clamp(log_f3, detail::min_log_f3db, detail::max_log_f3db), l100_db,
            std::max(linf_db, detail::min_linf_db)};
}

namespace detail {

inline FitResult finish(const std::vector<double>& x, const std::vector<PsdPoint>& pts,
                        const FitOptions& opt, int evals, bool converged) {
    FitResult r;
    r.params = to_params(x, opt.f_ref);
    r.residual_rms_db = rms_db(x, pts, opt.f_ref);
    r.iterations = evals;
    r.converged = converged && std::isfinite(r.residual_rms_db);
    for (const auto& p : r.params) {
        if (p.f3db() < pts.front().freq_hz) r.free_running_like = true;
    }
    return r;
}

inline NelderMeadResult minimize(const std::vector<double>& x0, const std::vector<PsdPoint>& pts,
                                 const FitOptions& opt, int budget) {
    std::vector<double> step;
    for (std::size_t i = 0; i < x0.size(); i += 3) {
        step.insert(step.end(), {0.5, 3.0, 3.0});
    }
    return nelder_mead([&](const std::vector<double>& x) { return rms_db(x, pts, opt.f_ref); },
                       x0, step, budget, opt.rel_tol, opt.abs_tol, opt.max_restarts);
}

/// Starting vectors (x plus one process) from a scan over the new corner,
/// one decade apart, with the level set to meet the residual at one of the
/// points. Returns the `keep` best by joint residual.
inline std::vector<std::vector<double>> scan_new_process(const std::vector<double>& x,
                                                         const std::vector<PsdPoint>& pts,
                                                         const std::vector<PsdPoint>& resid,
                                                         double f_ref, std::size_t keep = 3) {
    const double lo = std::floor(std::log10(pts.front().freq_hz)) - 2.0;
    const double hi = std::ceil(std::log10(pts.back().freq_hz));
    const double floor_db = std::min_element(pts.begin(), pts.end(), [](auto& a, auto& b) {
                                return a.level_db < b.level_db;
                            })->level_db - 30.0;
    const std::size_t stride = std::max<std::size_t>(1, resid.size() / 16);
    std::vector<std::pair<double, std::vector<double>>> cand;
    for (double lf = std::max(lo, min_log_f3db); lf <= std::min(hi, max_log_f3db); lf += 1.0) {
        const double f3 = std::pow(10.0, lf);
        for (std::size_t j = 0; j < resid.size(); j += stride) {
            const double f = resid[j].freq_hz;
            // K / (f3^2 + f^2) = residual level at f
            const double l100 = resid[j].level_db + db((f3 * f3 + f * f) / (f_ref * f_ref));
            std::vector<double> v = x;
            v.insert(v.end(), {lf, l100, floor_db});
            cand.emplace_back(rms_db(v, pts, f_ref), std::move(v));
        }
    }
    std::stable_sort(cand.begin(), cand.end(), [](auto& a, auto& b) { return a.first < b.first; });
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < cand.size() && out.size() < keep; ++i) out.push_back(cand[i].second);
    return out;
}

}  // namespace detail

/// Least-squares fit (in dB) of one Lorentzian process with floor.
inline FitResult fit_single(const std::vector<PsdPoint>& pts, const FitOptions& opt = {}) {
    const std::vector<double> x0 = fit_initial_guess(pts, opt.f_ref);
    const auto nm = detail::minimize(x0, pts, opt, opt.max_evaluations);
    FitResult r = detail::finish(nm.x, pts, opt, nm.evaluations, nm.converged);
    r.stage_residuals = {r.residual_rms_db};
    return r;
}

/// k-process composite fit: greedy stages, each fitting one process to what
/// the previous ones leave unexplained, followed by a joint refinement of
/// all parameters so far. A stage whose refinement ends worse than the
/// previous stage keeps the previous parameters (the new process is parked
/// at a negligible level), so stage residuals never grow.
inline FitResult fit_composite(const std::vector<PsdPoint>& pts, int k,
                               const FitOptions& opt = {}) {
    if (k < 1 || k > 4) throw std::invalid_argument("fit_composite: k must be in 1..4");
    if (k == 1) return fit_single(pts, opt);
    detail::check_points(pts);

    const int stage_budget = opt.max_evaluations / (2 * k);
    int evals = 0;
    bool converged = true;
    std::vector<double> x;
    std::vector<double> stages;
    for (int s = 0; s < k; ++s) {
        std::vector<PsdPoint> resid = pts;
        if (s > 0) {
            for (auto& p : resid) {
                double model = 0.0;
                for (std::size_t i = 0; i < x.size(); i += 3) {
                    model += detail::process_level(&x[i], p.freq_hz, opt.f_ref);
                }
                const double target = undb(p.level_db);
                p.level_db = db(std::max(target - model, 0.1 * target));
            }
        }
        const auto single = detail::minimize(fit_initial_guess(resid, opt.f_ref), resid, opt,
                                             stage_budget / 2);
        evals += single.evaluations;

        // Joint refinement from the residual fit and from the best few
        // corners of a coarse scan; the greedy start alone often lands in a
        // local minimum when one process has to bridge a steeper slope.
        std::vector<std::vector<double>> starts;
        {
            std::vector<double> with_new = x;
            with_new.insert(with_new.end(), single.x.begin(), single.x.end());
            starts.push_back(with_new);
        }
        const auto scan = detail::scan_new_process(x, pts, resid, opt.f_ref);
        starts.insert(starts.end(), scan.begin(), scan.end());
        detail::NelderMeadResult joint;
        joint.fx = std::numeric_limits<double>::infinity();
        const int per_start = (stage_budget + stage_budget / 2) / static_cast<int>(starts.size());
        for (const auto& x0 : starts) {
            const auto j = detail::minimize(x0, pts, opt, per_start);
            evals += j.evaluations;
            if (j.fx < joint.fx) joint = j;
        }
        converged = converged && joint.converged;
        if (s > 0 && joint.fx > stages.back()) {
            // the added process only hurts: keep the previous stage, new one inert
            x.insert(x.end(), {single.x[0], -400.0, detail::min_linf_db});
            stages.push_back(stages.back());
            continue;
        }
        x = joint.x;
        stages.push_back(joint.fx);
    }
    FitResult r = detail::finish(x, pts, opt, evals, converged);
    std::sort(r.params.begin(), r.params.end(),
              [](const auto& a, const auto& b) { return a.f3db() < b.f3db(); });
    r.stage_residuals = stages;
    return r;
}

}  // namespace pnoise
