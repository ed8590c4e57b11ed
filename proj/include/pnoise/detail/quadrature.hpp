#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "pnoise/error.hpp"

namespace pnoise::detail {

struct QuadResult {
    double value = 0.0;
    double abs_error = 0.0;
    int evaluations = 0;
    int intervals = 0;
    bool converged = false;
};

namespace gk {

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1].
inline constexpr std::array<double, 8> xk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> wk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> wg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

}  // namespace gk

struct Panel {
    double a = 0.0;
    double b = 0.0;
    double value = 0.0;
    double error = 0.0;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double kron = fc * gk::wk[7];
    double gauss = fc * gk::wg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * gk::xk[j];
        const double s = f(c - dx) + f(c + dx);
        kron += gk::wk[j] * s;
        if (j % 2 == 1) gauss += gk::wg[j / 2] * s;
    }
    return Panel{a, b, kron * h, std::abs((kron - gauss) * h)};
}

/// Globally adaptive Gauss-Kronrod integration over [breaks.front(),
/// breaks.back()]. The initial subdivision is given by `breaks` (useful for
/// oscillatory integrands: one break per half period). The panel with the
/// largest error estimate is bisected until the summed error drops below
/// max(abs_tol, rel_tol*|I|) or `max_intervals` is reached.
template <class F>
QuadResult integrate(F&& f, const std::vector<double>& breaks, double abs_tol, double rel_tol,
                     int max_intervals = 20000) {
    if (breaks.size() < 2) throw std::invalid_argument("integrate: need at least two breakpoints");
    std::priority_queue<Panel> heap;
    double total = 0.0;
    double err = 0.0;
    QuadResult res;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
        Panel p = gk15(f, breaks[i], breaks[i + 1]);
        res.evaluations += 15;
        total += p.value;
        err += p.error;
        heap.push(p);
    }
    const double eps = std::numeric_limits<double>::epsilon();
    while (err > std::max(abs_tol, rel_tol * std::abs(total)) &&
           static_cast<int>(heap.size()) < max_intervals) {
        Panel worst = heap.top();
        // Roundoff floor: nothing left to gain by splitting.
        if (worst.error <= 50.0 * eps * std::abs(worst.value) ||
            worst.b - worst.a <= 1e3 * eps * std::max(std::abs(worst.a), std::abs(worst.b))) {
            break;
        }
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        Panel l = gk15(f, worst.a, mid);
        Panel r = gk15(f, mid, worst.b);
        res.evaluations += 30;
        total += l.value + r.value - worst.value;
        err += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
    }
    // Re-sum to shed the drift of incremental updates.
    total = 0.0;
    err = 0.0;
    res.intervals = static_cast<int>(heap.size());
    std::vector<Panel> all;
    all.reserve(heap.size());
    while (!heap.empty()) {
        all.push_back(heap.top());
        heap.pop();
    }
    std::sort(all.begin(), all.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
    double l1 = 0.0;
    for (const auto& p : all) {
        total += p.value;
        err += p.error;
        l1 += std::abs(p.value);
    }
    res.value = total;
    res.abs_error = err;
    res.converged = err <= std::max(abs_tol, rel_tol * std::abs(total)) ||
                    err <= 100.0 * eps * static_cast<double>(all.size()) * l1;
    return res;
}

template <class F>
QuadResult integrate(F&& f, double a, double b, double abs_tol, double rel_tol,
                     int max_intervals = 20000) {
    return integrate(std::forward<F>(f), std::vector<double>{a, b}, abs_tol, rel_tol,
                     max_intervals);
}

/// Evenly spaced breakpoints on [a, b] with spacing at most `width`.
inline std::vector<double> panel_breaks(double a, double b, double width,
                                        std::size_t max_panels = 200000) {
    std::size_t n = 1;
    if (width > 0.0 && std::isfinite(width)) {
        const double want = std::ceil((b - a) / width);
        n = static_cast<std::size_t>(std::clamp(want, 1.0, static_cast<double>(max_panels)));
    }
    std::vector<double> out(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n);
    }
    out.back() = b;
    return out;
}

inline void require_converged(const QuadResult& r, const std::string& what) {
    if (!r.converged || !std::isfinite(r.value)) {
        throw numeric_error(what + ": quadrature did not converge (value=" +
                            std::to_string(r.value) + ", error=" + std::to_string(r.abs_error) +
                            ", intervals=" + std::to_string(r.intervals) +
                            ", evaluations=" + std::to_string(r.evaluations) + ")");
    }
}

}  // namespace pnoise::detail
