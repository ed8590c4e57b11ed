#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "pnoise/db.hpp"
#include "pnoise/detail/fft.hpp"
#include "pnoise/error.hpp"

namespace pnoise {

enum class Window { hann, hamming, rectangular };

inline const char* window_name(Window w) {
    switch (w) {
        case Window::hann: return "hann";
        case Window::hamming: return "hamming";
        case Window::rectangular: return "rectangular";
    }
    return "?";
}

/// One-sided spectrum on [0, fs/2], scaled so that sum(psd) * resolution
/// equals the (per-segment demeaned) variance of the input.
struct PsdEstimate {
    std::vector<double> freqs;
    std::vector<double> psd;
    std::size_t n_segments = 0;
    std::size_t segment_len = 0;
    Window window = Window::hann;
    double resolution = 0.0;
    double fs = 0.0;
    // Segment means wander far more than the within-segment spread; typical
    // of random walks and of AR streams whose correlation time exceeds the
    // segment length.
    bool nonstationary = false;
};

// The models are double-sided; estimates are one-sided. These two are the
// only places the factor of two is applied.
inline double one_sided(double two_sided_level) { return 2.0 * two_sided_level; }
inline double two_sided(double one_sided_level) { return 0.5 * one_sided_level; }

inline std::vector<double> make_window(Window w, std::size_t n) {
    std::vector<double> out(n, 1.0);
    const double two_pi = 2.0 * std::numbers::pi;
    for (std::size_t i = 0; i < n; ++i) {
        // periodic form: the natural choice for spectral averaging
        const double ph = two_pi * static_cast<double>(i) / static_cast<double>(n);
        if (w == Window::hann) out[i] = 0.5 - 0.5 * std::cos(ph);
        if (w == Window::hamming) out[i] = 0.54 - 0.46 * std::cos(ph);
    }
    return out;
}

inline PsdEstimate welch_psd(const std::vector<double>& x, double fs,
                             std::size_t segment_len = 1u << 14, double overlap = 0.5,
                             Window window = Window::hann) {
    if (!(fs > 0.0)) throw std::invalid_argument("welch_psd: fs must be > 0");
    if (segment_len < 8 || (segment_len & (segment_len - 1)) != 0) {
        throw std::invalid_argument("welch_psd: segment_len must be a power of two >= 8");
    }
    if (x.size() < 4 * segment_len) {
        throw std::invalid_argument("welch_psd: need at least 4 segments of data (" +
                                    std::to_string(4 * segment_len) + " samples), got " +
                                    std::to_string(x.size()));
    }
    if (!(overlap >= 0.0 && overlap < 1.0)) {
        throw std::invalid_argument("welch_psd: overlap must lie in [0, 1)");
    }
    const std::size_t n = segment_len;
    const std::size_t hop = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(static_cast<double>(n) * (1.0 - overlap))));
    const std::vector<double> w = make_window(window, n);
    double wpow = 0.0;
    for (double v : w) wpow += v * v;

    detail::RealFft fft(n);
    std::vector<double> acc(n / 2 + 1, 0.0);
    std::vector<double> pw;
    std::vector<double> means;
    double within_sd = 0.0;
    std::size_t segs = 0;
    for (std::size_t start = 0; start + n <= x.size(); start += hop) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += x[start + i];
        mean /= static_cast<double>(n);
        double var = 0.0;
        double* in = fft.input();
        for (std::size_t i = 0; i < n; ++i) {
            const double d = x[start + i] - mean;
            var += d * d;
            in[i] = d * w[i];
        }
        fft.power(pw);
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += pw[k];
        means.push_back(mean);
        within_sd += std::sqrt(var / static_cast<double>(n));
        ++segs;
    }

    PsdEstimate est;
    est.n_segments = segs;
    est.segment_len = n;
    est.window = window;
    est.fs = fs;
    est.resolution = fs / static_cast<double>(n);
    est.freqs.resize(acc.size());
    est.psd.resize(acc.size());
    const double scale = 1.0 / (fs * wpow * static_cast<double>(segs));
    for (std::size_t k = 0; k < acc.size(); ++k) {
        est.freqs[k] = est.resolution * static_cast<double>(k);
        const bool edge = k == 0 || k == n / 2;
        est.psd[k] = (edge ? 1.0 : 2.0) * acc[k] * scale;
    }
    const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
    within_sd /= static_cast<double>(segs);
    est.nonstationary = (*hi - *lo) > 4.0 * within_sd;
    return est;
}

/// First differences; the stationary view of a random walk.
inline std::vector<double> increments(const std::vector<double>& x) {
    std::vector<double> d(x.size() > 0 ? x.size() - 1 : 0);
    for (std::size_t i = 0; i + 1 < x.size(); ++i) d[i] = x[i + 1] - x[i];
    return d;
}

struct PsdComparisonRow {
    double freq;
    double est_db;
    double model_db;
    double dev_db;
};

struct PsdComparison {
    double max_abs_dev_db = 0.0;
    double rms_dev_db = 0.0;
    double mean_dev_db = 0.0;
    std::vector<PsdComparisonRow> rows;
};

/// Per-bin dB deviation of an estimate from a model over [fmin, fmax].
/// `model` returns the double-sided level; it is converted to one-sided here.
inline PsdComparison compare_psd(const PsdEstimate& est,
                                 const std::function<double(double)>& model, double fmin,
                                 double fmax) {
    if (!(fmin <= fmax)) throw std::invalid_argument("compare_psd: fmin > fmax");
    if (!est.freqs.empty() && (fmin < est.freqs.front() || fmax > est.freqs.back())) {
        throw std::invalid_argument("compare_psd: band outside the estimate support");
    }
    PsdComparison c;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t k = 0; k < est.freqs.size(); ++k) {
        const double f = est.freqs[k];
        if (f < fmin || f > fmax) continue;
        const double e = db(est.psd[k]);
        const double m = db(one_sided(model(f)));
        const double d = e - m;
        c.rows.push_back({f, e, m, d});
        c.max_abs_dev_db = std::max(c.max_abs_dev_db, std::abs(d));
        sum += d;
        sum_sq += d * d;
    }
    if (c.rows.empty()) throw std::invalid_argument("compare_psd: no bins in band");
    const double n = static_cast<double>(c.rows.size());
    c.mean_dev_db = sum / n;
    c.rms_dev_db = std::sqrt(sum_sq / n);
    return c;
}

/// Averages the linear estimate over log-spaced frequency cells, starting at
/// `fmin`. Cells with no bins are skipped. Returns (centre frequency, level)
/// with the centre taken as the geometric mean of member bins.
inline PsdEstimate log_average(const PsdEstimate& est, double fmin, std::size_t per_decade) {
    if (!(fmin > 0.0) || per_decade == 0) {
        throw std::invalid_argument("log_average: need fmin > 0 and per_decade >= 1");
    }
    PsdEstimate out = est;
    out.freqs.clear();
    out.psd.clear();
    const double step = 1.0 / static_cast<double>(per_decade);
    std::size_t k = 0;
    while (k < est.freqs.size() && est.freqs[k] < fmin) ++k;
    double edge = std::log10(fmin);
    while (k < est.freqs.size()) {
        edge += step;
        const double upper = std::pow(10.0, edge);
        double s = 0.0;
        double lf = 0.0;
        std::size_t cnt = 0;
        while (k < est.freqs.size() && est.freqs[k] < upper) {
            s += est.psd[k];
            lf += std::log(est.freqs[k]);
            ++cnt;
            ++k;
        }
        if (cnt == 0) continue;
        out.freqs.push_back(std::exp(lf / static_cast<double>(cnt)));
        out.psd.push_back(s / static_cast<double>(cnt));
    }
    return out;
}

}  // namespace pnoise
