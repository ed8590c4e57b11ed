#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pnoise::linksim {

struct SirEstimate {
    double sir_db = 0.0;
    double se_db = 0.0;     // batch-means standard error
    std::complex<double> gain;  // fitted common gain
    double signal_power = 0.0;
    double interference_power = 0.0;
    bool capped = false;
};

inline constexpr double sir_cap_db = 80.0;
inline constexpr std::size_t sir_min_symbols = 10000;

/// Fits y = g d + e with one complex gain g = sum(y d*) / sum|d|^2 and
/// reports |g|^2 mean|d|^2 over the residual power minus the known AWGN
/// variance. `ref` is what the receiver treats as wanted: the transmitted
/// symbols, or those symbols times the per-symbol direct gain of the
/// channel. The SE comes from 20 equal batches, propagated to dB.
inline SirEstimate measure_sir(const std::vector<std::complex<double>>& ref,
                               const std::vector<std::complex<double>>& rx, double noise_var = 0.0) {
    if (ref.size() != rx.size()) throw std::invalid_argument("measure_sir: size mismatch");
    if (ref.size() < sir_min_symbols) {
        throw std::invalid_argument("measure_sir: need at least 10000 symbols, got " +
                                    std::to_string(ref.size()));
    }
    const std::size_t n = ref.size();
    std::complex<double> num = 0.0;
    double den = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        num += rx[k] * std::conj(ref[k]);
        den += std::norm(ref[k]);
    }
    if (!(den > 0.0)) throw std::invalid_argument("measure_sir: reference has zero power");
    SirEstimate e;
    e.gain = num / den;
    e.signal_power = std::norm(e.gain) * den / static_cast<double>(n);

    constexpr std::size_t batches = 20;
    const std::size_t per = n / batches;
    std::vector<double> bpow(batches, 0.0);
    double total = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double r = std::norm(rx[k] - e.gain * ref[k]);
        total += r;
        const std::size_t b = k / per;
        if (b < batches) bpow[b] += r / static_cast<double>(per);
    }
    e.interference_power = total / static_cast<double>(n) - noise_var;

    const double floor = e.signal_power * std::pow(10.0, -sir_cap_db / 10.0);
    if (e.interference_power <= floor) {
        e.capped = true;
        e.sir_db = sir_cap_db;
        e.se_db = 0.0;
        return e;
    }
    e.sir_db = 10.0 * std::log10(e.signal_power / e.interference_power);
    double m = 0.0;
    for (double v : bpow) m += v / batches;
    double var = 0.0;
    for (double v : bpow) var += (v - m) * (v - m) / (batches - 1);
    e.se_db = 10.0 / std::log(10.0) * std::sqrt(var / batches) / e.interference_power;
    return e;
}

}  // namespace pnoise::linksim
