#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace pnoise::linksim {

/// Frame layout: a pilot field of pilot_len symbols, then pilot_period data
/// symbols, repeated from symbol 0.
struct PilotLayout {
    std::size_t pilot_len = 36;
    std::size_t pilot_period = 1476;

    void validate() const {
        if (pilot_len == 0 || pilot_len >= pilot_period) {
            throw std::invalid_argument("PilotLayout: need 0 < pilot_len < pilot_period");
        }
    }
    std::size_t frame() const { return pilot_len + pilot_period; }
    bool is_pilot(std::size_t k) const { return k % frame() < pilot_len; }

    /// Start indices of the complete pilot fields within n symbols.
    std::vector<std::size_t> field_starts(std::size_t n) const {
        std::vector<std::size_t> out;
        for (std::size_t s = 0; s + pilot_len <= n; s += frame()) out.push_back(s);
        return out;
    }
};

struct TrackingResult {
    std::vector<std::complex<double>> corrected;
    std::vector<double> phase;            // applied estimate, per symbol
    std::vector<double> field_centres;
    std::vector<double> field_estimates;  // unwrapped
    bool unwrap_flagged = false;          // some field-to-field step exceeded pi/2
};

/// Per-field ML phase arg(sum y x*), unwrapped to the nearest 2 pi multiple
/// of the previous field and linearly interpolated between field centres.
/// Outside the first/last centre the end segment's line is extended; with a
/// single field the estimate is held.
inline TrackingResult pilot_phase_track(const std::vector<std::complex<double>>& rx,
                                        const std::vector<std::complex<double>>& reference,
                                        const PilotLayout& layout) {
    layout.validate();
    if (rx.size() != reference.size()) {
        throw std::invalid_argument("pilot_phase_track: rx and reference sizes differ");
    }
    const std::size_t n = rx.size();
    const auto starts = layout.field_starts(n);
    if (starts.empty()) throw std::invalid_argument("pilot_phase_track: no complete pilot field");

    const double two_pi = 2.0 * std::numbers::pi;
    TrackingResult tr;
    for (std::size_t s : starts) {
        std::complex<double> acc = 0.0;
        for (std::size_t k = s; k < s + layout.pilot_len; ++k) acc += rx[k] * std::conj(reference[k]);
        double phi = std::arg(acc);
        if (!tr.field_estimates.empty()) {
            const double prev = tr.field_estimates.back();
            phi += two_pi * std::round((prev - phi) / two_pi);
            if (std::abs(phi - prev) > std::numbers::pi / 2.0) tr.unwrap_flagged = true;
        }
        tr.field_estimates.push_back(phi);
        tr.field_centres.push_back(static_cast<double>(s) + 0.5 * static_cast<double>(layout.pilot_len - 1));
    }

    tr.phase.resize(n);
    tr.corrected.resize(n);
    std::size_t f = 0;
    const std::size_t nf = tr.field_centres.size();
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k);
        while (f + 1 < nf && tr.field_centres[f + 1] <= t) ++f;
        double phi;
        if (nf == 1) {
            phi = tr.field_estimates.front();
        } else {
            const std::size_t i = std::min(f, nf - 2);
            const double w = (t - tr.field_centres[i]) / (tr.field_centres[i + 1] - tr.field_centres[i]);
            phi = (1.0 - w) * tr.field_estimates[i] + w * tr.field_estimates[i + 1];
        }
        tr.phase[k] = phi;
        tr.corrected[k] = rx[k] * std::polar(1.0, -phi);
    }
    return tr;
}

}  // namespace pnoise::linksim
