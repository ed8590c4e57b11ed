#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <future>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "pnoise/detail/fft.hpp"
#include "pnoise/detail/rng.hpp"
#include "pnoise/error.hpp"
#include "pnoise/linksim/constellation.hpp"
#include "pnoise/linksim/rrc.hpp"
#include "pnoise/linksim/sir.hpp"
#include "pnoise/linksim/tracking.hpp"
#include "pnoise/psd_models.hpp"
#include "pnoise/timegen.hpp"

namespace pnoise::linksim {

enum class PnModel {
    none,
    ct_composite,  // processes sampled at ts/osf, applied before the matched filter
    dt_ar,         // z_k = x_k e^{j theta_k} + w_k, processes at ts (AR, or Wiener if f3db = 0)
    dt_wiener,     // as dt_ar with every process treated as free-running
};

inline const char* pn_model_name(PnModel m) {
    switch (m) {
        case PnModel::none: return "none";
        case PnModel::ct_composite: return "ct_composite";
        case PnModel::dt_ar: return "dt_ar";
        case PnModel::dt_wiener: return "dt_wiener";
    }
    return "?";
}

inline PnModel parse_pn_model(const std::string& s) {
    for (PnModel m : {PnModel::none, PnModel::ct_composite, PnModel::dt_ar, PnModel::dt_wiener}) {
        if (s == pn_model_name(m)) return m;
    }
    throw std::invalid_argument("unknown pn_model '" + s + "' (none, ct_composite, dt_ar, dt_wiener)");
}

/// What measure_sir treats as the wanted signal.
enum class SirReference {
    direct_gain,  // x_k g_{0,k}: everything else is interference
    symbols,      // x_k: power loss and common phase count as distortion
};

struct LinkConfig {
    Constellation constellation = Constellation::qpsk;
    double rolloff = 0.05;
    int span_symbols = 32;
    int osf = 5;
    std::size_t n_symbols = 100000;  // whole frame, pilots included
    double ts = 1e-7;
    PnModel pn_model = PnModel::none;
    std::vector<OscillatorParams> processes;
    std::optional<double> esn0_db;  // unset: no AWGN
    PilotLayout pilots;
    bool tracking = false;
    SirReference sir_reference = SirReference::direct_gain;
    std::uint64_t seed = 1;

    static constexpr std::size_t max_samples = std::size_t{1} << 25;

    void validate() const {
        if (!(rolloff >= 0.0 && rolloff <= 1.0)) throw std::invalid_argument("LinkConfig: rolloff must lie in [0, 1]");
        if (osf < 2) throw std::invalid_argument("LinkConfig: osf must be >= 2");
        if (span_symbols < 16 || span_symbols % 2) throw std::invalid_argument("LinkConfig: span must be even and >= 16");
        if (!(ts > 0.0)) throw std::invalid_argument("LinkConfig: ts must be > 0");
        if (n_symbols <= 2 * static_cast<std::size_t>(span_symbols)) {
            throw std::invalid_argument("LinkConfig: n_symbols must exceed twice the filter span");
        }
        if (continuous_time() && n_symbols * static_cast<std::size_t>(osf) > max_samples) {
            throw std::invalid_argument("LinkConfig: n_symbols*osf exceeds the per-run sample budget (" +
                                        std::to_string(max_samples) + "); split into chunks");
        }
        if (pn_model != PnModel::none && processes.empty()) {
            throw std::invalid_argument("LinkConfig: pn_model set but no processes given");
        }
        pilots.validate();
        if (tracking && n_symbols < pilots.pilot_len) throw std::invalid_argument("LinkConfig: frame shorter than a pilot field");
    }

    bool continuous_time() const { return pn_model == PnModel::none || pn_model == PnModel::ct_composite; }
    double noise_var() const { return esn0_db ? std::pow(10.0, -*esn0_db / 10.0) : 0.0; }
};

struct LinkStats {
    double sir_db = 0.0;
    double sir_se_db = 0.0;
    double evm_rms = 0.0;
    double ber = 0.0;
    double ber_se = 0.0;
    double ser = 0.0;
    std::uint64_t n_bits = 0;
    std::uint64_t n_errors = 0;
    std::uint64_t n_symbols = 0;  // data symbols that entered BER/SER
    std::uint64_t n_symbol_errors = 0;
    double power_loss = 0.0;  // mean |g_{0,k}|^2
    double residual_phase_rms = 0.0;
    bool unwrap_flagged = false;
    std::uint64_t n_measured = 0;  // symbols in the measurement window
};

/// Everything one run produced, for tests and diagnostics.
struct LinkTrace {
    std::vector<std::complex<double>> tx;
    std::vector<std::complex<double>> rx;            // matched-filter output (or DT channel output)
    std::vector<std::complex<double>> direct_gain;   // g_{0,k}
    std::vector<double> phase_estimate;              // empty without tracking
    std::vector<unsigned> tx_labels;
    std::size_t first = 0;  // measurement window [first, last)
    std::size_t last = 0;
    bool unwrap_flagged = false;
};

namespace detail {

inline constexpr std::uint64_t data_stream = 1;
inline constexpr std::uint64_t pilot_stream = 2;
inline constexpr std::uint64_t pn_stream = 3;
inline constexpr std::uint64_t noise_stream = 4;

inline CompositeModel pn_processes(const LinkConfig& cfg) {
    std::vector<OscillatorParams> ps = cfg.processes;
    if (cfg.pn_model == PnModel::dt_wiener) {
        for (auto& p : ps) p = p.with_f3db(0.0);
    }
    return CompositeModel(std::move(ps));
}

inline void add_awgn(std::vector<std::complex<double>>& v, double var, std::uint64_t seed) {
    if (var <= 0.0) return;
    pnoise::detail::GaussianSource g(seed);
    const double s = std::sqrt(var / 2.0);
    for (auto& z : v) {
        const double re = g();
        const double im = g();
        z += std::complex<double>(s * re, s * im);
    }
}

inline void require_finite(const std::vector<std::complex<double>>& v, const char* stage) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) {
            throw numeric_error(std::string("simulate_link: non-finite sample at ") + stage +
                                " index " + std::to_string(i));
        }
    }
}

}  // namespace detail

inline LinkTrace simulate_link_trace(const LinkConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.n_symbols;
    const int bps = bits_per_symbol(cfg.constellation);
    LinkTrace tr;
    tr.tx.resize(n);
    tr.tx_labels.resize(n);
    {
        pnoise::detail::GaussianSource data(pnoise::detail::derive_seed(cfg.seed, detail::data_stream));
        pnoise::detail::GaussianSource pil(pnoise::detail::derive_seed(cfg.seed, detail::pilot_stream));
        const unsigned mask = (1u << bps) - 1u;
        for (std::size_t k = 0; k < n; ++k) {
            if (cfg.tracking && cfg.pilots.is_pilot(k)) {
                // QPSK corners on either constellation, unit energy
                const unsigned b = static_cast<unsigned>(pil.bits() >> 62);
                tr.tx[k] = map_symbol(Constellation::qpsk, b);
                tr.tx_labels[k] = 0;
            } else {
                const unsigned b = static_cast<unsigned>(data.bits() >> (64 - bps)) & mask;
                tr.tx[k] = map_symbol(cfg.constellation, b);
                tr.tx_labels[k] = b;
            }
        }
    }
    const std::uint64_t pn_seed = pnoise::detail::derive_seed(cfg.seed, detail::pn_stream);
    const std::uint64_t noise_seed = pnoise::detail::derive_seed(cfg.seed, detail::noise_stream);
    const double n0 = cfg.noise_var();

    if (cfg.continuous_time()) {
        const std::vector<double> p = rrc_taps(cfg.rolloff, cfg.span_symbols, cfg.osf);
        const std::size_t L = p.size();
        const std::size_t osf = static_cast<std::size_t>(cfg.osf);
        std::vector<std::complex<double>> up(n * osf, 0.0);
        for (std::size_t k = 0; k < n; ++k) up[k * osf] = tr.tx[k];
        std::vector<std::complex<double>> s = pnoise::detail::convolve(up, p);
        up.clear();
        up.shrink_to_fit();

        tr.direct_gain.assign(n, 1.0);
        if (cfg.pn_model == PnModel::ct_composite) {
            const PnStream th = gen_composite(detail::pn_processes(cfg), cfg.ts / cfg.osf, s.size(), pn_seed);
            std::vector<std::complex<double>> ph(s.size());
            for (std::size_t i = 0; i < s.size(); ++i) ph[i] = std::polar(1.0, th.samples[i]);
            for (std::size_t i = 0; i < s.size(); ++i) s[i] *= ph[i];
            double e = 0.0;
            for (double v : p) e += v * v;
            for (std::size_t k = 0; k < n; ++k) {
                std::complex<double> g = 0.0;
                for (std::size_t j = 0; j < L; ++j) g += p[j] * p[j] * ph[k * osf + j];
                tr.direct_gain[k] = g / e;
            }
        }
        detail::add_awgn(s, n0 * cfg.osf, noise_seed);
        detail::require_finite(s, "channel");
        const std::vector<std::complex<double>> z = pnoise::detail::convolve(s, p);
        tr.rx.resize(n);
        for (std::size_t k = 0; k < n; ++k) tr.rx[k] = z[k * osf + L - 1] / static_cast<double>(cfg.osf);
    } else {
        const PnStream th = gen_composite(detail::pn_processes(cfg), cfg.ts, n, pn_seed);
        tr.rx.resize(n);
        tr.direct_gain.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            tr.direct_gain[k] = std::polar(1.0, th.samples[k]);
            tr.rx[k] = tr.tx[k] * tr.direct_gain[k];
        }
        detail::add_awgn(tr.rx, n0, noise_seed);
    }
    detail::require_finite(tr.rx, "matched filter");

    // Both filters together reach span symbols either side.
    tr.first = static_cast<std::size_t>(cfg.span_symbols);
    tr.last = n - static_cast<std::size_t>(cfg.span_symbols);
    if (!cfg.continuous_time()) {
        tr.first = 0;
        tr.last = n;
    }

    if (cfg.tracking) {
        const TrackingResult t = pilot_phase_track(tr.rx, tr.tx, cfg.pilots);
        tr.phase_estimate = t.phase;
        tr.unwrap_flagged = t.unwrap_flagged;
    }
    return tr;
}

inline LinkStats stats_from_trace(const LinkConfig& cfg, const LinkTrace& tr) {
    LinkStats st;
    const int bps = bits_per_symbol(cfg.constellation);
    const std::size_t first = tr.first;
    const std::size_t last = tr.last;
    st.n_measured = last - first;

    std::vector<std::complex<double>> ref;
    std::vector<std::complex<double>> obs;
    ref.reserve(last - first);
    obs.reserve(last - first);
    double pl = 0.0;
    double evm_num = 0.0;
    double evm_den = 0.0;
    double ph_sq = 0.0;
    // Errors cluster where the residual phase is large, so the BER SE comes
    // from contiguous batches rather than from a binomial count.
    constexpr std::size_t batches = 20;
    const std::size_t per_batch = std::max<std::size_t>(1, (last - first) / batches);
    std::vector<double> b_err(batches, 0.0);
    std::vector<double> b_bits(batches, 0.0);
    for (std::size_t k = first; k < last; ++k) {
        ref.push_back(cfg.sir_reference == SirReference::direct_gain ? tr.tx[k] * tr.direct_gain[k] : tr.tx[k]);
        obs.push_back(tr.rx[k]);
        pl += std::norm(tr.direct_gain[k]);
        std::complex<double> y = tr.rx[k];
        if (!tr.phase_estimate.empty()) {
            y *= std::polar(1.0, -tr.phase_estimate[k]);
            const double err = std::remainder(tr.phase_estimate[k] - std::arg(tr.direct_gain[k]), 2.0 * std::numbers::pi);
            ph_sq += err * err;
        }
        const bool pilot = cfg.tracking && cfg.pilots.is_pilot(k);
        if (pilot) continue;
        evm_num += std::norm(y - tr.tx[k]);
        evm_den += std::norm(tr.tx[k]);
        const unsigned d = demap_symbol(cfg.constellation, y);
        const unsigned diff = d ^ tr.tx_labels[k];
        st.n_errors += static_cast<std::uint64_t>(std::popcount(diff));
        const std::size_t b = std::min(batches - 1, (k - first) / per_batch);
        b_err[b] += std::popcount(diff);
        b_bits[b] += bps;
        st.n_symbol_errors += diff != 0 ? 1u : 0u;
        ++st.n_symbols;
    }
    const double m = static_cast<double>(last - first);
    st.power_loss = pl / m;
    st.residual_phase_rms = tr.phase_estimate.empty() ? 0.0 : std::sqrt(ph_sq / m);
    st.evm_rms = evm_den > 0.0 ? std::sqrt(evm_num / evm_den) : 0.0;
    st.n_bits = st.n_symbols * static_cast<std::uint64_t>(bps);
    st.ber = st.n_bits ? static_cast<double>(st.n_errors) / static_cast<double>(st.n_bits) : 0.0;
    if (st.n_bits) {
        const double binomial = std::sqrt(st.ber * (1.0 - st.ber) / static_cast<double>(st.n_bits));
        double var = 0.0;
        std::size_t used = 0;
        for (std::size_t b = 0; b < batches; ++b) {
            if (b_bits[b] == 0.0) continue;
            const double r = b_err[b] / b_bits[b] - st.ber;
            var += r * r;
            ++used;
        }
        const double bm = used > 1 ? std::sqrt(var / static_cast<double>(used - 1) / static_cast<double>(used)) : 0.0;
        st.ber_se = std::max(binomial, bm);
    }
    st.ser = st.n_symbols ? static_cast<double>(st.n_symbol_errors) / static_cast<double>(st.n_symbols) : 0.0;
    st.unwrap_flagged = tr.unwrap_flagged;
    if (ref.size() >= sir_min_symbols) {
        const SirEstimate s = measure_sir(ref, obs, cfg.noise_var());
        st.sir_db = s.sir_db;
        st.sir_se_db = s.se_db;
    } else {
        st.sir_db = std::numeric_limits<double>::quiet_NaN();
        st.sir_se_db = std::numeric_limits<double>::quiet_NaN();
    }
    return st;
}

inline LinkStats simulate_link(const LinkConfig& cfg) { return stats_from_trace(cfg, simulate_link_trace(cfg)); }

/// Pools two runs. BER SEs combine with bit-count weights; SIR and its SE
/// with inverse-variance weights in dB when both are finite.
inline LinkStats merge(const LinkStats& a, const LinkStats& b) {
    if (a.n_measured == 0) return b;
    if (b.n_measured == 0) return a;
    LinkStats m;
    const double wa = static_cast<double>(a.n_measured);
    const double wb = static_cast<double>(b.n_measured);
    const double w = wa + wb;
    m.n_measured = a.n_measured + b.n_measured;
    m.n_bits = a.n_bits + b.n_bits;
    m.n_errors = a.n_errors + b.n_errors;
    m.n_symbols = a.n_symbols + b.n_symbols;
    m.n_symbol_errors = a.n_symbol_errors + b.n_symbol_errors;
    m.ber = m.n_bits ? static_cast<double>(m.n_errors) / static_cast<double>(m.n_bits) : 0.0;
    if (m.n_bits) {
        const double ba = static_cast<double>(a.n_bits);
        const double bb = static_cast<double>(b.n_bits);
        m.ber_se = std::hypot(ba * a.ber_se, bb * b.ber_se) / (ba + bb);
    }
    m.ser = m.n_symbols ? static_cast<double>(m.n_symbol_errors) / static_cast<double>(m.n_symbols) : 0.0;
    m.evm_rms = std::sqrt((wa * a.evm_rms * a.evm_rms + wb * b.evm_rms * b.evm_rms) / w);
    m.power_loss = (wa * a.power_loss + wb * b.power_loss) / w;
    m.residual_phase_rms = std::sqrt((wa * a.residual_phase_rms * a.residual_phase_rms +
                                      wb * b.residual_phase_rms * b.residual_phase_rms) / w);
    m.unwrap_flagged = a.unwrap_flagged || b.unwrap_flagged;
    if (std::isfinite(a.sir_db) && std::isfinite(b.sir_db) && a.sir_se_db > 0.0 && b.sir_se_db > 0.0) {
        const double ia = 1.0 / (a.sir_se_db * a.sir_se_db);
        const double ib = 1.0 / (b.sir_se_db * b.sir_se_db);
        m.sir_db = (ia * a.sir_db + ib * b.sir_db) / (ia + ib);
        m.sir_se_db = 1.0 / std::sqrt(ia + ib);
    } else {
        m.sir_db = std::isfinite(a.sir_db) ? (std::isfinite(b.sir_db) ? (wa * a.sir_db + wb * b.sir_db) / w : a.sir_db) : b.sir_db;
        m.sir_se_db = std::isfinite(a.sir_se_db) ? a.sir_se_db : b.sir_se_db;
    }
    return m;
}

/// Seed of chunk c in a chunked run; chunk 0 keeps the configured seed.
inline std::uint64_t chunk_seed(std::uint64_t seed, std::size_t c) {
    return c == 0 ? seed : pnoise::detail::derive_seed(seed, 0x100 + c);
}

/// Repeats cfg on successive chunk seeds until at least `min_errors` bit
/// errors (or `max_bits` bits) have been pooled.
inline LinkStats simulate_until_errors(const LinkConfig& cfg, std::uint64_t min_errors,
                                       std::uint64_t max_bits) {
    LinkStats acc;
    for (std::size_t c = 0;; ++c) {
        LinkConfig run = cfg;
        run.seed = chunk_seed(cfg.seed, c);
        acc = merge(acc, simulate_link(run));
        if (acc.n_errors >= min_errors || acc.n_bits >= max_bits) break;
    }
    return acc;
}

/// Runs independent jobs on up to `threads` workers; results keep the input
/// order, so output is independent of scheduling.
template <class Job, class Result = std::invoke_result_t<Job&>>
std::vector<Result> run_parallel(std::vector<Job> jobs, unsigned threads = 0) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    std::vector<Result> out(jobs.size());
    std::size_t next = 0;
    while (next < jobs.size()) {
        std::vector<std::future<Result>> batch;
        const std::size_t end = std::min(jobs.size(), next + threads);
        for (std::size_t i = next; i < end; ++i) {
            batch.push_back(std::async(threads == 1 ? std::launch::deferred : std::launch::async, jobs[i]));
        }
        for (std::size_t i = next; i < end; ++i) out[i] = batch[i - next].get();
        next = end;
    }
    return out;
}

}  // namespace pnoise::linksim
