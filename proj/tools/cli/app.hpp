#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli/config.hpp"
#include "cli/table.hpp"
#include "pnoise/io/psd_points.hpp"
#include "pnoise/io/stream_dump.hpp"
#include "pnoise/pnoise.hpp"

namespace pnoise::cli {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::vector<double> log_grid(double lo, double hi, double per_decade) {
    if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) throw UsageError("need 0 < min <= max");
    if (!(per_decade > 0.0)) throw UsageError("points per decade must be > 0");
    const double decades = std::log10(hi / lo);
    const auto n = static_cast<std::size_t>(std::llround(decades * per_decade));
    std::vector<double> g;
    for (std::size_t i = 0; i <= n; ++i) {
        g.push_back(n == 0 ? lo : lo * std::pow(10.0, decades * static_cast<double>(i) / static_cast<double>(n)));
    }
    return g;
}

inline std::pair<double, double> parse_range(const std::string& s) {
    const auto c = s.find(':');
    if (c == std::string::npos) throw UsageError("range '" + s + "' must look like min:max");
    try {
        return {std::stod(s.substr(0, c)), std::stod(s.substr(c + 1))};
    } catch (const std::exception&) {
        throw UsageError("range '" + s + "' is not numeric");
    }
}

/// Oscillator flags shared by the model-driven subcommands. Either the
/// single-process flags or one or more --process entries.
struct ProcessFlags {
    double f3db = 10.0;
    double l100_db = -88.0;
    std::optional<double> linf_db;
    double f_ref = 1e5;
    std::vector<std::string> specs;
    CLI::Option* o_f3db = nullptr;
    CLI::Option* o_l100 = nullptr;
    CLI::Option* o_linf = nullptr;
    CLI::Option* o_fref = nullptr;
    CLI::Option* o_proc = nullptr;

    void add(CLI::App* app, bool multi = true) {
        o_f3db = app->add_option("--f3db", f3db, "PLL 3-dB bandwidth, Hz (0 = free-running)")->capture_default_str();
        o_l100 = app->add_option("--l100-db", l100_db, "PSD level at the reference offset, dB")->capture_default_str();
        o_linf = app->add_option("--linf-db", linf_db, "white floor level, dB (default: none)");
        o_fref = app->add_option("--f-ref", f_ref, "reference offset, Hz")->capture_default_str();
        if (multi) {
            o_proc = app->add_option("--process", specs,
                                     "process as f3db,l100_db[,linf_db]; repeat for a composite");
        }
    }

    bool single_given() const {
        return o_f3db->count() + o_l100->count() + o_linf->count() > 0;
    }
    bool any_given() const { return single_given() || (o_proc && o_proc->count() > 0); }

    std::vector<OscillatorParams> resolve() const {
        if (specs.empty()) {
            const double linf = linf_db ? *linf_db : -std::numeric_limits<double>::infinity();
            return {OscillatorParams::from_db(f3db, l100_db, linf, f_ref)};
        }
        if (single_given()) throw UsageError("--process cannot be combined with --f3db/--l100-db/--linf-db");
        std::vector<OscillatorParams> out;
        for (const auto& s : specs) {
            std::vector<double> v;
            std::stringstream ss(s);
            std::string item;
            while (std::getline(ss, item, ',')) {
                try {
                    v.push_back(std::stod(item));
                } catch (const std::exception&) {
                    throw UsageError("--process '" + s + "': not a number list");
                }
            }
            if (v.size() < 2 || v.size() > 3) throw UsageError("--process '" + s + "': need f3db,l100_db[,linf_db]");
            const double linf = v.size() == 3 ? v[2] : -std::numeric_limits<double>::infinity();
            out.push_back(OscillatorParams::from_db(v[0], v[1], linf, f_ref));
        }
        return out;
    }
};

inline ojson processes_json(const std::vector<OscillatorParams>& ps) {
    ojson a = ojson::array();
    for (const auto& p : ps) a.push_back(process_json(p));
    return a;
}

struct Output {
    std::string path = "-";
    std::string format = "csv";

    void add(CLI::App* app, const char* default_format = "csv") {
        format = default_format;
        app->add_option("-o,--out", path, "output file ('-' = stdout)")->capture_default_str();
        app->add_option("--format", format, "csv or json")
            ->check(CLI::IsMember({"csv", "json"}))
            ->capture_default_str();
    }
    Format fmt() const { return format == "json" ? Format::json : Format::csv; }
};

class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback, bool binary = false) : out_(&fallback) {
        if (path != "-") {
            file_ = std::make_unique<std::ofstream>(path, binary ? std::ios::binary : std::ios::out);
            if (!*file_) throw std::runtime_error("cannot open " + path + " for writing");
            out_ = file_.get();
        }
    }
    std::ostream& stream() { return *out_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* out_;
};

inline void emit(const Output& o, std::ostream& out, const Meta& m, const Table& t) {
    Sink s(o.path, out);
    write_table(s.stream(), m, t, o.fmt());
}

inline std::string num(double v) { return pnoise::detail::fmt(v); }

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    using namespace detail;
    CLI::App app{"Oscillator phase noise: PSD models, sample generators, error analysis, link simulation", "pnoise"};
    app.require_subcommand(1, 1);
    app.set_version_flag("--version", std::string(pnoise::version));

    // psd
    auto* psd = app.add_subcommand("psd", "PN PSD sweep (optionally phasor and 3GPP columns)");
    ProcessFlags psd_p;
    psd_p.add(psd);
    double psd_fmin = 1.0, psd_fmax = 1e8, psd_ppd = 20.0;
    std::string psd_points;
    bool psd_phasor = false, psd_3gpp = false;
    std::optional<double> psd_btheta;
    Output psd_o;
    psd->add_option("--fmin", psd_fmin, "lowest offset, Hz")->capture_default_str();
    psd->add_option("--fmax", psd_fmax, "highest offset, Hz")->capture_default_str();
    psd->add_option("--per-decade", psd_ppd, "grid points per decade")->capture_default_str();
    psd->add_option("--points", psd_points, "evaluate at the frequencies of a freq_hz,level_db file");
    psd->add_flag("--phasor", psd_phasor, "add the phasor PSD (continuous part)");
    psd->add_option("--b-theta", psd_btheta, "floor bandwidth for the phasor PSD with a floor, Hz");
    psd->add_flag("--threegpp-45ghz", psd_3gpp, "add the 3GPP 45 GHz reference curve");
    psd_o.add(psd);

    // autocorr
    auto* ac = app.add_subcommand("autocorr", "PN and phasor autocorrelation over a lag sweep");
    ProcessFlags ac_p;
    ac_p.add(ac, false);
    double ac_tmin = 1e-6, ac_tmax = 1.0, ac_ppd = 10.0;
    Output ac_o;
    ac->add_option("--tau-min", ac_tmin, "shortest lag, s")->capture_default_str();
    ac->add_option("--tau-max", ac_tmax, "longest lag, s")->capture_default_str();
    ac->add_option("--per-decade", ac_ppd, "grid points per decade")->capture_default_str();
    ac_o.add(ac);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a phase sample stream");
    ProcessFlags gen_p;
    gen_p.add(gen);
    double gen_ts = 1e-7;
    std::size_t gen_n = 65536;
    std::uint64_t gen_seed = 1;
    bool gen_binary = false;
    Output gen_o;
    gen->add_option("--ts", gen_ts, "sampling period, s")->capture_default_str();
    gen->add_option("-n,--n", gen_n, "number of samples")->capture_default_str();
    gen->add_option("--seed", gen_seed, "master seed")->capture_default_str();
    gen->add_flag("--binary", gen_binary, "write the binary stream dump (needs --out)");
    gen_o.add(gen);

    // validate
    auto* val = app.add_subcommand("validate", "Welch PSD of a generated stream against its model");
    ProcessFlags val_p;
    val_p.add(val);
    double val_ts = 1e-7, val_overlap = 0.5, val_log = 0.0;
    std::size_t val_n = std::size_t{1} << 22, val_seg = std::size_t{1} << 14;
    std::uint64_t val_seed = 1;
    std::string val_window = "hann";
    std::optional<double> val_fmin, val_fmax;
    Output val_o;
    val->add_option("--ts", val_ts, "sampling period, s")->capture_default_str();
    val->add_option("-n,--n", val_n, "number of samples")->capture_default_str();
    val->add_option("--seed", val_seed, "master seed")->capture_default_str();
    val->add_option("--segment", val_seg, "Welch segment length (power of two)")->capture_default_str();
    val->add_option("--overlap", val_overlap, "segment overlap in [0, 1)")->capture_default_str();
    val->add_option("--window", val_window, "hann, hamming or rectangular")
        ->check(CLI::IsMember({"hann", "hamming", "rectangular"}))
        ->capture_default_str();
    val->add_option("--fmin", val_fmin, "band start, Hz (default 10 bins)");
    val->add_option("--fmax", val_fmax, "band end, Hz (default 0.4/ts)");
    val->add_option("--log-average", val_log, "average into this many log cells per decade (0 = per bin)")
        ->capture_default_str();
    val_o.add(val);

    // errors
    auto* er = app.add_subcommand("errors", "discretization error of the symbol-rate model (free-running PN)");
    double er_l100 = -88.0, er_fref = 1e5, er_ppd = 10.0;
    std::optional<double> er_ts, er_f3db;
    std::string er_sweep;
    Output er_o;
    er->add_option("--l100-db", er_l100, "PSD level at the reference offset, dB")->capture_default_str();
    er->add_option("--f-ref", er_fref, "reference offset, Hz")->capture_default_str();
    er->add_option("--ts", er_ts, "symbol period, s");
    er->add_option("--f3db", er_f3db, "PLL bandwidth, Hz, for the aliasing columns");
    er->add_option("--sweep-rho", er_sweep, "rho range min:max instead of --ts");
    er->add_option("--per-decade", er_ppd, "sweep points per decade")->capture_default_str();
    er_o.add(er);

    // sir
    auto* sir = app.add_subcommand("sir", "SIR after the matched filter vs rho, Monte-Carlo and closed form");
    std::string sir_sweep = "1e-5:1e-1", sir_config;
    double sir_ppd = 1.0;
    std::vector<double> sir_rolloffs{0.05, 0.1, 0.5};
    std::size_t sir_n = 200000;
    int sir_span = 32, sir_osf = 5;
    double sir_ts = 1e-7;
    std::uint64_t sir_seed = 1;
    unsigned sir_threads = 0;
    bool sir_closed = false;
    Output sir_o;
    sir->add_option("--sweep-rho", sir_sweep, "rho range min:max")->capture_default_str();
    sir->add_option("--per-decade", sir_ppd, "rho points per decade")->capture_default_str();
    sir->add_option("--rolloffs", sir_rolloffs, "RRC roll-offs")->delimiter(',')->capture_default_str();
    auto* sir_n_opt = sir->add_option("--n-symbols", sir_n, "symbols per point")->capture_default_str();
    auto* sir_span_opt = sir->add_option("--span", sir_span, "RRC span, symbols")->capture_default_str();
    auto* sir_osf_opt = sir->add_option("--osf", sir_osf, "oversampling factor")->capture_default_str();
    auto* sir_ts_opt = sir->add_option("--ts", sir_ts, "symbol period, s")->capture_default_str();
    auto* sir_seed_opt = sir->add_option("--seed", sir_seed, "seed (shared by all points)")->capture_default_str();
    sir->add_option("--threads", sir_threads, "worker threads (0 = all cores)")->capture_default_str();
    sir->add_option("--config", sir_config, "JSON link config used as the base");
    sir->add_flag("--closed-form-only", sir_closed, "skip the simulation");
    sir_o.add(sir);

    // ber
    auto* ber = app.add_subcommand("ber", "uncoded BER vs Es/N0");
    ProcessFlags ber_p;
    ber_p.add(ber);
    std::string ber_config, ber_model, ber_const;
    std::vector<double> ber_esn0{6.0, 8.0, 10.0};
    double ber_ts = 1e-7, ber_roll = 0.05;
    std::size_t ber_n = 100000, ber_plen = 36, ber_pper = 1476;
    int ber_span = 32, ber_osf = 5;
    std::uint64_t ber_seed = 1, ber_min_err = 100;
    double ber_max_bits = 1e8;
    bool ber_track = false;
    unsigned ber_threads = 0;
    Output ber_o;
    ber->add_option("--config", ber_config, "JSON link config used as the base");
    ber->add_option("--esn0", ber_esn0, "Es/N0 points, dB")->delimiter(',')->capture_default_str();
    auto* b_model = ber->add_option("--pn-model", ber_model, "none, ct_composite, dt_ar or dt_wiener")
                        ->check(CLI::IsMember({"none", "ct_composite", "dt_ar", "dt_wiener"}));
    auto* b_const = ber->add_option("--constellation", ber_const, "qpsk or qam16")->check(CLI::IsMember({"qpsk", "qam16"}));
    auto* b_ts = ber->add_option("--ts", ber_ts, "symbol period, s");
    auto* b_roll = ber->add_option("--rolloff", ber_roll, "RRC roll-off");
    auto* b_n = ber->add_option("--n-symbols", ber_n, "symbols per chunk, pilots included");
    auto* b_span = ber->add_option("--span", ber_span, "RRC span, symbols");
    auto* b_osf = ber->add_option("--osf", ber_osf, "oversampling factor");
    auto* b_plen = ber->add_option("--pilot-len", ber_plen, "pilot field length, symbols");
    auto* b_pper = ber->add_option("--pilot-period", ber_pper, "data symbols between pilot fields");
    auto* b_track = ber->add_flag("--tracking", ber_track, "pilot-aided phase tracking");
    auto* b_seed = ber->add_option("--seed", ber_seed, "seed");
    ber->add_option("--min-errors", ber_min_err, "keep adding chunks until this many bit errors")->capture_default_str();
    ber->add_option("--max-bits", ber_max_bits, "stop after this many bits")->capture_default_str();
    ber->add_option("--threads", ber_threads, "worker threads (0 = all cores)")->capture_default_str();
    ber_o.add(ber);

    // fit
    auto* fit = app.add_subcommand("fit", "fit one or more processes to PSD points");
    std::string fit_points;
    int fit_k = 2, fit_evals = 20000;
    Output fit_o;
    fit->add_option("--points", fit_points, "freq_hz,level_db file")->required();
    fit->add_option("--k", fit_k, "number of processes (1..4)")->capture_default_str();
    fit->add_option("--max-evaluations", fit_evals, "objective evaluation budget")->capture_default_str();
    fit_o.add(fit, "json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (psd->parsed()) {
            const auto ps = psd_p.resolve();
            std::vector<double> freqs;
            std::vector<PsdPoint> ref;
            if (!psd_points.empty()) {
                ref = io::read_psd_points(psd_points);
                for (const auto& p : ref) freqs.push_back(p.freq_hz);
            } else {
                freqs = log_grid(psd_fmin, psd_fmax, psd_ppd);
            }
            if (psd_phasor && ps.size() != 1) throw UsageError("--phasor needs a single process");
            Meta m{"psd", std::nullopt, {}, {}};
            m.config["processes"] = processes_json(ps);
            Table t;
            t.columns = {"freq_hz", "pn_db"};
            if (psd_phasor) t.columns.push_back("phasor_db");
            if (psd_3gpp) t.columns.push_back("threegpp_db");
            if (!ref.empty()) t.columns.push_back("ref_db");
            const CompositeModel model(ps);
            const auto tg = ThreeGppParams::carrier_45ghz();
            double delta = 0.0;
            for (std::size_t i = 0; i < freqs.size(); ++i) {
                const double f = freqs[i];
                std::vector<double> row{f, db(composite_psd(model, f))};
                if (psd_phasor) {
                    const auto& p = ps.front();
                    PhasorPsdValue v;
                    if (p.linf_sq() > 0.0) {
                        v = psd_btheta ? phasor_psd_with_floor(p, f, *psd_btheta) : phasor_psd_inband(p, f);
                    } else {
                        v = phasor_psd(p, f);
                    }
                    delta = v.delta_weight;
                    row.push_back(db(v.continuous));
                }
                if (psd_3gpp) row.push_back(db(threegpp_psd(tg, f)));
                if (!ref.empty()) row.push_back(ref[i].level_db);
                t.rows.push_back(std::move(row));
            }
            if (psd_phasor) {
                m.config["b_theta"] = psd_btheta ? ojson(*psd_btheta) : ojson(nullptr);
                m.notes.emplace_back("phasor_delta_weight", num(delta));
            }
            m.notes.emplace_back("convention", "double-sided PSD, 10*log10(rad^2/Hz)");
            emit(psd_o, out, m, t);
        } else if (ac->parsed()) {
            const auto p = ac_p.resolve().front();
            Meta m{"autocorr", std::nullopt, {}, {}};
            m.config["process"] = process_json(p);
            Table t;
            const bool pn = !p.free_running();
            t.columns = pn ? std::vector<std::string>{"tau_s", "pn_rad2", "phasor"}
                           : std::vector<std::string>{"tau_s", "phasor"};
            for (double tau : log_grid(ac_tmin, ac_tmax, ac_ppd)) {
                std::vector<double> row{tau};
                if (pn) row.push_back(pn_autocorr(p, tau));
                row.push_back(phasor_autocorr(p, tau));
                t.rows.push_back(std::move(row));
            }
            emit(ac_o, out, m, t);
        } else if (gen->parsed()) {
            const auto ps = gen_p.resolve();
            const PnStream s = gen_composite(CompositeModel(ps), gen_ts, gen_n, gen_seed);
            Meta m{"gen", gen_seed, {}, {}};
            m.config["processes"] = processes_json(ps);
            m.config["ts"] = gen_ts;
            m.config["n"] = gen_n;
            if (gen_binary) {
                if (gen_o.path == "-") throw UsageError("--binary needs --out FILE");
                Sink sink(gen_o.path, out, true);
                io::write_stream_binary(sink.stream(), s);
            } else {
                Table t;
                t.columns = {"k", "theta_rad"};
                t.rows.reserve(s.samples.size());
                for (std::size_t k = 0; k < s.samples.size(); ++k) {
                    t.rows.push_back({static_cast<double>(k), s.samples[k]});
                }
                emit(gen_o, out, m, t);
            }
        } else if (val->parsed()) {
            const auto ps = val_p.resolve();
            const bool wiener = std::any_of(ps.begin(), ps.end(), [](const auto& p) { return p.free_running(); });
            if (wiener && (ps.size() != 1 || ps.front().linf_sq() > 0.0)) {
                throw UsageError("validate: a free-running process must be the only one and have no floor");
            }
            const CompositeModel model(ps);
            const PnStream s = gen_composite(model, val_ts, val_n, val_seed);
            const Window w = val_window == "hamming" ? Window::hamming
                             : val_window == "rectangular" ? Window::rectangular
                                                           : Window::hann;
            const double fs = 1.0 / val_ts;
            PsdEstimate e = welch_psd(wiener ? increments(s.samples) : s.samples, fs, val_seg, val_overlap, w);
            const double fmin = val_fmin.value_or(10.0 * e.resolution);
            const double fmax = val_fmax.value_or(0.4 * fs);
            const bool raw_nonstationary = wiener ? welch_psd(s.samples, fs, val_seg, val_overlap, w).nonstationary
                                                  : e.nonstationary;
            if (val_log > 0.0) e = log_average(e, fmin, static_cast<std::size_t>(val_log));
            const double s2 = wiener ? wiener_sigma(ps.front(), val_ts) : 0.0;
            std::function<double(double)> fn;
            if (wiener) {
                fn = [&](double) { return s2 * val_ts; };
            } else {
                fn = [&](double f) { return composite_psd(model, f); };
            }
            // log cells are centred inside the band, so clamp to what survived
            const double lo = e.freqs.empty() ? fmin : std::max(fmin, e.freqs.front());
            const double hi = e.freqs.empty() ? fmax : std::min(fmax, e.freqs.back());
            const PsdComparison c = compare_psd(e, fn, lo, hi);
            Meta m{"validate", val_seed, {}, {}};
            m.config["processes"] = processes_json(ps);
            m.config["ts"] = val_ts;
            m.config["n"] = val_n;
            m.config["segment"] = val_seg;
            m.config["overlap"] = val_overlap;
            m.config["window"] = val_window;
            m.config["fmin"] = fmin;
            m.config["fmax"] = fmax;
            m.config["log_average"] = val_log;
            m.notes.emplace_back("compared", wiener ? "increments vs flat sigma_u^2*ts" : "samples vs composite model");
            m.notes.emplace_back("n_segments", std::to_string(e.n_segments));
            m.notes.emplace_back("resolution_hz", num(e.resolution));
            m.notes.emplace_back("nonstationary", raw_nonstationary ? "true" : "false");
            m.notes.emplace_back("max_abs_dev_db", num(c.max_abs_dev_db));
            m.notes.emplace_back("rms_dev_db", num(c.rms_dev_db));
            Table t;
            t.columns = {"freq_hz", "est_db", "model_db", "dev_db"};
            for (const auto& r : c.rows) t.rows.push_back({r.freq, r.est_db, r.model_db, r.dev_db});
            emit(val_o, out, m, t);
        } else if (er->parsed()) {
            if (er_sweep.empty() == !er_ts) throw UsageError("errors: give exactly one of --ts or --sweep-rho");
            Meta m{"errors", std::nullopt, {}, {}};
            Table t;
            t.columns = {"rho", "eta", "eta_d", "eta_isi", "sir_db"};
            auto row_for = [](double r) {
                const auto b = error_breakdown(Rho(r));
                return std::vector<double>{r, b.eta, b.eta_d, b.eta_isi, db(b.sir_linear)};
            };
            if (!er_sweep.empty()) {
                const auto [lo, hi] = parse_range(er_sweep);
                m.config["sweep_rho"] = {lo, hi};
                m.config["per_decade"] = er_ppd;
                for (double r : log_grid(lo, hi, er_ppd)) t.rows.push_back(row_for(r));
            } else {
                const auto p = OscillatorParams::from_db(er_f3db.value_or(0.0), er_l100,
                                                         -std::numeric_limits<double>::infinity(), er_fref);
                m.config["l100_db"] = er_l100;
                m.config["f_ref"] = er_fref;
                m.config["ts"] = *er_ts;
                m.config["f3db"] = er_f3db ? ojson(*er_f3db) : ojson(nullptr);
                auto row = row_for(rho(p, *er_ts).value);
                if (er_f3db && *er_f3db > 0.0) {
                    t.columns.push_back("alias_var_rad2");
                    t.columns.push_back("alias_normalized");
                    row.push_back(aliasing_variance(p, *er_ts));
                    row.push_back(normalized_aliasing(p, *er_ts));
                }
                t.rows.push_back(std::move(row));
            }
            m.notes.emplace_back("pulse", "ideal sinc, free-running PN");
            emit(er_o, out, m, t);
        } else if (sir->parsed()) {
            const auto [lo, hi] = parse_range(sir_sweep);
            const auto rhos = log_grid(lo, hi, sir_ppd);
            linksim::LinkConfig base;
            if (!sir_config.empty()) {
                std::ifstream f(sir_config);
                if (!f) throw std::runtime_error("cannot open " + sir_config);
                base = link_from_json(ojson::parse(f));
            }
            if (sir_n_opt->count() || sir_config.empty()) base.n_symbols = sir_n;
            if (sir_span_opt->count() || sir_config.empty()) base.span_symbols = sir_span;
            if (sir_osf_opt->count() || sir_config.empty()) base.osf = sir_osf;
            if (sir_ts_opt->count() || sir_config.empty()) base.ts = sir_ts;
            if (sir_seed_opt->count() || sir_config.empty()) base.seed = sir_seed;
            base.pn_model = linksim::PnModel::ct_composite;
            base.esn0_db.reset();
            base.tracking = false;
            base.sir_reference = linksim::SirReference::direct_gain;

            Meta m{"sir", base.seed, {}, {}};
            m.config = link_json(base);
            m.config["link"].erase("processes");
            m.config["link"].erase("esn0_db");
            m.config["sweep_rho"] = {lo, hi};
            m.config["per_decade"] = sir_ppd;
            m.config["rolloffs"] = sir_rolloffs;
            m.notes.emplace_back("pn", "free-running, K = rho/(pi*ts); AWGN off; same seed for every point");
            Table t;
            if (sir_closed) {
                t.columns = {"rho", "closed_form_db"};
                for (double r : rhos) t.rows.push_back({r, db(sir_from_rho(Rho(r)))});
                m.seed.reset();
            } else {
                t.columns = {"rho", "sir_db", "se", "rolloff", "closed_form_db"};
                std::vector<std::function<linksim::LinkStats()>> jobs;
                std::vector<std::pair<double, double>> keys;
                for (double r : rhos) {
                    for (double b : sir_rolloffs) {
                        linksim::LinkConfig c = base;
                        c.rolloff = b;
                        const double k = r / (std::numbers::pi * c.ts);
                        c.processes = {OscillatorParams(0.0, k / 1e10, 0.0, 1e5)};
                        c.validate();
                        jobs.push_back([c] { return linksim::simulate_link(c); });
                        keys.emplace_back(r, b);
                    }
                }
                const auto res = linksim::run_parallel(jobs, sir_threads);
                for (std::size_t i = 0; i < res.size(); ++i) {
                    const auto [r, b] = keys[i];
                    t.rows.push_back({r, res[i].sir_db, res[i].sir_se_db, b, db(sir_from_rho(Rho(r)))});
                }
            }
            emit(sir_o, out, m, t);
        } else if (ber->parsed()) {
            linksim::LinkConfig c;
            if (!ber_config.empty()) {
                std::ifstream f(ber_config);
                if (!f) throw std::runtime_error("cannot open " + ber_config);
                c = link_from_json(ojson::parse(f));
            }
            if (ber_p.any_given()) c.processes = ber_p.resolve();
            if (b_const->count()) c.constellation = linksim::parse_constellation(ber_const);
            if (b_ts->count()) c.ts = ber_ts;
            if (b_roll->count()) c.rolloff = ber_roll;
            if (b_n->count()) c.n_symbols = ber_n;
            if (b_span->count()) c.span_symbols = ber_span;
            if (b_osf->count()) c.osf = ber_osf;
            if (b_plen->count()) c.pilots.pilot_len = ber_plen;
            if (b_pper->count()) c.pilots.pilot_period = ber_pper;
            if (b_track->count()) c.tracking = true;
            if (b_seed->count()) c.seed = ber_seed;
            if (b_model->count()) {
                c.pn_model = linksim::parse_pn_model(ber_model);
            } else if (ber_config.empty() && !c.processes.empty()) {
                c.pn_model = linksim::PnModel::ct_composite;
            }
            if (c.pn_model == linksim::PnModel::none) c.processes.clear();
            c.esn0_db = ber_esn0.empty() ? 0.0 : ber_esn0.front();
            c.validate();

            Meta m{"ber", c.seed, link_json(c), {}};
            m.config["link"].erase("esn0_db");
            m.config["esn0_db"] = ber_esn0;
            m.config["min_errors"] = ber_min_err;
            m.config["max_bits"] = ber_max_bits;
            std::vector<std::function<linksim::LinkStats()>> jobs;
            for (double e : ber_esn0) {
                linksim::LinkConfig run = c;
                run.esn0_db = e;
                const auto max_bits = static_cast<std::uint64_t>(ber_max_bits);
                const auto min_err = ber_min_err;
                jobs.push_back([run, min_err, max_bits] { return linksim::simulate_until_errors(run, min_err, max_bits); });
            }
            const auto res = linksim::run_parallel(jobs, ber_threads);
            Table t;
            t.columns = {"esn0_db", "ber", "se", "n_bits", "n_errors", "ser", "residual_phase_rms"};
            bool flagged = false;
            for (std::size_t i = 0; i < res.size(); ++i) {
                const auto& s = res[i];
                flagged = flagged || s.unwrap_flagged;
                t.rows.push_back({ber_esn0[i], s.ber, s.ber_se, static_cast<double>(s.n_bits),
                                  static_cast<double>(s.n_errors), s.ser, s.residual_phase_rms});
            }
            if (c.tracking) m.notes.emplace_back("unwrap_flagged", flagged ? "true" : "false");
            emit(ber_o, out, m, t);
        } else if (fit->parsed()) {
            const auto pts = io::read_psd_points(fit_points);
            if (fit_k < 1 || fit_k > 4) throw UsageError("--k must be 1..4");
            FitOptions opt;
            opt.max_evaluations = fit_evals;
            const FitResult r = fit_composite(pts, fit_k, opt);
            Meta m{"fit", std::nullopt, {}, {}};
            m.config["points"] = fit_points;
            m.config["n_points"] = pts.size();
            m.config["k"] = fit_k;
            m.config["max_evaluations"] = fit_evals;
            if (fit_o.fmt() == Format::json) {
                ojson j;
                j["meta"] = meta_json(m);
                ojson res;
                res["params"] = processes_json(r.params);
                res["residual_rms_db"] = r.residual_rms_db;
                res["iterations"] = r.iterations;
                res["converged"] = r.converged;
                res["free_running_like"] = r.free_running_like;
                res["stage_residuals"] = r.stage_residuals;
                j["result"] = res;
                Sink s(fit_o.path, out);
                s.stream() << j.dump(2) << '\n';
            } else {
                m.notes.emplace_back("residual_rms_db", num(r.residual_rms_db));
                m.notes.emplace_back("converged", r.converged ? "true" : "false");
                m.notes.emplace_back("free_running_like", r.free_running_like ? "true" : "false");
                Table t;
                t.columns = {"f3db", "l100_db", "linf_db"};
                for (const auto& p : r.params) {
                    t.rows.push_back({p.f3db(), db(p.l100_sq()),
                                      p.linf_sq() > 0.0 ? db(p.linf_sq()) : -std::numeric_limits<double>::infinity()});
                }
                emit(fit_o, out, m, t);
            }
        }
    } catch (const UsageError& e) {
        err << "pnoise: usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "pnoise: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace pnoise::cli
