// Acceptance run: one PASS/FAIL line per criterion, detail lines indented.
// Usage: acceptance [--criterion N] [--threads T]

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "pnoise/detail/format.hpp"
#include "pnoise/pnoise.hpp"

using namespace pnoise;
using mp50 = boost::multiprecision::cpp_bin_float_50;

namespace {

constexpr double pi = std::numbers::pi;

unsigned g_threads = 0;

const OscillatorParams& reference_pll() {
    static const OscillatorParams p = OscillatorParams::from_db(10.0, -88.0);
    return p;
}

struct Outcome {
    bool pass = true;
    std::vector<std::string> detail;
    std::string signature;  // every Monte-Carlo number, formatted exactly

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        detail.push_back(std::string(ok ? "ok   " : "MISS ") + what);
    }
    void note(const std::string& what) { detail.push_back("     " + what); }
};

std::string f(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.4g", v);
    return b;
}

std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
    return g;
}

std::string stats_signature(const linksim::LinkStats& s) {
    std::ostringstream o;
    o << detail::fmt(s.sir_db) << ' ' << detail::fmt(s.sir_se_db) << ' ' << detail::fmt(s.ber) << ' '
      << detail::fmt(s.ber_se) << ' ' << s.n_bits << ' ' << s.n_errors << ' ' << detail::fmt(s.evm_rms) << ' '
      << detail::fmt(s.residual_phase_rms) << ';';
    return o.str();
}

// --- 1 -------------------------------------------------------------------

Outcome c1() {
    Outcome o;
    const auto& p = reference_pll();
    const double e10 = eta(rho(p, 1e-7));
    const double e100 = eta(rho(p, 1e-8));
    const double a10 = normalized_aliasing(p, 1e-7);
    const double a100 = normalized_aliasing(p, 1e-8);
    o.check(std::abs(e10 / 4.2e-5 - 1.0) <= 0.02, "eta at 10 MBaud " + f(e10) + " vs 4.2e-5 +-2%");
    o.check(std::abs(e100 / 4.9e-6 - 1.0) <= 0.02, "eta at 100 MBaud " + f(e100) + " vs 4.9e-6 +-2%");
    o.check(std::abs(a10 / 1.3e-6 - 1.0) <= 0.05, "normalized aliasing at 10 MBaud " + f(a10) + " vs 1.3e-6 +-5%");
    o.check(std::abs(a100 / 1.3e-7 - 1.0) <= 0.05, "normalized aliasing at 100 MBaud " + f(a100) + " vs 1.3e-7 +-5%");
    return o;
}

// --- 2 -------------------------------------------------------------------

Outcome c2() {
    Outcome o;
    const double s = db(sir_from_sigma_u(0.1));
    o.check(std::abs(s - 25.0) <= 0.1, "SIR at sigma_u = 0.1 rad: " + f(s) + " dB vs 25.0 +-0.1");
    return o;
}

// --- 3 -------------------------------------------------------------------

// gamma_0 = 2 int_0^1 (1 - f)^2 S_h(f) df at unit symbol time, where
// S_h(f) = (rho/pi)/(rho^2 + f^2) is the free-running phasor spectrum.
double gamma0_quadrature(double r) {
    auto s = [&](double x) { return (1.0 - x) * (1.0 - x) * (r / pi) / (r * r + x * x); };
    std::vector<double> br{0.0};
    for (double x = r; x < 1.0; x *= 4.0) br.push_back(x);
    br.push_back(1.0);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < br.size(); ++i) {
        total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(s, br[i], br[i + 1], 20, 1e-14);
    }
    return 2.0 * total;
}

Outcome c3() {
    Outcome o;
    const auto grid = log_grid(1e-9, 1e3, 1000);
    double worst_sum = 0.0, worst_isi_mp = 0.0, worst_isi_double_abs = 0.0, worst_isi_double_rel = 0.0;
    for (double r : grid) {
        const Rho x(r);
        worst_sum = std::max(worst_sum, std::abs((eta_d(x) + eta_isi(x)) / eta(x) - 1.0));
        const mp50 m(r);
        const mp50 rel = (sum_gamma(m) - gamma0(m)) / eta_isi(m) - 1;
        worst_isi_mp = std::max(worst_isi_mp, std::abs(static_cast<double>(rel)));
        const double d = sum_gamma(x) - gamma0(x) - eta_isi(x);
        worst_isi_double_abs = std::max(worst_isi_double_abs, std::abs(d));
        worst_isi_double_rel = std::max(worst_isi_double_rel, std::abs(d / eta_isi(x)));
    }
    o.check(worst_sum <= 1e-12, "eta = eta_d + eta_isi, worst relative gap " + f(worst_sum) + " over 1000 rho in [1e-9, 1e3]");
    o.check(worst_isi_mp <= 1e-12,
            "sum_gamma - gamma0 = eta_isi, worst relative gap " + f(worst_isi_mp) + " (50-digit evaluation)");
    o.note("same identity in double: worst absolute gap " + f(worst_isi_double_abs) + ", relative " +
           f(worst_isi_double_rel) + " (two numbers near 1 subtracted)");
    for (double r : {1e-4, 1e-2, 1.0}) {
        const double q = gamma0_quadrature(r);
        const double g = gamma0(Rho(r));
        o.check(std::abs(g / q - 1.0) <= 1e-6, "gamma0(" + f(r) + ") " + detail::fmt(g) + " vs quadrature " + detail::fmt(q));
    }
    return o;
}

// --- 4 -------------------------------------------------------------------

double phasor_power(const OscillatorParams& p) {
    const double scale = std::max(pi * p.K(), p.f3db());
    double area = 0.0;
    if (phasor_branch(p) == PhasorBranch::general) {
        detail::GeneralPhasorSpectrum s(p);
        auto g = [&](double x) { return s.continuous(x); };
        area = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, 0.0, 10.0 * scale, 25, 1e-12);
        boost::math::quadrature::exp_sinh<double> es;
        area += es.integrate(g, 10.0 * scale, std::numeric_limits<double>::infinity());
    } else {
        auto g = [&](double x) { return phasor_psd(p, x).continuous; };
        boost::math::quadrature::exp_sinh<double> es;
        area = es.integrate(g, 0.0, std::numeric_limits<double>::infinity());
    }
    return phasor_psd(p, 0.0).delta_weight + 2.0 * area;
}

constexpr std::uint64_t c4_seed = 20240404;

Outcome c4() {
    Outcome o;
    const auto& p = reference_pll();
    const double ts = 1e-7;
    const auto c = ar_coefficients(p, ts);
    const PnStream s = gen_ar(c, std::size_t{1} << 22, c4_seed);
    const PsdEstimate e = welch_psd(s.samples, 1.0 / ts);
    const double lo = 10.0 * e.resolution, hi = 0.4 / ts;
    const auto cmp = compare_psd(e, [&](double x) { return pn_psd(p, x); }, lo, hi);
    o.check(cmp.max_abs_dev_db <= 1.5, "AR Welch vs continuous model over [" + f(lo) + ", " + f(hi) +
                                           "] Hz: max |dev| " + f(cmp.max_abs_dev_db) + " dB (limit 1.5), rms " +
                                           f(cmp.rms_dev_db));
    double first_bad = 0.0;
    for (const auto& r : cmp.rows) {
        if (std::abs(r.dev_db) > 1.5) {
            first_bad = r.freq;
            break;
        }
    }
    if (first_bad > 0.0) o.note("first bin beyond 1.5 dB at " + f(first_bad) + " Hz = " + f(first_bad * ts) + "/ts");
    // the sampled recursion has its own spectrum; its gap to the continuous
    // one at f is about 10 log10((pi f ts)^2 / sin^2(pi f ts))
    auto dt = [&](double x) {
        const double w = 2.0 * pi * x * ts;
        const double mag2 = 1.0 - 2.0 * c.a * std::cos(w) + c.a * c.a;
        return c.sigma_u_sq * ts / mag2;
    };
    const auto cmp_dt = compare_psd(e, dt, lo, hi);
    o.note("same estimate vs the exact AR(1) spectrum: max |dev| " + f(cmp_dt.max_abs_dev_db) + " dB");
    o.note("continuous vs AR(1) spectrum at 0.4/ts: " + f(db(dt(hi) / pn_psd(p, hi))) + " dB");
    std::ostringstream sig;
    for (double v : e.psd) sig << detail::fmt(v) << ' ';
    o.signature = sig.str();

    const double K = p.K();
    const std::vector<std::pair<const char*, OscillatorParams>> branches{
        {"free-running", OscillatorParams(0.0, p.l100_sq())},
        {"PLL", OscillatorParams(1e4, p.l100_sq())},
        {"general", p},
    };
    for (const auto& [name, q] : branches) {
        const double tot = phasor_power(q);
        o.check(std::abs(tot - 1.0) <= 1e-6, std::string("phasor power, ") + name + " branch (f3db " + f(q.f3db()) +
                                                 ", pi K " + f(pi * K) + "): " + detail::fmt(tot));
    }
    return o;
}

// --- 5 -------------------------------------------------------------------

Outcome c5() {
    Outcome o;
    const std::vector<double> rolloffs{0.05, 0.1, 0.5};
    const std::vector<double> rhos{1e-4, 1e-3, 1e-2};
    std::vector<std::function<linksim::LinkStats()>> jobs;
    for (double r : rhos) {
        for (double b : rolloffs) {
            linksim::LinkConfig c;
            c.rolloff = b;
            c.osf = 5;
            c.span_symbols = 128;
            c.n_symbols = 200000;
            c.ts = 1e-7;
            c.pn_model = linksim::PnModel::ct_composite;
            c.processes = {OscillatorParams(0.0, r / (pi * c.ts) / 1e10)};
            c.seed = 5;
            jobs.push_back([c] { return linksim::simulate_link(c); });
        }
    }
    const auto res = linksim::run_parallel(jobs, g_threads);
    for (std::size_t i = 0; i < rhos.size(); ++i) {
        const double cf = db(sir_from_rho(Rho(rhos[i])));
        std::string line = "rho " + f(rhos[i]) + ": closed form " + f(cf) + " dB; measured";
        bool above = true, within2 = true, ordered = true, within1 = true;
        for (std::size_t j = 0; j < rolloffs.size(); ++j) {
            const auto& s = res[i * rolloffs.size() + j];
            o.signature += stats_signature(s);
            line += " " + f(s.sir_db) + " (b=" + f(rolloffs[j]) + ")";
            above = above && s.sir_db >= cf;
            within2 = within2 && s.sir_db - cf <= 2.0;
            if (j > 0) ordered = ordered && s.sir_db >= res[i * rolloffs.size() + j - 1].sir_db;
            if (rolloffs[j] == 0.05) within1 = within1 && std::abs(s.sir_db - cf) <= 1.0;
        }
        o.note(line);
        o.check(above, "rho " + f(rhos[i]) + ": every measured SIR >= closed form");
        o.check(within2, "rho " + f(rhos[i]) + ": every measured SIR within 2 dB of closed form");
        o.check(ordered, "rho " + f(rhos[i]) + ": SIR non-decreasing in roll-off");
        o.check(within1, "rho " + f(rhos[i]) + ": roll-off 0.05 within 1 dB of closed form");
    }
    o.note("SE per point about " + f(res.front().sir_se_db) + " dB; 2e5 symbols, span 128, osf 5, seed 5");
    return o;
}

// --- 6 -------------------------------------------------------------------

Outcome c6() {
    Outcome o;
    const std::vector<double> esn0{6.0, 8.0, 10.0};
    const std::vector<double> tss{1e-7, 1e-8};
    std::vector<std::function<linksim::LinkStats()>> jobs;
    for (double ts : tss) {
        for (double e : esn0) {
            for (auto model : {linksim::PnModel::ct_composite, linksim::PnModel::dt_ar}) {
                linksim::LinkConfig c;
                c.ts = ts;
                c.esn0_db = e;
                c.n_symbols = 100000;
                c.pn_model = model;
                c.processes = {reference_pll()};
                c.tracking = true;
                c.seed = 6000 + static_cast<std::uint64_t>(e);
                jobs.push_back([c] { return linksim::simulate_until_errors(c, 100, std::uint64_t{1} << 30); });
            }
        }
    }
    const auto res = linksim::run_parallel(jobs, g_threads);
    std::size_t i = 0;
    for (double ts : tss) {
        for (double e : esn0) {
            const auto& ct = res[i++];
            const auto& dt = res[i++];
            o.signature += stats_signature(ct) + stats_signature(dt);
            const double se = std::hypot(ct.ber_se, dt.ber_se);
            const double z = (ct.ber - dt.ber) / se;
            const std::string tag = f(1e-6 / ts) + " MBaud, Es/N0 " + f(e) + " dB: ";
            o.check(ct.n_errors >= 100 && dt.n_errors >= 100,
                    tag + "errors CT " + std::to_string(ct.n_errors) + ", DT " + std::to_string(dt.n_errors));
            o.check(std::abs(z) < 3.0, tag + "BER CT " + f(ct.ber) + " DT " + f(dt.ber) + ", |diff|/SE " + f(std::abs(z)));
        }
    }
    return o;
}

// --- 7 -------------------------------------------------------------------

Outcome c7() {
    Outcome o;
    const std::vector<double> ebn0{4.0, 6.0, 8.0};
    std::vector<std::function<linksim::LinkStats()>> jobs;
    for (double eb : ebn0) {
        linksim::LinkConfig c;
        c.esn0_db = eb + db(2.0);
        c.n_symbols = 100000;
        c.seed = 7000 + static_cast<std::uint64_t>(eb);
        jobs.push_back([c] { return linksim::simulate_until_errors(c, 1000, std::uint64_t{1} << 30); });
    }
    const auto res = linksim::run_parallel(jobs, g_threads);
    for (std::size_t i = 0; i < ebn0.size(); ++i) {
        const auto& s = res[i];
        o.signature += stats_signature(s);
        const double q = 0.5 * std::erfc(std::sqrt(std::pow(10.0, ebn0[i] / 10.0)));
        const double z = (s.ber - q) / s.ber_se;
        o.check(std::abs(z) <= 3.0, "Eb/N0 " + f(ebn0[i]) + " dB: BER " + f(s.ber) + " vs Q(sqrt(2Eb/N0)) " + f(q) +
                                        ", " + f(std::abs(z)) + " SE, " + std::to_string(s.n_errors) + " errors");
    }
    return o;
}

// --- 8 -------------------------------------------------------------------

Outcome c8() {
    Outcome o;
    const auto tg = ThreeGppParams::carrier_45ghz();
    auto points = [&](double lo, double hi) {
        std::vector<PsdPoint> pts;
        for (double x : log_grid(lo, hi, static_cast<int>(std::lround(10.0 * std::log10(hi / lo))) + 1)) {
            pts.push_back({x, db(threegpp_psd(tg, x))});
        }
        return pts;
    };
    const auto r = fit_composite(points(10.0, 1e9), 2);
    o.check(r.residual_rms_db < 3.0, "k = 2 fit over [10, 1e9] Hz: residual rms " + f(r.residual_rms_db) + " dB (limit 3)");
    const auto ref = threegpp_two_process_reference();
    std::vector<double> got, want;
    for (const auto& p : r.params) got.push_back(p.f3db());
    for (const auto& p : ref.processes()) want.push_back(p.f3db());
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    for (std::size_t i = 0; i < want.size(); ++i) {
        const double ratio = got[i] / want[i];
        o.check(ratio >= 0.1 && ratio <= 10.0, "f3db " + f(got[i]) + " Hz vs reference " + f(want[i]) + " Hz");
    }
    for (const auto& p : r.params) {
        o.note("fitted: f3db " + f(p.f3db()) + " Hz, l100 " + f(db(p.l100_sq())) + " dB, linf " +
               (p.linf_sq() > 0.0 ? f(db(p.linf_sq())) : std::string("none")) + " dB");
    }
    // the curve rises as 1/f^3.3 below its 1 Hz pole region; two Lorentzians
    // cannot follow both that slope and the 1/f^2 mid band
    const auto mid = fit_composite(points(1e3, 1e9), 2);
    o.note("diagnostic: same fit over [1e3, 1e9] Hz reaches " + f(mid.residual_rms_db) + " dB rms");
    double s2 = 0.0;
    const auto full = points(10.0, 1e9);
    for (const auto& p : full) {
        const double d = db(composite_psd(ref, p.freq_hz)) - p.level_db;
        s2 += d * d;
    }
    o.note("diagnostic: the reference pair itself over [10, 1e9] Hz: " + f(std::sqrt(s2 / static_cast<double>(full.size()))) +
           " dB rms");
    return o;
}

// --- 9 -------------------------------------------------------------------

Outcome c9() {
    Outcome o;
    const unsigned saved = g_threads;
    const std::vector<std::pair<int, std::function<Outcome()>>> mc{{4, c4}, {5, c5}, {6, c6}, {7, c7}};
    for (const auto& [n, fn] : mc) {
        g_threads = saved;
        const std::string a = fn().signature;
        g_threads = 1;  // a different schedule must not matter
        const std::string b = fn().signature;
        o.check(!a.empty() && a == b, "criterion " + std::to_string(n) + " rerun: " + std::to_string(a.size()) +
                                          " bytes of results, " + (a == b ? "identical" : "DIFFERENT"));
    }
    g_threads = saved;
    return o;
}

const std::vector<std::pair<const char*, std::function<Outcome()>>>& criteria() {
    static const std::vector<std::pair<const char*, std::function<Outcome()>>> all{
        {"symbol-rate error and aliasing at 10/100 MBaud", c1},
        {"SIR anchor at sigma_u = 0.1 rad", c2},
        {"closed-form identities and quadrature oracle", c3},
        {"generator spectrum and phasor unit power", c4},
        {"Monte-Carlo SIR vs closed form over roll-off", c5},
        {"DT vs CT BER with pilot tracking", c6},
        {"AWGN calibration", c7},
        {"two-process fit of the 3GPP curve", c8},
        {"determinism of the Monte-Carlo criteria", c9},
    };
    return all;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--criterion") && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else if (!std::strcmp(argv[i], "--threads") && i + 1 < argc) {
            g_threads = static_cast<unsigned>(std::atoi(argv[++i]));
        } else {
            std::cerr << "usage: acceptance [--criterion N] [--threads T]\n";
            return 2;
        }
    }
    const auto& all = criteria();
    if (only < 0 || only > static_cast<int>(all.size())) {
        std::cerr << "criterion must be 1.." << all.size() << '\n';
        return 2;
    }
    bool ok = true;
    for (std::size_t n = 1; n <= all.size(); ++n) {
        if (only && static_cast<int>(n) != only) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome r;
        try {
            r = all[n - 1].second();
        } catch (const std::exception& e) {
            r.check(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::cout << (r.pass ? "PASS" : "FAIL") << "  criterion " << n << ": " << all[n - 1].first << " ("
                  << f(secs) << " s)\n";
        for (const auto& d : r.detail) std::cout << "      " << d << '\n';
        ok = ok && r.pass;
    }
    return ok ? 0 : 1;
}
