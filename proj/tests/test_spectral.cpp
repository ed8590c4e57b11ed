#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "pnoise/spectral.hpp"
#include "pnoise/timegen.hpp"

using namespace pnoise;

namespace {

constexpr double pi = std::numbers::pi;

double variance(const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size());
}

double band_sum(const PsdEstimate& e) {
    double s = 0.0;
    for (double v : e.psd) s += v;
    return s * e.resolution;
}

// Exact two-sided spectrum of the sampled AR(1) recursion, for |f| < fs/2.
double ar_dt_psd(const ArCoefficients& c, double f) {
    const double w = 2.0 * pi * f * c.ts;
    return c.sigma_u_sq * c.ts / (1.0 + c.a * c.a - 2.0 * c.a * std::cos(w));
}

}  // namespace

TEST(Db, Conversions) {
    EXPECT_NEAR(undb(-88.0), 1.585e-9, 0.001e-9);
    EXPECT_EQ(db(1.0), 0.0);
    for (double x : {-150.0, -88.0, 0.0, 3.3, 40.0}) EXPECT_NEAR(db(undb(x)), x, 1e-12);
    EXPECT_THROW(db(0.0), domain_error);
    EXPECT_THROW(db(-1.0), domain_error);
}

TEST(Sides, RoundTrip) {
    for (double v : {1e-12, 0.3, 7.0}) {
        EXPECT_EQ(two_sided(one_sided(v)), v);
        EXPECT_EQ(one_sided(v), 2.0 * v);
    }
}

TEST(Welch, WhiteFloorLevel) {
    const double l = undb(-114.0);
    const double ts = 1e-7;
    const auto x = gen_white_floor(l, ts, 1u << 22, 3).samples;
    const auto e = welch_psd(x, 1.0 / ts);
    EXPECT_FALSE(e.nonstationary);
    EXPECT_EQ(e.segment_len, 1u << 14);
    EXPECT_EQ(e.window, Window::hann);
    const auto c = compare_psd(e, [&](double) { return l; }, 0.05 / ts, 0.45 / ts);
    EXPECT_LT(c.max_abs_dev_db, 1.0);
    EXPECT_LT(std::abs(c.mean_dev_db), 0.05);
}

TEST(Welch, ParsevalWithinTwoPercent) {
    const auto x = gen_white_floor(1e-12, 1e-6, 1u << 18, 9).samples;
    for (Window w : {Window::hann, Window::hamming, Window::rectangular}) {
        const auto e = welch_psd(x, 1e6, 1u << 12, 0.5, w);
        EXPECT_NEAR(band_sum(e) / variance(x), 1.0, 0.02) << window_name(w);
    }
    // correlated but stationary input
    const auto c = ar_coefficients(OscillatorParams::from_db(1e3, -90.0), 1e-6);
    const auto y = gen_ar(c, 1u << 20, 4).samples;
    const auto e = welch_psd(y, 1e6, 1u << 14);
    EXPECT_FALSE(e.nonstationary);
    EXPECT_NEAR(band_sum(e) / c.stationary_variance(), 1.0, 0.05);
}

TEST(Welch, FrequencyGrid) {
    const auto e = welch_psd(std::vector<double>(4096, 1.0), 100.0, 1024);
    ASSERT_EQ(e.freqs.size(), 513u);
    EXPECT_EQ(e.freqs.front(), 0.0);
    EXPECT_DOUBLE_EQ(e.freqs.back(), 50.0);
    EXPECT_TRUE(std::is_sorted(e.freqs.begin(), e.freqs.end()));
    EXPECT_EQ(e.n_segments, 7u);
    EXPECT_DOUBLE_EQ(e.resolution, 100.0 / 1024.0);
}

TEST(Welch, SinusoidPeak) {
    const double fs = 1e4;
    const double f0 = 1234.5;
    std::vector<double> x(1u << 16);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = std::sin(2.0 * pi * f0 * static_cast<double>(k) / fs);
    const auto e = welch_psd(x, fs, 4096);
    const auto it = std::max_element(e.psd.begin(), e.psd.end());
    const double fpk = e.freqs[static_cast<std::size_t>(it - e.psd.begin())];
    EXPECT_LE(std::abs(fpk - f0), e.resolution);
    std::vector<double> sorted = e.psd;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    EXPECT_GE(db(*it) - db(sorted[sorted.size() / 2]), 40.0);
}

TEST(Welch, ArMatchesSampledRecursionAndModel) {
    const auto p = OscillatorParams::from_db(10.0, -88.0);
    const double ts = 1e-7;
    const auto c = ar_coefficients(p, ts);
    const auto e = welch_psd(gen_ar(c, 1u << 22, 1).samples, 1.0 / ts);
    const double lo = 10.0 * e.resolution;
    // the estimator sees the sampled process, aliasing included
    const auto dt = compare_psd(e, [&](double f) { return ar_dt_psd(c, f); }, lo, 0.4 / ts);
    EXPECT_LT(dt.max_abs_dev_db, 1.5);
    // and the continuous model where aliasing is negligible
    const auto ct = compare_psd(e, [&](double f) { return pn_psd(p, f); }, lo, 0.05 / ts);
    EXPECT_LT(ct.max_abs_dev_db, 1.5);
}

TEST(Welch, WienerFlaggedAndIncrementsWhite) {
    const double s2 = 1e-4;
    const double ts = 1e-6;
    const auto w = gen_wiener(s2, 1u << 18, 8, ts).samples;
    EXPECT_TRUE(welch_psd(w, 1.0 / ts, 1u << 12).nonstationary);
    const auto d = increments(w);
    EXPECT_EQ(d.size(), w.size() - 1);
    const auto e = welch_psd(d, 1.0 / ts, 1u << 12);
    EXPECT_FALSE(e.nonstationary);
    // increments are white with variance s2: two-sided level s2 * ts
    const auto c = compare_psd(e, [&](double) { return s2 * ts; }, 0.02 / ts, 0.48 / ts);
    EXPECT_LT(std::abs(c.mean_dev_db), 0.1);
    EXPECT_LT(c.max_abs_dev_db, 1.5);
}

TEST(Welch, VarianceShrinksWithSegments) {
    auto rel_var = [](std::size_t n) {
        const auto x = gen_white_floor(1.0, 1.0, n, 12).samples;
        const auto e = welch_psd(x, 1.0, 256, 0.0);
        double m = 0.0, s = 0.0;
        std::size_t cnt = 0;
        for (std::size_t k = 2; k + 2 < e.psd.size(); ++k, ++cnt) m += e.psd[k];
        m /= static_cast<double>(cnt);
        for (std::size_t k = 2; k + 2 < e.psd.size(); ++k) s += (e.psd[k] - m) * (e.psd[k] - m);
        return std::make_pair(s / static_cast<double>(cnt) / (m * m), e.n_segments);
    };
    const auto [v1, n1] = rel_var(256u * 64);
    const auto [v2, n2] = rel_var(256u * 256);
    const double expect = static_cast<double>(n2) / static_cast<double>(n1);
    EXPECT_NEAR(v1 / v2 / expect, 1.0, 0.3);
}

TEST(Welch, InputValidation) {
    EXPECT_THROW(welch_psd(std::vector<double>(100), 1.0, 64), std::invalid_argument);
    EXPECT_THROW(welch_psd(std::vector<double>(1000), 1.0, 100), std::invalid_argument);
    EXPECT_THROW(welch_psd(std::vector<double>(1024), 0.0, 64), std::invalid_argument);
    EXPECT_THROW(welch_psd(std::vector<double>(1024), 1.0, 64, 1.0), std::invalid_argument);
}

TEST(ComparePsd, DoubledModelIsThreeDb) {
    const auto p = OscillatorParams::from_db(10.0, -88.0, -114.0);
    PsdEstimate e;
    for (int k = 1; k <= 100; ++k) {
        const double f = 1e3 * k;
        e.freqs.push_back(f);
        e.psd.push_back(one_sided(2.0 * pn_psd(p, f)));
    }
    const auto c = compare_psd(e, [&](double f) { return pn_psd(p, f); }, 1e3, 1e5);
    EXPECT_EQ(c.rows.size(), 100u);
    for (const auto& r : c.rows) EXPECT_NEAR(r.dev_db, 3.0103, 1e-4);
    EXPECT_NEAR(c.rms_dev_db, 3.0103, 1e-4);
    EXPECT_THROW(compare_psd(e, [](double) { return 1.0; }, 10.0, 1e5), std::invalid_argument);
    EXPECT_THROW(compare_psd(e, [](double) { return 1.0; }, 1500.0, 1600.0), std::invalid_argument);
    EXPECT_THROW(compare_psd(e, [](double) { return 1.0; }, 2e3, 1e3), std::invalid_argument);
}

TEST(ComparePsd, CompositeStreamAgainstThreeGpp) {
    const auto m = threegpp_two_process_reference();
    const double ts = 1e-9;
    const auto x = gen_composite(m, ts, 1u << 23, 2024).samples;
    // few segments at this resolution: average over log cells before comparing
    const auto e = log_average(welch_psd(x, 1.0 / ts, 1u << 21), 900.0, 10);
    const auto own = compare_psd(e, [&](double f) { return composite_psd(m, f); }, 1e4, 1e8);
    EXPECT_LT(own.max_abs_dev_db, 1.5);
    const auto tg = ThreeGppParams::carrier_45ghz();
    const auto c = compare_psd(e, [&](double f) { return threegpp_psd(tg, f); }, 1e3, 1e8);
    EXPECT_LT(c.rms_dev_db, 3.0);
}

TEST(LogAverage, CellsAndFlatInput) {
    PsdEstimate e;
    e.resolution = 1.0;
    for (int k = 0; k <= 10000; ++k) {
        e.freqs.push_back(k);
        e.psd.push_back(2.0);
    }
    const auto a = log_average(e, 1.0, 10);
    EXPECT_TRUE(std::is_sorted(a.freqs.begin(), a.freqs.end()));
    for (double v : a.psd) EXPECT_DOUBLE_EQ(v, 2.0);
    EXPECT_GE(a.freqs.front(), 1.0);
    EXPECT_LE(a.freqs.size(), 41u);
    EXPECT_THROW(log_average(e, 0.0, 10), std::invalid_argument);
}
