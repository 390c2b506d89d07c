// Timescale extraction: least-squares fits, moving-median smoothing,
// threshold crossings, the Lyapunov growth window, and the heating-time
// frequency fit, all against synthetic series with known answers.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "spindrive/timescales.hpp"

using namespace spindrive;

namespace {

// Trajectory sampled every period with period T and a prescribed d series.
TrajectoryRecord make_trajectory(double T, const std::vector<double>& d) {
    TrajectoryRecord rec;
    rec.period = T;
    for (std::size_t i = 0; i < d.size(); ++i) {
        rec.sample_periods.push_back(static_cast<std::int64_t>(i));
        rec.m.push_back(0.0);
        rec.h1.push_back(0.0);
        rec.ht.push_back(0.0);
    }
    rec.d = d;
    return rec;
}

}  // namespace

TEST_CASE("line fit recovers an exact line", "[timescales]") {
    const std::vector<double> x = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
    std::vector<double> y;
    for (const double v : x) y.push_back(2.5 * v - 1.25);
    const LineFit fit = fit_line(x, y);
    REQUIRE_THAT(fit.slope, Catch::Matchers::WithinAbs(2.5, 1e-14));
    REQUIRE_THAT(fit.intercept, Catch::Matchers::WithinAbs(-1.25, 1e-14));
    REQUIRE_THAT(fit.r2, Catch::Matchers::WithinAbs(1.0, 1e-14));
    REQUIRE(fit.slope_stderr < 1e-13);
    REQUIRE(fit.n_points == 6);
}

TEST_CASE("line fit statistics match hand-computed values on a small set", "[timescales]") {
    // Points (0,0), (1,1), (2,3): slope = 3/2, intercept = -1/6.
    // Residuals 1/6, -1/3, 1/6 -> ss_res = 1/6; syy = 14/3 - 16/3... compute:
    // mean y = 4/3, syy = (16 + 1 + 25)/9 = 14/3, r2 = 1 - (1/6)/(14/3) = 27/28.
    const std::vector<double> x = {0.0, 1.0, 2.0};
    const std::vector<double> y = {0.0, 1.0, 3.0};
    const LineFit fit = fit_line(x, y);
    REQUIRE_THAT(fit.slope, Catch::Matchers::WithinAbs(1.5, 1e-14));
    REQUIRE_THAT(fit.intercept, Catch::Matchers::WithinAbs(-1.0 / 6.0, 1e-14));
    REQUIRE_THAT(fit.r2, Catch::Matchers::WithinAbs(27.0 / 28.0, 1e-14));
    // stderr = sqrt(ss_res / (n-2) / sxx) = sqrt((1/6)/1/2) = sqrt(1/12).
    REQUIRE_THAT(fit.slope_stderr, Catch::Matchers::WithinAbs(std::sqrt(1.0 / 12.0), 1e-14));
}

TEST_CASE("degenerate line fits are rejected", "[timescales]") {
    const std::vector<double> one = {1.0};
    REQUIRE_THROWS_AS(fit_line(one, one), std::invalid_argument);
    const std::vector<double> x = {2.0, 2.0, 2.0};
    const std::vector<double> y = {1.0, 2.0, 3.0};
    REQUIRE_THROWS_AS(fit_line(x, y), std::invalid_argument);
    const std::vector<double> xs = {1.0, 2.0};
    const std::vector<double> ys = {1.0, 2.0, 3.0};
    REQUIRE_THROWS_AS(fit_line(xs, ys), std::invalid_argument);
}

TEST_CASE("moving median smooths spikes and shrinks at the edges", "[timescales]") {
    SECTION("window of one is the identity") {
        const std::vector<double> s = {3.0, 1.0, 4.0, 1.0, 5.0};
        REQUIRE(moving_median(s, 1) == s);
    }

    SECTION("single spike is flattened by a window of three") {
        const std::vector<double> s = {1.0, 1.0, 9.0, 1.0, 1.0};
        const std::vector<double> m = moving_median(s, 3);
        // Edges use 2-point windows (mean of the sorted pair).
        REQUIRE(m == std::vector<double>{1.0, 1.0, 1.0, 1.0, 1.0});
    }

    SECTION("hand-computed medians for a mixed series") {
        const std::vector<double> s = {5.0, 2.0, 8.0, 1.0, 9.0, 3.0};
        const std::vector<double> m = moving_median(s, 3);
        REQUIRE(m[0] == 3.5);  // median of {5,2}
        REQUIRE(m[1] == 5.0);  // median of {5,2,8}
        REQUIRE(m[2] == 2.0);
        REQUIRE(m[3] == 8.0);
        REQUIRE(m[4] == 3.0);
        REQUIRE(m[5] == 6.0);  // median of {9,3}
    }

    SECTION("window larger than the series degrades gracefully") {
        const std::vector<double> s = {2.0, 4.0};
        const std::vector<double> m = moving_median(s, 11);
        REQUIRE(m == std::vector<double>{3.0, 3.0});
    }

    REQUIRE_THROWS_AS(moving_median(std::vector<double>{1.0}, 0), std::invalid_argument);
}

TEST_CASE("first crossing reports the first strict exceedance", "[timescales]") {
    const std::vector<double> t = {0.0, 1.0, 2.0, 3.0};
    const std::vector<double> v = {0.1, 0.5, 0.5, 0.9};
    REQUIRE(first_crossing(t, v, 0.4) == 1.0);
    REQUIRE(first_crossing(t, v, 0.5) == 3.0);  // strict: the plateau at 0.5 does not count
    REQUIRE_FALSE(first_crossing(t, v, 0.9).has_value());
}

TEST_CASE("crossing times locate the 10% and 90% thresholds", "[timescales]") {
    // Piecewise-constant d: 60 samples at 0.05*sqrt(2), 60 at 0.5*sqrt(2),
    // 60 at 0.95*sqrt(2). With an 11-sample median the smoothed series
    // switches level once 6 of 11 window samples sit on the new level, i.e.
    // centered at the boundary sample itself.
    std::vector<double> d;
    for (int i = 0; i < 60; ++i) d.push_back(0.05 * kDecorrelatorInfinity);
    for (int i = 0; i < 60; ++i) d.push_back(0.5 * kDecorrelatorInfinity);
    for (int i = 0; i < 60; ++i) d.push_back(0.95 * kDecorrelatorInfinity);
    const double T = 2.0;
    const TrajectoryRecord rec = make_trajectory(T, d);

    const CrossingTimes ct = crossing_times(rec);
    REQUIRE(ct.tau_pth.has_value());
    REQUIRE(ct.tau_th.has_value());
    // The median-11 window centered at sample 60 holds samples 55..65, six
    // of which are at the middle level, so the 10% threshold is crossed at
    // exactly t = 60 T; likewise 90% at t = 120 T.
    REQUIRE(*ct.tau_pth == 60.0 * T);
    REQUIRE(*ct.tau_th == 120.0 * T);
}

TEST_CASE("an isolated spike does not trigger a crossing", "[timescales]") {
    std::vector<double> d(200, 0.01);
    d[80] = 2.0;  // single-sample glitch far above every threshold
    const TrajectoryRecord rec = make_trajectory(1.0, d);
    const CrossingTimes ct = crossing_times(rec);
    REQUIRE_FALSE(ct.tau_pth.has_value());
    REQUIRE_FALSE(ct.tau_th.has_value());
}

TEST_CASE("crossing times require a decorrelator series", "[timescales]") {
    TrajectoryRecord rec = make_trajectory(1.0, std::vector<double>(30, 0.1));
    rec.d.clear();
    REQUIRE_THROWS_AS(crossing_times(rec), std::invalid_argument);
}

TEST_CASE("Lyapunov fit recovers the rate of clean exponential growth", "[timescales]") {
    // d(t) = d0 exp(lambda t) with d0 tiny enough that dozens of samples sit
    // under the 1% saturation guard.
    const double lambda = 0.012;
    const double d0 = 1e-9;
    const double T = 2.0 * kTwoPi / 2.86 / 2.0;  // arbitrary non-unit period
    std::vector<double> d;
    for (int n = 0; n < 2000; ++n) {
        const double v = d0 * std::exp(lambda * n * T);
        d.push_back(std::min(v, kDecorrelatorInfinity));
    }
    const TrajectoryRecord rec = make_trajectory(T, d);

    const auto fit = fit_lyapunov(rec);
    REQUIRE(fit.has_value());
    REQUIRE_THAT(fit->slope, Catch::Matchers::WithinRel(lambda, 1e-10));
    REQUIRE_THAT(fit->r2, Catch::Matchers::WithinAbs(1.0, 1e-12));

    // The fit window must exclude the first 5 samples and everything at or
    // beyond the first sample above 0.01*sqrt(2).
    std::size_t first_above = d.size();
    for (std::size_t i = 0; i < d.size(); ++i)
        if (d[i] > 0.01 * kDecorrelatorInfinity) {
            first_above = i;
            break;
        }
    REQUIRE(fit->n_points == static_cast<int>(first_above) - kLyapunovSkipSamples);
}

TEST_CASE("Lyapunov fit ignores a corrupted early transient", "[timescales]") {
    // First few samples deviate wildly from the asymptotic growth; skipping
    // them keeps the fitted slope clean.
    const double lambda = 0.02;
    std::vector<double> d;
    for (int n = 0; n < 1000; ++n) d.push_back(1e-8 * std::exp(lambda * n));
    d[0] = 1e-3;
    d[1] = 1e-12;
    d[2] = 5e-6;
    d[3] = 1e-10;
    d[4] = 3e-7;
    const TrajectoryRecord rec = make_trajectory(1.0, d);
    const auto fit = fit_lyapunov(rec);
    REQUIRE(fit.has_value());
    REQUIRE_THAT(fit->slope, Catch::Matchers::WithinRel(lambda, 1e-10));
}

TEST_CASE("Lyapunov fit refuses windows with too few samples", "[timescales]") {
    SECTION("saturation arrives too early") {
        // Samples 0..11 grow, everything later is saturated: window after the
        // 5-sample skip holds fewer than 10 points -> refused, not fitted.
        std::vector<double> d;
        for (int n = 0; n < 12; ++n) d.push_back(1e-6 * std::exp(0.5 * n));
        for (int n = 12; n < 100; ++n) d.push_back(kDecorrelatorInfinity);
        const TrajectoryRecord rec = make_trajectory(1.0, d);
        REQUIRE_FALSE(fit_lyapunov(rec).has_value());
    }

    SECTION("series itself is too short") {
        std::vector<double> d(14, 1e-8);
        const TrajectoryRecord rec = make_trajectory(1.0, d);
        REQUIRE_FALSE(fit_lyapunov(rec).has_value());
    }

    SECTION("no decorrelator or nonpositive start are errors") {
        TrajectoryRecord bare = make_trajectory(1.0, std::vector<double>(30, 1e-6));
        bare.d.clear();
        REQUIRE_THROWS_AS(fit_lyapunov(bare), std::invalid_argument);

        std::vector<double> d(30, 1e-6);
        d[0] = 0.0;
        const TrajectoryRecord zero = make_trajectory(1.0, d);
        REQUIRE_THROWS_AS(fit_lyapunov(zero), std::invalid_argument);
    }
}

TEST_CASE("heating exponent fit recovers an exact exponential law", "[timescales]") {
    // tau_th = A exp(c*omega) with c = 2.25 -> ln tau is linear in omega.
    const double c = 2.25;
    const double A = 40.0;
    std::vector<HeatingPoint> pts;
    for (const double omega : {2.4, 2.6, 2.8, 3.0, 3.2})
        pts.push_back({omega, A * std::exp(c * omega)});
    const LineFit fit = fit_heating_exponent(pts);
    REQUIRE_THAT(fit.slope, Catch::Matchers::WithinRel(c, 1e-12));
    REQUIRE_THAT(fit.intercept, Catch::Matchers::WithinRel(std::log(A), 1e-10));
    REQUIRE_THAT(fit.r2, Catch::Matchers::WithinAbs(1.0, 1e-12));
}

TEST_CASE("heating fit skips absent crossings and enforces a minimum", "[timescales]") {
    std::vector<HeatingPoint> pts = {
        {2.4, 100.0}, {2.6, std::nullopt}, {2.8, 900.0}, {3.0, 2700.0}};
    // One absent point leaves 3 finite ones: fit proceeds over those.
    const LineFit fit = fit_heating_exponent(pts);
    REQUIRE(fit.n_points == 3);

    pts[2].tau_th.reset();
    REQUIRE_THROWS_AS(fit_heating_exponent(pts), std::invalid_argument);
}

TEST_CASE("full analysis bundles crossings and the growth fit", "[timescales]") {
    const double lambda = 0.03;
    std::vector<double> d;
    for (int n = 0; n < 1500; ++n)
        d.push_back(std::min(1e-8 * std::exp(lambda * n), 0.97 * kDecorrelatorInfinity));
    const TrajectoryRecord rec = make_trajectory(1.0, d);

    const TimescaleFit fit = analyze_timescales(rec);
    REQUIRE(fit.lyapunov.has_value());
    REQUIRE_THAT(*fit.lambda(), Catch::Matchers::WithinRel(lambda, 1e-8));
    REQUIRE(fit.tau_pth.has_value());
    REQUIRE(fit.tau_th.has_value());
    REQUIRE(*fit.tau_pth < *fit.tau_th);
    // Exponential growth crosses 0.1*sqrt(2) at ln(0.1*sqrt(2)/1e-8)/lambda.
    const double expected_pth = std::log(0.1 * kDecorrelatorInfinity / 1e-8) / lambda;
    REQUIRE_THAT(*fit.tau_pth, Catch::Matchers::WithinAbs(expected_pth, 2.0));
    const double expected_th = std::log(0.9 * kDecorrelatorInfinity / 1e-8) / lambda;
    REQUIRE_THAT(*fit.tau_th, Catch::Matchers::WithinAbs(expected_th, 2.0));
    REQUIRE_FALSE(fit.heating.has_value());
}

TEST_CASE("analysis of a single-copy trajectory is empty, not an error", "[timescales]") {
    TrajectoryRecord rec = make_trajectory(1.0, std::vector<double>(30, 0.1));
    rec.d.clear();
    const TimescaleFit fit = analyze_timescales(rec);
    REQUIRE_FALSE(fit.lyapunov.has_value());
    REQUIRE_FALSE(fit.tau_pth.has_value());
    REQUIRE_FALSE(fit.tau_th.has_value());
    REQUIRE_FALSE(fit.lambda().has_value());
}
