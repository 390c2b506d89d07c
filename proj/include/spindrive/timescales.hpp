// timescales.hpp
// Extraction of the dynamical timescales from decorrelator traces: the
// Lyapunov exponent from the early exponential growth, the 10%/90%
// threshold-crossing times bracketing the prethermal plateau, and the
// heating exponent c from ln(tau_th) vs omega across a frequency sweep.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "spindrive/observables.hpp"

namespace spindrive {

/// Ordinary least-squares line y = slope*x + intercept.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double slope_stderr = 0.0;
    int n_points = 0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line: need at least two matched points");
    const auto n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_line: x values are all identical");
    LineFit fit;
    fit.n_points = static_cast<int>(x.size());
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.slope * x[i] + fit.intercept);
        ss_res += r * r;
    }
    fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res == 0.0 ? 1.0 : 0.0);
    fit.slope_stderr =
        x.size() > 2 ? std::sqrt(ss_res / (n - 2.0) / sxx) : 0.0;
    return fit;
}

/// Centered moving median; windows are truncated at the series edges.
inline std::vector<double> moving_median(std::span<const double> series, int window = 11) {
    if (window < 1) throw std::invalid_argument("moving_median: window must be >= 1");
    const auto n = static_cast<std::int64_t>(series.size());
    std::vector<double> out(series.size());
    const std::int64_t half = window / 2;
    std::vector<double> scratch;
    for (std::int64_t i = 0; i < n; ++i) {
        const std::int64_t lo = std::max<std::int64_t>(0, i - half);
        const std::int64_t hi = std::min(n - 1, i + half);
        scratch.assign(series.begin() + lo, series.begin() + hi + 1);
        std::sort(scratch.begin(), scratch.end());
        const std::size_t m = scratch.size();
        out[static_cast<std::size_t>(i)] =
            m % 2 == 1 ? scratch[m / 2] : 0.5 * (scratch[m / 2 - 1] + scratch[m / 2]);
    }
    return out;
}

/// First time at which `values` strictly exceeds `threshold`; absent if never.
inline std::optional<double> first_crossing(std::span<const double> times,
                                            std::span<const double> values, double threshold) {
    for (std::size_t i = 0; i < values.size(); ++i)
        if (values[i] > threshold) return times[i];
    return std::nullopt;
}

struct CrossingTimes {
    std::optional<double> tau_pth;  // 10% of d_inf
    std::optional<double> tau_th;   // 90% of d_inf
};

inline constexpr int kCrossingSmoothingWindow = 11;

/// Threshold-crossing times of the smoothed decorrelator (moving median over
/// 11 stroboscopic samples). Absent crossings are reported as such, not as
/// errors, so short runs remain first-class results.
inline CrossingTimes crossing_times(const TrajectoryRecord& trajectory,
                                    double d_inf = kDecorrelatorInfinity) {
    if (!trajectory.has_decorrelator())
        throw std::invalid_argument("crossing_times: trajectory has no decorrelator series");
    const std::vector<double> t = trajectory.times();
    const std::vector<double> smoothed =
        moving_median(trajectory.d, kCrossingSmoothingWindow);
    CrossingTimes out;
    out.tau_pth = first_crossing(t, smoothed, 0.1 * d_inf);
    out.tau_th = first_crossing(t, smoothed, 0.9 * d_inf);
    return out;
}

inline constexpr int kLyapunovSkipSamples = 5;
inline constexpr double kLyapunovWindowFraction = 0.01;
inline constexpr int kLyapunovMinSamples = 10;

/// Least-squares slope of ln d vs t over the early growth window: samples
/// after the first 5 (transient alignment of the perturbation) and before d
/// first exceeds 1% of d_inf (onset of saturation). Returns nullopt when the
/// window holds fewer than 10 usable samples (fit refused).
inline std::optional<LineFit> fit_lyapunov(const TrajectoryRecord& trajectory,
                                           double d_inf = kDecorrelatorInfinity) {
    if (!trajectory.has_decorrelator())
        throw std::invalid_argument("fit_lyapunov: trajectory has no decorrelator series");
    if (!(trajectory.d.front() > 0.0))
        throw std::invalid_argument("fit_lyapunov: d(0) must be positive");
    std::size_t end = trajectory.d.size();
    for (std::size_t i = 0; i < trajectory.d.size(); ++i)
        if (trajectory.d[i] > kLyapunovWindowFraction * d_inf) {
            end = i;
            break;
        }
    const std::vector<double> t = trajectory.times();
    std::vector<double> xs, ys;
    for (std::size_t i = kLyapunovSkipSamples; i < end; ++i) {
        if (!(trajectory.d[i] > 0.0)) continue;
        xs.push_back(t[i]);
        ys.push_back(std::log(trajectory.d[i]));
    }
    if (xs.size() < static_cast<std::size_t>(kLyapunovMinSamples)) return std::nullopt;
    return fit_line(xs, ys);
}

/// One frequency point of a thermalization-time sweep.
struct HeatingPoint {
    double omega = 0.0;
    std::optional<double> tau_th;
};

/// Slope c of ln(tau_th) vs omega. Points with an absent crossing are
/// excluded; fewer than 3 surviving points is an error.
inline LineFit fit_heating_exponent(std::span<const HeatingPoint> points) {
    std::vector<double> xs, ys;
    for (const HeatingPoint& p : points)
        if (p.tau_th && *p.tau_th > 0.0) {
            xs.push_back(p.omega);
            ys.push_back(std::log(*p.tau_th));
        }
    if (xs.size() < 3)
        throw std::invalid_argument(
            "fit_heating_exponent: need at least 3 points with a finite tau_th");
    return fit_line(xs, ys);
}

/// Bundle of everything the timescale analysis produces for one run (the
/// heating fit only exists for multi-frequency datasets).
struct TimescaleFit {
    std::optional<LineFit> lyapunov;  // slope = lambda
    std::optional<double> tau_pth;
    std::optional<double> tau_th;
    std::optional<LineFit> heating;   // slope = c

    std::optional<double> lambda() const {
        if (!lyapunov) return std::nullopt;
        return lyapunov->slope;
    }
};

/// Crossing times plus the Lyapunov fit, when the trajectory supports them.
inline TimescaleFit analyze_timescales(const TrajectoryRecord& trajectory,
                                       double d_inf = kDecorrelatorInfinity) {
    TimescaleFit fit;
    if (!trajectory.has_decorrelator()) return fit;
    const CrossingTimes crossings = crossing_times(trajectory, d_inf);
    fit.tau_pth = crossings.tau_pth;
    fit.tau_th = crossings.tau_th;
    if (trajectory.d.front() > 0.0) fit.lyapunov = fit_lyapunov(trajectory, d_inf);
    return fit;
}

}  // namespace spindrive
