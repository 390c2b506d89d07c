// spectrum.hpp
// Discrete Fourier transform of the stroboscopic magnetization and the
// subharmonic-peak bookkeeping used to classify time-crystalline response.
//
// Convention: m_tilde(w'_k) = (1/M) sum_{n=0}^{M-1} m(nT) exp(-i w'_k n T)
// on the grid w'_k = k*omega/M, k = 0..M-1. With t = nT the phases reduce to
// exact M-th roots of unity, which we evaluate from an integer (k*n mod M)
// twiddle table; no numerically drifting recurrences.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spindrive/observables.hpp"

namespace spindrive {

/// Subharmonic order n = num/den: a response repeating every `num` periods
/// with `den` oscillations (integer orders have den = 1).
struct RationalOrder {
    int num = 0;
    int den = 1;

    double value() const noexcept { return static_cast<double>(num) / den; }
    std::string str() const {
        return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
    }
    bool operator==(const RationalOrder&) const = default;
};

inline const std::vector<RationalOrder>& default_order_candidates() {
    static const std::vector<RationalOrder> table = {
        {2, 1}, {3, 1}, {4, 1}, {5, 1}, {6, 1}, {7, 1}, {8, 1}, {20, 7}};
    return table;
}

struct SpectralResult {
    double omega = 0.0;
    int window_length = 0;           // M
    std::int64_t window_start = 0;   // period index of the first sample
    std::vector<double> frequency;   // w'_k = k*omega/M, k = 0..M-1
    std::vector<double> amplitude;   // |m_tilde(w'_k)|

    int peak_bin = 0;                // argmax over k in [1, M/2]
    double peak_frequency = 0.0;
    double peak_amplitude = 0.0;
    double median_amplitude = 0.0;   // over all nonzero-frequency bins
    bool has_peak = false;           // peak exceeds 5x the median (and a tiny floor)
    std::optional<RationalOrder> detected_order;
};

namespace detail {
inline double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}
}  // namespace detail

/// Transform of a contiguous stroboscopic window (rectangular window, no
/// zero-padding). Requires M >= 16 samples.
inline SpectralResult fourier_spectrum(std::span<const double> m_window, double omega,
                                       const std::vector<RationalOrder>& candidates =
                                           default_order_candidates(),
                                       std::int64_t window_start = 0) {
    const std::int64_t M = static_cast<std::int64_t>(m_window.size());
    if (M == 0) throw std::invalid_argument("fourier_spectrum: empty window");
    if (M < 16) throw std::invalid_argument("fourier_spectrum: window must hold at least 16 samples");
    if (!(omega > 0.0)) throw std::invalid_argument("fourier_spectrum: omega must be > 0");

    // Exact twiddle table: w^j = exp(-2*pi*i*j/M).
    std::vector<double> tc(static_cast<std::size_t>(M)), ts(static_cast<std::size_t>(M));
    for (std::int64_t j = 0; j < M; ++j) {
        const double angle = -kTwoPi * static_cast<double>(j) / static_cast<double>(M);
        tc[static_cast<std::size_t>(j)] = std::cos(angle);
        ts[static_cast<std::size_t>(j)] = std::sin(angle);
    }

    SpectralResult result;
    result.omega = omega;
    result.window_length = static_cast<int>(M);
    result.window_start = window_start;
    result.frequency.resize(static_cast<std::size_t>(M));
    result.amplitude.resize(static_cast<std::size_t>(M));
    for (std::int64_t k = 0; k < M; ++k) {
        double re = 0.0, im = 0.0;
        std::int64_t j = 0;  // (k*n) mod M without multiplications overflowing
        for (std::int64_t n = 0; n < M; ++n) {
            re += m_window[static_cast<std::size_t>(n)] * tc[static_cast<std::size_t>(j)];
            im += m_window[static_cast<std::size_t>(n)] * ts[static_cast<std::size_t>(j)];
            j += k;
            if (j >= M) j -= M;
        }
        result.frequency[static_cast<std::size_t>(k)] =
            static_cast<double>(k) * omega / static_cast<double>(M);
        result.amplitude[static_cast<std::size_t>(k)] =
            std::hypot(re, im) / static_cast<double>(M);
    }

    // Peak over the physical half of the grid, k in [1, M/2]; bins above M/2
    // are conjugate aliases.
    const std::int64_t k_top = M / 2;
    int best = 1;
    for (std::int64_t k = 2; k <= k_top; ++k)
        if (result.amplitude[static_cast<std::size_t>(k)] >
            result.amplitude[static_cast<std::size_t>(best)])
            best = static_cast<int>(k);
    result.peak_bin = best;
    result.peak_frequency = result.frequency[static_cast<std::size_t>(best)];
    result.peak_amplitude = result.amplitude[static_cast<std::size_t>(best)];

    std::vector<double> nonzero_bins(result.amplitude.begin() + 1, result.amplitude.end());
    result.median_amplitude = detail::median_of(std::move(nonzero_bins));

    // 1e-9 floor keeps all-rounding-noise spectra (e.g. a constant series)
    // from registering as a peak.
    result.has_peak = result.peak_amplitude > 5.0 * result.median_amplitude &&
                      result.peak_amplitude > 1e-9;

    if (result.has_peak) {
        // Match the peak bin against w'/n for candidate orders, within one bin.
        double best_dist = 1.0 + 1e-9;
        for (const RationalOrder& cand : candidates) {
            if (cand.num <= 0 || cand.den <= 0) continue;
            const double target_bin =
                static_cast<double>(M) * cand.den / static_cast<double>(cand.num);
            const double dist = std::fabs(static_cast<double>(best) - target_bin);
            if (dist < best_dist) {
                best_dist = dist;
                result.detected_order = cand;
            }
        }
    }
    return result;
}

/// Extracts m over the contiguous stroboscopic run [start, end) from a
/// record; empty when the record was not sampled every period there.
inline std::optional<std::vector<double>> contiguous_window(const TrajectoryRecord& record,
                                                            std::int64_t start,
                                                            std::int64_t end) {
    if (end <= start) return std::nullopt;
    const auto& periods = record.sample_periods;
    auto it = std::lower_bound(periods.begin(), periods.end(), start);
    if (it == periods.end() || *it != start) return std::nullopt;
    const auto first = static_cast<std::size_t>(it - periods.begin());
    const auto count = static_cast<std::size_t>(end - start);
    if (first + count > periods.size()) return std::nullopt;
    for (std::size_t k = 0; k < count; ++k)
        if (periods[first + k] != start + static_cast<std::int64_t>(k)) return std::nullopt;
    return std::vector<double>(record.m.begin() + static_cast<std::ptrdiff_t>(first),
                               record.m.begin() + static_cast<std::ptrdiff_t>(first + count));
}

}  // namespace spindrive
