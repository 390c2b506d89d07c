// dynamics.hpp
// The exact one-period map of the binary drive. During the interaction half
// every spin precesses about z at its local effective rate
//   kappa_r = h + (1/6) sum of the 6 neighbor z-components,
// which is itself a constant of that half (the z-rotation leaves every S^z
// untouched), so the half integrates to a plain z-rotation by kappa_r*T/2.
// The kick half is a global x-rotation by 2*pi*g. One period is therefore
//   S(nT+T) = Rx(2*pi*g) * Rz(kappa_r*T/2) * S(nT),
// with every kappa_r read from the pre-step configuration (synchronous,
// double-buffered update).

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <utility>

#include "spindrive/lattice.hpp"

namespace spindrive {

struct DriveParams {
    double omega = 0.0;  // drive angular frequency; T = 2*pi/omega
    double g = 0.0;      // kick strength; x-rotation angle is 2*pi*g
    double h = 0.1;      // longitudinal field

    double period() const noexcept { return kTwoPi / omega; }
    double half_period() const noexcept { return 0.5 * kTwoPi / omega; }
    double kick_angle() const noexcept { return kTwoPi * g; }

    void validate() const {
        if (!(omega > 0.0)) throw std::invalid_argument("DriveParams: omega must be > 0");
    }
};

/// Effective precession rate at `site`: h + mean of the 6 neighbor S^z.
/// Always within [h - 1, h + 1] for unit spins.
inline double local_field(const SpinLattice& lattice, std::int64_t site,
                          const DriveParams& params) noexcept {
    const std::int32_t* nb = lattice.geometry->neighbors(site);
    const double* z = lattice.sz.data();
    return params.h +
           (z[nb[0]] + z[nb[1]] + z[nb[2]] + z[nb[3]] + z[nb[4]] + z[nb[5]]) * (1.0 / 6.0);
}

namespace detail {

#if defined(__GLIBC__)
inline void sincos_pair(double a, double& s, double& c) noexcept { ::sincos(a, &s, &c); }
#else
inline void sincos_pair(double a, double& s, double& c) noexcept {
    s = std::sin(a);
    c = std::cos(a);
}
#endif

}  // namespace detail

/// One-period update of a single site, reading only the pre-step lattice.
/// c2/s2 are cos/sin of the kick angle, hoisted by the caller.
inline SpinVector floquet_site_update(const SpinLattice& src, std::int64_t i,
                                      const DriveParams& params, double c2, double s2) noexcept {
    const double kappa = local_field(src, i, params);
    double s1, c1;
    detail::sincos_pair(kappa * params.half_period(), s1, c1);
    const auto k = static_cast<std::size_t>(i);
    // z-rotation by kappa*T/2; S^z passes through untouched.
    const double x = c1 * src.sx[k] - s1 * src.sy[k];
    const double y = s1 * src.sx[k] + c1 * src.sy[k];
    const double z = src.sz[k];
    // x-rotation by 2*pi*g.
    return {x, c2 * y - s2 * z, s2 * y + c2 * z};
}

/// Full synchronous step src -> dst. dst must share the geometry and must not
/// alias src; every site may be computed independently (any order, any
/// thread partition) with bitwise-identical results.
inline void floquet_step_into(const SpinLattice& src, SpinLattice& dst, const DriveParams& params,
                              double c2, double s2) {
    if (&src == &dst) throw std::invalid_argument("floquet_step_into: src and dst must differ");
    const std::int64_t n = src.num_sites();
    const double half_t = params.half_period();
    const double h = params.h;
    const std::int32_t* nbt = src.geometry->neighbor_data();
    const double* sx = src.sx.data();
    const double* sy = src.sy.data();
    const double* sz = src.sz.data();
    double* ox = dst.sx.data();
    double* oy = dst.sy.data();
    double* oz = dst.sz.data();
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
        const std::int32_t* nb = nbt + 6 * i;
        const double kappa =
            h + (sz[nb[0]] + sz[nb[1]] + sz[nb[2]] + sz[nb[3]] + sz[nb[4]] + sz[nb[5]]) *
                    (1.0 / 6.0);
        double s1, c1;
        detail::sincos_pair(kappa * half_t, s1, c1);
        const double x = c1 * sx[i] - s1 * sy[i];
        const double y = s1 * sx[i] + c1 * sy[i];
        const double z = sz[i];
        ox[i] = x;
        oy[i] = c2 * y - s2 * z;
        oz[i] = s2 * y + c2 * z;
    }
}

/// One full drive period. Functional form; evolve() reuses buffers instead.
inline SpinLattice floquet_step(const SpinLattice& lattice, const DriveParams& params) {
    params.validate();
    SpinLattice out(lattice.geometry);
    double s2, c2;
    detail::sincos_pair(params.kick_angle(), s2, c2);
    floquet_step_into(lattice, out, params, c2, s2);
    return out;
}

/// Stroboscopic sampling schedule. "every" visits one period in `stride`;
/// "geometric" visits every period up to `dense_until`, then spaces samples
/// by the factor `growth` (denser early, sparse late).
struct SamplingPlan {
    std::int64_t stride = 1;
    std::int64_t dense_until = -1;  // < 0: pure stride mode
    double growth = 1.02;

    static SamplingPlan every(std::int64_t stride = 1) { return {stride, -1, 1.0}; }
    static SamplingPlan geometric(std::int64_t dense_until = 1000, double growth = 1.02) {
        return {1, dense_until, growth};
    }

    bool is_geometric() const noexcept { return dense_until >= 0; }

    void validate() const {
        if (stride < 1) throw std::invalid_argument("SamplingPlan: stride must be >= 1");
        if (is_geometric() && !(growth > 1.0))
            throw std::invalid_argument("SamplingPlan: growth must be > 1");
    }

    /// Smallest sampled period strictly greater than n (n >= 0 sampled == 0 base).
    std::int64_t next_after(std::int64_t n) const noexcept {
        if (!is_geometric()) return (n / stride + 1) * stride;
        if (n < dense_until) return n + 1;
        const auto grown = static_cast<std::int64_t>(std::ceil(static_cast<double>(n) * growth));
        return grown > n + 1 ? grown : n + 1;
    }
};

struct EvolveOptions {
    std::int64_t renorm_every = 1000;  // 0 disables periodic renormalization
    SamplingPlan sampling = SamplingPlan::every(1);
};

/// Observer contract: called with read-only state at sampled periods
/// (including period 0 before any step); returning false stops the run.
using EvolveObserver = std::function<bool(std::int64_t period, const SpinLattice&)>;
using TwinObserver =
    std::function<bool(std::int64_t period, const SpinLattice&, const SpinLattice&)>;

/// Applies the one-period map n_periods times. The returned lattice carries
/// no generation angles once at least one step ran.
inline SpinLattice evolve(SpinLattice state, const DriveParams& params, std::int64_t n_periods,
                          const EvolveOptions& options = {}, const EvolveObserver& observer = {}) {
    params.validate();
    options.sampling.validate();
    if (n_periods < 0) throw std::invalid_argument("evolve: n_periods must be >= 0");
    if (n_periods == 0) {
        if (observer) observer(0, state);
        return state;
    }
    state.angles.reset();
    double s2, c2;
    detail::sincos_pair(params.kick_angle(), s2, c2);
    SpinLattice buffer(state.geometry);
    std::int64_t next_sample = 0;
    if (observer && next_sample == 0) {
        if (!observer(0, state)) return state;
        next_sample = options.sampling.next_after(0);
    }
    for (std::int64_t n = 1; n <= n_periods; ++n) {
        floquet_step_into(state, buffer, params, c2, s2);
        std::swap(state, buffer);
        if (options.renorm_every > 0 && n % options.renorm_every == 0) state.renormalize();
        if (observer && n == next_sample) {
            if (!observer(n, state)) break;
            next_sample = options.sampling.next_after(n);
        }
    }
    return state;
}

/// Lockstep evolution of a reference configuration and its twin under the
/// same drive. The dynamics injects no randomness: identical inputs stay
/// identical forever.
inline std::pair<SpinLattice, SpinLattice> evolve_twin(SpinLattice a, SpinLattice b,
                                                       const DriveParams& params,
                                                       std::int64_t n_periods,
                                                       const EvolveOptions& options = {},
                                                       const TwinObserver& observer = {}) {
    params.validate();
    options.sampling.validate();
    if (n_periods < 0) throw std::invalid_argument("evolve_twin: n_periods must be >= 0");
    if (a.num_sites() != b.num_sites())
        throw std::invalid_argument("evolve_twin: copies must share the geometry");
    if (n_periods == 0) {
        if (observer) observer(0, a, b);
        return {std::move(a), std::move(b)};
    }
    a.angles.reset();
    b.angles.reset();
    double s2, c2;
    detail::sincos_pair(params.kick_angle(), s2, c2);
    SpinLattice buf_a(a.geometry);
    SpinLattice buf_b(b.geometry);
    std::int64_t next_sample = 0;
    if (observer && next_sample == 0) {
        if (!observer(0, a, b)) return {std::move(a), std::move(b)};
        next_sample = options.sampling.next_after(0);
    }
    for (std::int64_t n = 1; n <= n_periods; ++n) {
        floquet_step_into(a, buf_a, params, c2, s2);
        floquet_step_into(b, buf_b, params, c2, s2);
        std::swap(a, buf_a);
        std::swap(b, buf_b);
        if (options.renorm_every > 0 && n % options.renorm_every == 0) {
            a.renormalize();
            b.renormalize();
        }
        if (observer && n == next_sample) {
            if (!observer(n, a, b)) break;
            next_sample = options.sampling.next_after(n);
        }
    }
    return {std::move(a), std::move(b)};
}

}  // namespace spindrive
