// reference_integrator.hpp
// Brute-force continuous-time integration of the precession equations, used
// as an independent correctness oracle for the analytic one-period map. Not
// meant for production runs: O(substeps) work per half-period instead of one
// rotation.
//
// Interaction half:  dS_r/dt = kappa_r (z_hat x S_r), kappa_r from the
//                    instantaneous neighbor configuration.
// Kick half:         dS_r/dt = 2*omega*g (x_hat x S_r).
// Classical fixed-step RK4, `substeps` steps per half-period. reference_step
// renormalizes once at the end of each half; reference_interaction_half
// returns the raw RK4 state so that the flow's exact S^z conservation stays
// visible bit for bit.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "spindrive/dynamics.hpp"
#include "spindrive/lattice.hpp"

namespace spindrive {

namespace detail {

struct SpinState {
    std::vector<double> x, y, z;

    explicit SpinState(std::size_t n) : x(n), y(n), z(n) {}
    explicit SpinState(const SpinLattice& lat) : x(lat.sx), y(lat.sy), z(lat.sz) {}
};

// dS/dt for the interaction half. The z-component rate is identically zero,
// so S^z (and with it every kappa_r) is conserved along the flow.
inline void interaction_derivative(const SpinState& s, const LatticeGeometry& geo, double h,
                                   SpinState& out) {
    const std::int64_t n = geo.num_sites();
    const std::int32_t* nbt = geo.neighbor_data();
    for (std::int64_t i = 0; i < n; ++i) {
        const std::int32_t* nb = nbt + 6 * i;
        const double kappa =
            h + (s.z[nb[0]] + s.z[nb[1]] + s.z[nb[2]] + s.z[nb[3]] + s.z[nb[4]] + s.z[nb[5]]) *
                    (1.0 / 6.0);
        const auto k = static_cast<std::size_t>(i);
        out.x[k] = -kappa * s.y[k];
        out.y[k] = kappa * s.x[k];
        out.z[k] = 0.0;
    }
}

// dS/dt for the kick half: uniform precession about x at rate 2*omega*g.
inline void kick_derivative(const SpinState& s, double rate, SpinState& out) {
    for (std::size_t k = 0; k < s.x.size(); ++k) {
        out.x[k] = 0.0;
        out.y[k] = -rate * s.z[k];
        out.z[k] = rate * s.y[k];
    }
}

template <typename Deriv>
inline void rk4_integrate(SpinState& s, double t_total, int substeps, Deriv&& deriv) {
    const std::size_t n = s.x.size();
    const double dt = t_total / substeps;
    SpinState k1(n), k2(n), k3(n), k4(n), tmp(n);
    auto axpy = [n](const SpinState& base, double a, const SpinState& d, SpinState& out) {
        for (std::size_t i = 0; i < n; ++i) {
            out.x[i] = base.x[i] + a * d.x[i];
            out.y[i] = base.y[i] + a * d.y[i];
            out.z[i] = base.z[i] + a * d.z[i];
        }
    };
    for (int step = 0; step < substeps; ++step) {
        deriv(s, k1);
        axpy(s, 0.5 * dt, k1, tmp);
        deriv(tmp, k2);
        axpy(s, 0.5 * dt, k2, tmp);
        deriv(tmp, k3);
        axpy(s, dt, k3, tmp);
        deriv(tmp, k4);
        for (std::size_t i = 0; i < n; ++i) {
            s.x[i] += dt / 6.0 * (k1.x[i] + 2.0 * k2.x[i] + 2.0 * k3.x[i] + k4.x[i]);
            s.y[i] += dt / 6.0 * (k1.y[i] + 2.0 * k2.y[i] + 2.0 * k3.y[i] + k4.y[i]);
            s.z[i] += dt / 6.0 * (k1.z[i] + 2.0 * k2.z[i] + 2.0 * k3.z[i] + k4.z[i]);
        }
    }
}

inline void renormalize_state(SpinState& s) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
        const double inv =
            1.0 / std::sqrt(s.x[i] * s.x[i] + s.y[i] * s.y[i] + s.z[i] * s.z[i]);
        s.x[i] *= inv;
        s.y[i] *= inv;
        s.z[i] *= inv;
    }
}

}  // namespace detail

/// Integrates one half-period of the interaction Hamiltonian only. No final
/// renormalization: the z rate is identically zero, so the returned S^z must
/// equal the input bitwise, and renormalizing would smudge that by an ulp.
inline SpinLattice reference_interaction_half(const SpinLattice& lattice,
                                              const DriveParams& params, int substeps) {
    params.validate();
    if (substeps < 100)
        throw std::invalid_argument("reference integrator: substeps must be >= 100");
    detail::SpinState s(lattice);
    const LatticeGeometry& geo = *lattice.geometry;
    detail::rk4_integrate(s, params.half_period(), substeps,
                          [&](const detail::SpinState& in, detail::SpinState& out) {
                              detail::interaction_derivative(in, geo, params.h, out);
                          });
    SpinLattice out(lattice.geometry);
    out.sx = std::move(s.x);
    out.sy = std::move(s.y);
    out.sz = std::move(s.z);
    return out;
}

/// One full drive period by direct integration of the Hamilton equations.
inline SpinLattice reference_step(const SpinLattice& lattice, const DriveParams& params,
                                  int substeps) {
    params.validate();
    if (substeps < 100)
        throw std::invalid_argument("reference integrator: substeps must be >= 100");
    detail::SpinState s(lattice);
    const LatticeGeometry& geo = *lattice.geometry;
    detail::rk4_integrate(s, params.half_period(), substeps,
                          [&](const detail::SpinState& in, detail::SpinState& out) {
                              detail::interaction_derivative(in, geo, params.h, out);
                          });
    detail::renormalize_state(s);
    const double kick_rate = 2.0 * params.omega * params.g;
    detail::rk4_integrate(s, params.half_period(), substeps,
                          [&](const detail::SpinState& in, detail::SpinState& out) {
                              detail::kick_derivative(in, kick_rate, out);
                          });
    detail::renormalize_state(s);
    SpinLattice out(lattice.geometry);
    out.sx = std::move(s.x);
    out.sy = std::move(s.y);
    out.sz = std::move(s.z);
    return out;
}

}  // namespace spindrive
