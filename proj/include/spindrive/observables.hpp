// observables.hpp
// Diagnostics measured on spin configurations: magnetization, the two energy
// functionals of the binary drive, the twin-copy decorrelator, and 2D slices
// for rendering spatial snapshots. All of them are pure functions of their
// inputs.

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "spindrive/dynamics.hpp"
#include "spindrive/lattice.hpp"

namespace spindrive {

/// Decorrelator value for completely random, uncorrelated spins (sqrt(2)).
inline constexpr double kDecorrelatorInfinity = 1.4142135623730950488;

/// m = (1/N) sum of S^z.
inline double magnetization(const SpinLattice& lattice) noexcept {
    double sum = 0.0;
    for (const double z : lattice.sz) sum += z;
    return sum / static_cast<double>(lattice.sz.size());
}

namespace detail {
// Sum of S^z_r * S^z_r' over unordered nearest-neighbor pairs, each counted
// once (neighbors in the +x, +y, +z directions only).
inline double pair_zz_sum(const SpinLattice& lattice) noexcept {
    const LatticeGeometry& geo = *lattice.geometry;
    const std::int64_t n = geo.num_sites();
    const std::int32_t* nbt = geo.neighbor_data();
    const double* z = lattice.sz.data();
    double sum = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
        const std::int32_t* nb = nbt + 6 * i;
        sum += z[i] * (z[nb[0]] + z[nb[2]] + z[nb[4]]);
    }
    return sum;
}
}  // namespace detail

/// Interaction-half energy: (1/6) sum_<rr'> S^z S^z' + h sum_r S^z.
inline double energy_h1(const SpinLattice& lattice, const DriveParams& params) noexcept {
    double zsum = 0.0;
    for (const double z : lattice.sz) zsum += z;
    return detail::pair_zz_sum(lattice) * (1.0 / 6.0) + params.h * zsum;
}

/// Period-averaged energy:
/// (1/12) sum_<rr'> S^z S^z' + sum_r (h/2 S^z + omega*g S^x).
inline double energy_ht(const SpinLattice& lattice, const DriveParams& params) noexcept {
    double zsum = 0.0, xsum = 0.0;
    for (std::size_t i = 0; i < lattice.sz.size(); ++i) {
        zsum += lattice.sz[i];
        xsum += lattice.sx[i];
    }
    return detail::pair_zz_sum(lattice) * (1.0 / 12.0) + 0.5 * params.h * zsum +
           params.omega * params.g * xsum;
}

/// Root-mean-square spin distance between two copies:
/// d = sqrt( (1/N) sum_r |S_r - S'_r|^2 ).  Ranges over [0, 2].
inline double decorrelator(const SpinLattice& a, const SpinLattice& b) {
    if (!a.geometry || !b.geometry || a.geometry->edge() != b.geometry->edge())
        throw std::invalid_argument("decorrelator: lattices must share the geometry");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.sx.size(); ++i) {
        const double dx = a.sx[i] - b.sx[i];
        const double dy = a.sy[i] - b.sy[i];
        const double dz = a.sz[i] - b.sz[i];
        sum += dx * dx + dy * dy + dz * dz;
    }
    return std::sqrt(sum / static_cast<double>(a.sx.size()));
}

enum class Axis : int { x = 0, y = 1, z = 2 };

/// L x L arrays of the S^x and S^z components over one lattice plane.
/// For a z-normal slice the element (ix, iy) sits at index ix*L + iy
/// (row-major in the two in-plane coordinates, taken in x,y,z order).
struct SliceField {
    int edge = 0;
    Axis normal = Axis::z;
    int layer = 0;
    std::vector<double> sx, sz;

    double at_sx(int a, int b) const noexcept {
        return sx[static_cast<std::size_t>(a) * edge + b];
    }
    double at_sz(int a, int b) const noexcept {
        return sz[static_cast<std::size_t>(a) * edge + b];
    }
};

inline SliceField extract_slice(const SpinLattice& lattice, Axis normal, int layer) {
    const LatticeGeometry& geo = *lattice.geometry;
    const int L = geo.edge();
    if (layer < 0 || layer >= L)
        throw std::out_of_range("extract_slice: layer must be in [0, L)");
    SliceField field;
    field.edge = L;
    field.normal = normal;
    field.layer = layer;
    field.sx.resize(static_cast<std::size_t>(L) * L);
    field.sz.resize(static_cast<std::size_t>(L) * L);
    for (int a = 0; a < L; ++a)
        for (int b = 0; b < L; ++b) {
            std::int64_t site = 0;
            switch (normal) {
                case Axis::x: site = geo.site_index(layer, a, b); break;  // (a,b) = (iy,iz)
                case Axis::y: site = geo.site_index(a, layer, b); break;  // (a,b) = (ix,iz)
                case Axis::z: site = geo.site_index(a, b, layer); break;  // (a,b) = (ix,iy)
            }
            const auto out = static_cast<std::size_t>(a) * L + b;
            field.sx[out] = lattice.sx[static_cast<std::size_t>(site)];
            field.sz[out] = lattice.sz[static_cast<std::size_t>(site)];
        }
    return field;
}

/// Stroboscopic time series of the run diagnostics. All series share the
/// length of sample_periods; d stays empty for single-copy runs.
struct TrajectoryRecord {
    double period = 0.0;  // T, converts period indices to times
    std::vector<std::int64_t> sample_periods;
    std::vector<double> m;
    std::vector<double> h1;
    std::vector<double> ht;
    std::vector<double> d;

    bool has_decorrelator() const noexcept { return !d.empty(); }
    std::size_t size() const noexcept { return sample_periods.size(); }

    std::vector<double> times() const {
        std::vector<double> t(sample_periods.size());
        for (std::size_t i = 0; i < t.size(); ++i)
            t[i] = period * static_cast<double>(sample_periods[i]);
        return t;
    }
};

}  // namespace spindrive
