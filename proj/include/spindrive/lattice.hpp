// lattice.hpp
// Cubic-lattice geometry with periodic boundaries and the spin microstate:
// L^3 unit 3-vectors stored as structure-of-arrays, plus the random
// initial-condition recipes (near-polarized reference state, perturbed twin,
// uniformly random infinite-temperature state).

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spindrive/counter_rng.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace spindrive {

struct SpinVector {
    double x = 0.0;
    double y = 0.0;
    double z = 1.0;

    double norm2() const noexcept { return x * x + y * y + z * z; }
};

/// Cubic lattice of edge L with periodic wrap. Site index is
/// ix + L*(iy + L*iz), i.e. site-major in (iz, iy, ix) lexicographic order.
/// Neighbor slots are ordered +x, -x, +y, -y, +z, -z; for L = 2 the two
/// slots along an axis coincide and are counted with multiplicity.
class LatticeGeometry {
public:
    static LatticeGeometry cubic(int edge) {
        if (edge < 2)
            throw std::invalid_argument("LatticeGeometry: edge length L must be >= 2, got " +
                                        std::to_string(edge));
        LatticeGeometry geo;
        geo.edge_ = edge;
        geo.num_sites_ = static_cast<std::int64_t>(edge) * edge * edge;
        geo.neighbors_.resize(static_cast<std::size_t>(6 * geo.num_sites_));
        const int L = edge;
        for (int iz = 0; iz < L; ++iz)
            for (int iy = 0; iy < L; ++iy)
                for (int ix = 0; ix < L; ++ix) {
                    const std::int64_t i = geo.site_index(ix, iy, iz);
                    std::int32_t* nb = geo.neighbors_.data() + 6 * i;
                    nb[0] = static_cast<std::int32_t>(geo.site_index((ix + 1) % L, iy, iz));
                    nb[1] = static_cast<std::int32_t>(geo.site_index((ix + L - 1) % L, iy, iz));
                    nb[2] = static_cast<std::int32_t>(geo.site_index(ix, (iy + 1) % L, iz));
                    nb[3] = static_cast<std::int32_t>(geo.site_index(ix, (iy + L - 1) % L, iz));
                    nb[4] = static_cast<std::int32_t>(geo.site_index(ix, iy, (iz + 1) % L));
                    nb[5] = static_cast<std::int32_t>(geo.site_index(ix, iy, (iz + L - 1) % L));
                }
        return geo;
    }

    static std::shared_ptr<const LatticeGeometry> cubic_shared(int edge) {
        return std::make_shared<const LatticeGeometry>(cubic(edge));
    }

    int edge() const noexcept { return edge_; }
    std::int64_t num_sites() const noexcept { return num_sites_; }

    std::int64_t site_index(int ix, int iy, int iz) const noexcept {
        return static_cast<std::int64_t>(ix) +
               static_cast<std::int64_t>(edge_) * (static_cast<std::int64_t>(iy) +
                                                   static_cast<std::int64_t>(edge_) * iz);
    }

    std::array<int, 3> site_coords(std::int64_t index) const noexcept {
        const int ix = static_cast<int>(index % edge_);
        const int iy = static_cast<int>((index / edge_) % edge_);
        const int iz = static_cast<int>(index / (static_cast<std::int64_t>(edge_) * edge_));
        return {ix, iy, iz};
    }

    const std::int32_t* neighbors(std::int64_t site) const noexcept {
        return neighbors_.data() + 6 * site;
    }
    const std::int32_t* neighbor_data() const noexcept { return neighbors_.data(); }

private:
    int edge_ = 0;
    std::int64_t num_sites_ = 0;
    std::vector<std::int32_t> neighbors_;
};

/// Parameters of the random initial condition: polar angle drawn from a
/// Gaussian of standard deviation 2*pi*width, azimuth uniform on [0, 2*pi),
/// and twin perturbation of scale 2*pi*twin_delta in both angles.
struct InitialConditionSpec {
    double width = 0.1;       // W
    double twin_delta = 0.0;  // Delta
    std::uint64_t seed = 1;

    void validate() const {
        if (!(width >= 0.0))
            throw std::invalid_argument("InitialConditionSpec: width W must be >= 0");
        if (!(twin_delta >= 0.0))
            throw std::invalid_argument("InitialConditionSpec: twin_delta must be >= 0");
    }
};

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Spin configuration on a shared immutable geometry. Copies are independent
/// values. The generation angles are kept alongside the Cartesian components
/// so a twin can be perturbed in angle space; evolving a lattice drops them.
struct SpinLattice {
    std::shared_ptr<const LatticeGeometry> geometry;
    std::vector<double> sx, sy, sz;

    struct Angles {
        std::vector<double> theta, phi;
    };
    std::optional<Angles> angles;

    SpinLattice() = default;
    explicit SpinLattice(std::shared_ptr<const LatticeGeometry> geo)
        : geometry(std::move(geo)),
          sx(static_cast<std::size_t>(geometry->num_sites()), 0.0),
          sy(static_cast<std::size_t>(geometry->num_sites()), 0.0),
          sz(static_cast<std::size_t>(geometry->num_sites()), 1.0) {}

    std::int64_t num_sites() const noexcept { return geometry ? geometry->num_sites() : 0; }

    SpinVector site(std::int64_t i) const noexcept {
        const auto k = static_cast<std::size_t>(i);
        return {sx[k], sy[k], sz[k]};
    }
    void set_site(std::int64_t i, const SpinVector& s) noexcept {
        const auto k = static_cast<std::size_t>(i);
        sx[k] = s.x;
        sy[k] = s.y;
        sz[k] = s.z;
    }

    /// max over sites of | |S|^2 - 1 |.
    double max_norm2_error() const noexcept {
        double worst = 0.0;
        for (std::size_t i = 0; i < sx.size(); ++i) {
            const double e = std::fabs(sx[i] * sx[i] + sy[i] * sy[i] + sz[i] * sz[i] - 1.0);
            if (e > worst) worst = e;
        }
        return worst;
    }

    void renormalize() noexcept {
        for (std::size_t i = 0; i < sx.size(); ++i) {
            const double inv =
                1.0 / std::sqrt(sx[i] * sx[i] + sy[i] * sy[i] + sz[i] * sz[i]);
            sx[i] *= inv;
            sy[i] *= inv;
            sz[i] *= inv;
        }
    }

    bool identical_spins(const SpinLattice& other) const noexcept {
        if (sx.size() != other.sx.size()) return false;
        for (std::size_t i = 0; i < sx.size(); ++i)
            if (sx[i] != other.sx[i] || sy[i] != other.sy[i] || sz[i] != other.sz[i])
                return false;
        return true;
    }
};

namespace detail {
inline void spin_from_angles(double theta, double phi, double& x, double& y, double& z) noexcept {
    const double st = std::sin(theta);
    x = st * std::cos(phi);
    y = st * std::sin(phi);
    z = std::cos(theta);
}
}  // namespace detail

/// Reference initial condition: theta ~ N(0, (2 pi W)^2), phi ~ U[0, 2 pi).
/// Deterministic in (geometry, spec); draws are counter-indexed per site.
inline SpinLattice init_polarized(std::shared_ptr<const LatticeGeometry> geometry,
                                  const InitialConditionSpec& spec) {
    spec.validate();
    SpinLattice lat(std::move(geometry));
    const std::int64_t n = lat.num_sites();
    lat.angles.emplace();
    lat.angles->theta.resize(static_cast<std::size_t>(n));
    lat.angles->phi.resize(static_cast<std::size_t>(n));
    const double sigma = kTwoPi * spec.width;
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double theta =
            sigma * keyed_normal(spec.seed, static_cast<std::uint64_t>(i), rng_channel::theta);
        const double phi =
            kTwoPi * keyed_uniform(spec.seed, static_cast<std::uint64_t>(i), rng_channel::phi);
        lat.angles->theta[k] = theta;
        lat.angles->phi[k] = phi;
        detail::spin_from_angles(theta, phi, lat.sx[k], lat.sy[k], lat.sz[k]);
    }
    return lat;
}

/// Twin copy: perturbs the stored generation angles by 2*pi*Delta times a
/// per-site standard normal in both theta and phi. Requires the angles that
/// init_polarized stored; evolved lattices no longer carry them.
inline SpinLattice perturb_twin(const SpinLattice& lattice, const InitialConditionSpec& spec) {
    spec.validate();
    if (!lattice.angles)
        throw std::invalid_argument(
            "perturb_twin: lattice carries no generation angles (was it evolved?)");
    SpinLattice twin(lattice.geometry);
    const std::int64_t n = lattice.num_sites();
    twin.angles.emplace();
    twin.angles->theta.resize(static_cast<std::size_t>(n));
    twin.angles->phi.resize(static_cast<std::size_t>(n));
    const double scale = kTwoPi * spec.twin_delta;
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double theta =
            lattice.angles->theta[k] +
            scale * keyed_normal(spec.seed, static_cast<std::uint64_t>(i), rng_channel::twin_theta);
        const double phi =
            lattice.angles->phi[k] +
            scale * keyed_normal(spec.seed, static_cast<std::uint64_t>(i), rng_channel::twin_phi);
        twin.angles->theta[k] = theta;
        twin.angles->phi[k] = phi;
        detail::spin_from_angles(theta, phi, twin.sx[k], twin.sy[k], twin.sz[k]);
    }
    return twin;
}

/// Infinite-temperature state: spins uniform on the unit sphere.
inline SpinLattice init_infinite_temperature(std::shared_ptr<const LatticeGeometry> geometry,
                                             std::uint64_t seed) {
    SpinLattice lat(std::move(geometry));
    const std::int64_t n = lat.num_sites();
    lat.angles.emplace();
    lat.angles->theta.resize(static_cast<std::size_t>(n));
    lat.angles->phi.resize(static_cast<std::size_t>(n));
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const double z =
            2.0 * keyed_uniform(seed, static_cast<std::uint64_t>(i), rng_channel::random_z) - 1.0;
        const double phi =
            kTwoPi * keyed_uniform(seed, static_cast<std::uint64_t>(i), rng_channel::random_phi);
        const double st = std::sqrt(std::max(0.0, 1.0 - z * z));
        lat.sx[k] = st * std::cos(phi);
        lat.sy[k] = st * std::sin(phi);
        lat.sz[k] = z;
        lat.angles->theta[k] = std::acos(z);
        lat.angles->phi[k] = phi;
    }
    return lat;
}

/// Rigid lattice translation: result site (x+dx, y+dy, z+dz) takes the spin
/// of source site (x, y, z), indices wrapped periodically.
inline SpinLattice translate(const SpinLattice& lattice, int dx, int dy, int dz) {
    const LatticeGeometry& geo = *lattice.geometry;
    const int L = geo.edge();
    auto wrap = [L](int a) { return ((a % L) + L) % L; };
    SpinLattice out(lattice.geometry);
    if (lattice.angles) {
        out.angles.emplace();
        out.angles->theta.resize(lattice.angles->theta.size());
        out.angles->phi.resize(lattice.angles->phi.size());
    }
    for (int iz = 0; iz < L; ++iz)
        for (int iy = 0; iy < L; ++iy)
            for (int ix = 0; ix < L; ++ix) {
                const auto src = static_cast<std::size_t>(geo.site_index(ix, iy, iz));
                const auto dst = static_cast<std::size_t>(
                    geo.site_index(wrap(ix + dx), wrap(iy + dy), wrap(iz + dz)));
                out.sx[dst] = lattice.sx[src];
                out.sy[dst] = lattice.sy[src];
                out.sz[dst] = lattice.sz[src];
                if (lattice.angles) {
                    out.angles->theta[dst] = lattice.angles->theta[src];
                    out.angles->phi[dst] = lattice.angles->phi[src];
                }
            }
    return out;
}

}  // namespace spindrive
