// Magnetization, energies, decorrelator and slice extraction.
//
// Oracles: closed forms for uniform and checkerboard configurations worked
// out inline from the definitions, an independent all-ordered-pairs bond
// sum (counting every bond twice and halving, the opposite convention to
// the library's once-per-bond walk), and brute-force recomputations of the
// decorrelator from its definition.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "spindrive/dynamics.hpp"
#include "spindrive/observables.hpp"

using namespace spindrive;

namespace {

SpinLattice uniform_state(int L, double x, double y, double z) {
    SpinLattice lat(LatticeGeometry::cubic_shared(L));
    std::fill(lat.sx.begin(), lat.sx.end(), x);
    std::fill(lat.sy.begin(), lat.sy.end(), y);
    std::fill(lat.sz.begin(), lat.sz.end(), z);
    return lat;
}

SpinLattice random_state(int L, unsigned seed) {
    SpinLattice lat(LatticeGeometry::cubic_shared(L));
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t i = 0; i < lat.sx.size(); ++i) {
        const double z = 2.0 * u(eng) - 1.0;
        const double phi = kTwoPi * u(eng);
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        lat.sx[i] = r * std::cos(phi);
        lat.sy[i] = r * std::sin(phi);
        lat.sz[i] = z;
    }
    return lat;
}

// Independent bond sum: visit all 6 neighbors of every site (each bond
// twice) and halve.
double zz_bond_sum_oracle(const SpinLattice& lat) {
    double twice = 0.0;
    for (std::int64_t i = 0; i < lat.num_sites(); ++i) {
        const std::int32_t* nb = lat.geometry->neighbors(i);
        for (int dir = 0; dir < 6; ++dir)
            twice += lat.sz[static_cast<std::size_t>(i)] *
                     lat.sz[static_cast<std::size_t>(nb[dir])];
    }
    return 0.5 * twice;
}

double decorrelator_oracle(const SpinLattice& a, const SpinLattice& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.sx.size(); ++i) {
        const double dx = a.sx[i] - b.sx[i];
        const double dy = a.sy[i] - b.sy[i];
        const double dz = a.sz[i] - b.sz[i];
        sum += dx * dx + dy * dy + dz * dz;
    }
    return std::sqrt(sum / static_cast<double>(a.sx.size()));
}

}  // namespace

TEST_CASE("magnetization is the plain z average", "[observables]") {
    REQUIRE(magnetization(uniform_state(3, 0.0, 0.0, 1.0)) == 1.0);
    REQUIRE(magnetization(uniform_state(3, 1.0, 0.0, 0.0)) == 0.0);
    SpinLattice half = uniform_state(2, 0.0, 0.0, 1.0);
    for (std::size_t i = 0; i < 4; ++i) half.sz[i] = -1.0;  // 4 of 8 down
    REQUIRE_THAT(magnetization(half), Catch::Matchers::WithinAbs(0.0, 1e-16));
}

TEST_CASE("first-half energy matches closed forms", "[observables]") {
    const DriveParams params{2.86, 0.25, 0.1};
    const int L = 4;
    const double N = static_cast<double>(L) * L * L;

    // All up: 3N bonds of product +1 -> bond term 3N/6 = N/2; field h*N.
    REQUIRE_THAT(energy_h1(uniform_state(L, 0.0, 0.0, 1.0), params),
                 Catch::Matchers::WithinRel(N * 0.5 + 0.1 * N, 1e-14));

    // All down: bond term unchanged, field term flips sign.
    REQUIRE_THAT(energy_h1(uniform_state(L, 0.0, 0.0, -1.0), params),
                 Catch::Matchers::WithinRel(N * 0.5 - 0.1 * N, 1e-14));

    // In-plane: every z vanishes.
    REQUIRE(energy_h1(uniform_state(L, 1.0, 0.0, 0.0), params) == 0.0);

    // Checkerboard: every bond crosses sublattices -> product -1; field
    // term cancels site by site.
    SpinLattice board = uniform_state(L, 0.0, 0.0, 1.0);
    for (std::int64_t i = 0; i < board.num_sites(); ++i) {
        const auto [x, y, z] = board.geometry->site_coords(i);
        board.sz[static_cast<std::size_t>(i)] = ((x + y + z) % 2 == 0) ? 1.0 : -1.0;
    }
    REQUIRE_THAT(energy_h1(board, params), Catch::Matchers::WithinRel(-N * 0.5, 1e-14));
}

TEST_CASE("average-Hamiltonian energy matches closed forms", "[observables]") {
    const DriveParams params{2.86, 0.25, 0.1};
    const int L = 4;
    const double N = static_cast<double>(L) * L * L;

    // All up: bond term 3N/12 = N/4, field h/2 * N, no transverse part.
    REQUIRE_THAT(energy_ht(uniform_state(L, 0.0, 0.0, 1.0), params),
                 Catch::Matchers::WithinRel(N * 0.25 + 0.05 * N, 1e-14));

    // All along +x: only the kick term omega*g per site survives.
    REQUIRE_THAT(energy_ht(uniform_state(L, 1.0, 0.0, 0.0), params),
                 Catch::Matchers::WithinRel(params.omega * params.g * N, 1e-14));

    // Tilted uniform state exercises all three terms at once.
    const double ux = 0.6, uz = 0.8;
    const double expected =
        N * (3.0 * uz * uz / 12.0) + 0.5 * params.h * uz * N + params.omega * params.g * ux * N;
    REQUIRE_THAT(energy_ht(uniform_state(L, ux, 0.0, uz), params),
                 Catch::Matchers::WithinRel(expected, 1e-14));
}

TEST_CASE("bond sums agree with the all-ordered-pairs oracle", "[observables]") {
    const DriveParams params{3.2, 0.31, 0.17};
    for (unsigned seed : {1u, 2u, 3u}) {
        const SpinLattice lat = random_state(5, seed);
        double zsum = 0.0, xsum = 0.0;
        for (std::size_t i = 0; i < lat.sz.size(); ++i) {
            zsum += lat.sz[i];
            xsum += lat.sx[i];
        }
        const double bonds = zz_bond_sum_oracle(lat);
        REQUIRE_THAT(energy_h1(lat, params),
                     Catch::Matchers::WithinRel(bonds / 6.0 + params.h * zsum, 1e-12));
        REQUIRE_THAT(energy_ht(lat, params),
                     Catch::Matchers::WithinRel(bonds / 12.0 + 0.5 * params.h * zsum +
                                                    params.omega * params.g * xsum,
                                                1e-12));
    }
}

TEST_CASE("average Hamiltonian is near zero for infinite temperature", "[observables]") {
    // Every term averages to zero under the uniform sphere measure; for
    // N = 50^3 sites the residual is statistical. The bond term has
    // 3N bonds of variance (1/12)^2 * (1/3)^2-ish; use a generous 4-sigma
    // bound computed from the measured site variances instead of a magic
    // number.
    const DriveParams params{2.86, 0.25, 0.1};
    const SpinLattice lat = init_infinite_temperature(LatticeGeometry::cubic_shared(50), 123);
    const double N = static_cast<double>(lat.num_sites());
    // Var(z) = 1/3, Var(x) = 1/3 under the uniform measure. Independent
    // bonds approximation: Var(HT) ~ 3N/144 * Var(z)^2 + N h^2/4 Var(z)
    //                               + N (omega g)^2 Var(x).
    const double var =
        3.0 * N / 144.0 * (1.0 / 9.0) + N * 0.25 * params.h * params.h / 3.0 +
        N * params.omega * params.g * params.omega * params.g / 3.0;
    const double bound = 4.0 * std::sqrt(var);
    REQUIRE(std::abs(energy_ht(lat, params)) < bound);
    REQUIRE(std::abs(magnetization(lat)) < 4.0 / std::sqrt(3.0 * N));
}

TEST_CASE("decorrelator matches definition and landmarks", "[observables]") {
    const auto geo = LatticeGeometry::cubic_shared(4);

    SECTION("identical copies give zero") {
        const SpinLattice a = random_state(4, 9);
        REQUIRE(decorrelator(a, a) == 0.0);
    }

    SECTION("antipodal uniform copies give the maximum 2") {
        REQUIRE_THAT(decorrelator(uniform_state(4, 0.0, 0.0, 1.0),
                                  uniform_state(4, 0.0, 0.0, -1.0)),
                     Catch::Matchers::WithinAbs(2.0, 1e-15));
    }

    SECTION("orthogonal uniform copies give sqrt(2), the saturation value") {
        const double d = decorrelator(uniform_state(4, 0.0, 0.0, 1.0),
                                      uniform_state(4, 1.0, 0.0, 0.0));
        REQUIRE_THAT(d, Catch::Matchers::WithinAbs(kDecorrelatorInfinity, 1e-15));
    }

    SECTION("random pairs match the brute-force recomputation") {
        for (unsigned seed = 0; seed < 5; ++seed) {
            const SpinLattice a = random_state(4, seed);
            const SpinLattice b = random_state(4, seed + 100);
            REQUIRE_THAT(decorrelator(a, b),
                         Catch::Matchers::WithinAbs(decorrelator_oracle(a, b), 1e-14));
        }
    }

    SECTION("triangle inequality holds (pseudometric property)") {
        for (unsigned seed = 0; seed < 8; ++seed) {
            const SpinLattice a = random_state(3, 3 * seed);
            const SpinLattice b = random_state(3, 3 * seed + 1);
            const SpinLattice c = random_state(3, 3 * seed + 2);
            REQUIRE(decorrelator(a, c) <=
                    decorrelator(a, b) + decorrelator(b, c) + 1e-12);
        }
    }

    SECTION("mismatched geometries are rejected") {
        const SpinLattice a(geo);
        const SpinLattice b(LatticeGeometry::cubic_shared(5));
        REQUIRE_THROWS_AS(decorrelator(a, b), std::invalid_argument);
    }
}

TEST_CASE("two uncorrelated random states sit near saturation", "[observables]") {
    // E|S - S'|^2 = 2 - 2 E[S.S'] = 2 for independent uniform spins, so
    // d concentrates on sqrt(2) as N grows.
    const SpinLattice a = init_infinite_temperature(LatticeGeometry::cubic_shared(24), 1);
    const SpinLattice b = init_infinite_temperature(LatticeGeometry::cubic_shared(24), 2);
    REQUIRE_THAT(decorrelator(a, b),
                 Catch::Matchers::WithinRel(kDecorrelatorInfinity, 0.01));
}

TEST_CASE("slices pull the correct plane in every orientation", "[observables]") {
    const int L = 4;
    SpinLattice lat(LatticeGeometry::cubic_shared(L));
    for (std::int64_t i = 0; i < lat.num_sites(); ++i) {
        const auto [x, y, z] = lat.geometry->site_coords(i);
        const auto s = static_cast<std::size_t>(i);
        // Encode coordinates so any transposition is visible.
        lat.sx[s] = 100.0 * x + 10.0 * y + z;
        lat.sz[s] = x + 10.0 * y + 100.0 * z;
    }

    const SliceField zslice = extract_slice(lat, Axis::z, 2);
    REQUIRE(zslice.edge == L);
    for (int a = 0; a < L; ++a)
        for (int b = 0; b < L; ++b) {
            REQUIRE(zslice.at_sx(a, b) == 100.0 * a + 10.0 * b + 2.0);  // (a,b) = (ix,iy)
            REQUIRE(zslice.at_sz(a, b) == a + 10.0 * b + 200.0);
        }

    const SliceField xslice = extract_slice(lat, Axis::x, 1);
    for (int a = 0; a < L; ++a)
        for (int b = 0; b < L; ++b)
            REQUIRE(xslice.at_sx(a, b) == 100.0 + 10.0 * a + b);  // (a,b) = (iy,iz)

    const SliceField yslice = extract_slice(lat, Axis::y, 3);
    for (int a = 0; a < L; ++a)
        for (int b = 0; b < L; ++b)
            REQUIRE(yslice.at_sx(a, b) == 100.0 * a + 30.0 + b);  // (a,b) = (ix,iz)

    REQUIRE_THROWS_AS(extract_slice(lat, Axis::z, L), std::out_of_range);
    REQUIRE_THROWS_AS(extract_slice(lat, Axis::z, -1), std::out_of_range);
}

TEST_CASE("trajectory record times scale with the period", "[observables]") {
    TrajectoryRecord rec;
    rec.period = 2.0;
    rec.sample_periods = {0, 1, 5};
    rec.m = {0.1, 0.2, 0.3};
    rec.h1 = {0, 0, 0};
    rec.ht = {0, 0, 0};
    REQUIRE(rec.size() == 3);
    REQUIRE_FALSE(rec.has_decorrelator());
    REQUIRE(rec.times() == std::vector<double>{0.0, 2.0, 10.0});
}
