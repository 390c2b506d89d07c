// sweep.hpp
// Ensemble and parameter-sweep layers above the single-run driver.
// An ensemble repeats one parameter point over independently seeded initial
// conditions and aggregates the extracted timescales; a sweep walks a grid
// of drive parameters (and optionally system sizes), running one ensemble
// per point. Every realization derives its seed from the point's base seed
// and its own index, so results are independent of execution order.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "spindrive/counter_rng.hpp"
#include "spindrive/dynamics.hpp"
#include "spindrive/lattice.hpp"
#include "spindrive/parallel.hpp"
#include "spindrive/runner.hpp"
#include "spindrive/timescales.hpp"

namespace spindrive {

/// Mean and sample standard deviation of a batch of scalars. The spread is
/// absent (not zero) for batches of fewer than two values.
struct ScalarStats {
    int count = 0;
    double mean = 0.0;
    std::optional<double> stddev;

    std::optional<double> sem() const {
        if (!stddev || count < 1) return std::nullopt;
        return *stddev / std::sqrt(static_cast<double>(count));
    }
};

inline ScalarStats compute_stats(std::span<const double> values) {
    ScalarStats stats;
    stats.count = static_cast<int>(values.size());
    if (values.empty()) return stats;
    double sum = 0.0;
    for (double v : values) sum += v;
    stats.mean = sum / static_cast<double>(stats.count);
    if (stats.count < 2) return stats;
    double ss = 0.0;
    for (double v : values) {
        const double r = v - stats.mean;
        ss += r * r;
    }
    stats.stddev = std::sqrt(ss / static_cast<double>(stats.count - 1));
    return stats;
}

/// How many independently seeded copies of one parameter point to run.
struct EnsembleSpec {
    int realizations = 1;
    std::uint64_t base_seed = 1;
    double width = 0.1;       // initial-condition spread W
    double twin_delta = 0.0;  // 0 disables the twin copy (no decorrelator)

    void validate() const {
        if (realizations < 1)
            throw std::invalid_argument("EnsembleSpec: realizations must be >= 1");
        InitialConditionSpec{width, twin_delta, base_seed}.validate();
    }
};

struct EnsembleResult {
    std::vector<std::uint64_t> seeds;      // one per realization
    std::vector<TimescaleFit> fits;        // one per realization
    std::vector<TrajectoryRecord> trajectories;  // filled only when requested

    ScalarStats lambda_stats() const { return stats_over(&TimescaleFit::lambda); }
    ScalarStats tau_pth_stats() const {
        return stats_over([](const TimescaleFit& f) { return f.tau_pth; });
    }
    ScalarStats tau_th_stats() const {
        return stats_over([](const TimescaleFit& f) { return f.tau_th; });
    }

  private:
    template <typename Getter>
    ScalarStats stats_over(Getter get) const {
        std::vector<double> values;
        values.reserve(fits.size());
        for (const TimescaleFit& f : fits)
            if (auto v = std::invoke(get, f)) values.push_back(*v);
        return compute_stats(values);
    }
};

/// Runs `spec.realizations` independent copies of one parameter point.
/// Realization r uses seed derive_seed(base_seed, r); the result layout is
/// indexed by r, so threading never reorders anything.
inline EnsembleResult run_ensemble(const std::shared_ptr<const LatticeGeometry>& geometry,
                                   const DriveParams& params, const RunOptions& run_options,
                                   const EnsembleSpec& spec, int threads = 1,
                                   bool keep_trajectories = false) {
    spec.validate();
    params.validate();
    run_options.validate();
    EnsembleResult result;
    const auto R = static_cast<std::size_t>(spec.realizations);
    result.seeds.resize(R);
    result.fits.resize(R);
    if (keep_trajectories) result.trajectories.resize(R);

    parallel_for_tasks(spec.realizations, threads, [&](std::int64_t r) {
        const std::uint64_t seed = derive_seed(spec.base_seed, static_cast<std::uint64_t>(r));
        const InitialConditionSpec init{spec.width, spec.twin_delta, seed};
        SpinLattice state = init_polarized(geometry, init);
        RunResult run;
        if (spec.twin_delta > 0.0) {
            SpinLattice twin = perturb_twin(state, init);
            run = run_twin(std::move(state), std::move(twin), params, run_options);
        } else {
            run = run_single(std::move(state), params, run_options);
        }
        const auto i = static_cast<std::size_t>(r);
        result.seeds[i] = seed;
        result.fits[i] = analyze_timescales(run.trajectory);
        if (keep_trajectories) result.trajectories[i] = std::move(run.trajectory);
    });
    return result;
}

/// One grid point of a parameter sweep.
struct SweepPoint {
    int edge = 8;  // lattice edge length L
    DriveParams params;
};

/// A sweep runs ensembles over the cross product of the provided grids.
struct SweepSpec {
    std::vector<int> edges = {8};
    std::vector<double> omegas;
    std::vector<double> gs;
    double h = 0.1;

    std::vector<SweepPoint> points() const {
        if (edges.empty() || omegas.empty() || gs.empty())
            throw std::invalid_argument("SweepSpec: every grid needs at least one value");
        std::vector<SweepPoint> out;
        out.reserve(edges.size() * omegas.size() * gs.size());
        for (int L : edges)
            for (double omega : omegas)
                for (double g : gs) out.push_back({L, DriveParams{omega, g, h}});
        return out;
    }
};

/// Outcome of one sweep point. A point that throws is recorded as failed
/// (with the message) and the sweep moves on; one pathological corner must
/// not discard hours of neighboring results.
struct SweepPointResult {
    SweepPoint point;
    bool failed = false;
    std::string error;
    EnsembleResult ensemble;
};

inline std::vector<SweepPointResult> run_sweep(
    const SweepSpec& sweep, const RunOptions& run_options, const EnsembleSpec& ensemble,
    int threads = 1, bool keep_trajectories = false,
    const std::function<void(std::size_t index, const SweepPointResult&)>& on_point = {}) {
    const std::vector<SweepPoint> points = sweep.points();
    std::vector<SweepPointResult> results;
    results.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        SweepPointResult r;
        r.point = points[i];
        try {
            // Stream the point index into the seed so grid points are
            // statistically independent even at equal base seeds.
            EnsembleSpec point_spec = ensemble;
            point_spec.base_seed =
                derive_seed(ensemble.base_seed, 0x5eed0000ULL + static_cast<std::uint64_t>(i));
            const auto geometry = LatticeGeometry::cubic_shared(points[i].edge);
            r.ensemble = run_ensemble(geometry, points[i].params, run_options, point_spec,
                                      threads, keep_trajectories);
        } catch (const std::exception& e) {
            r.failed = true;
            r.error = e.what();
        }
        if (on_point) on_point(i, r);
        results.push_back(std::move(r));
    }
    return results;
}

/// System-size scaling study at fixed drive parameters: one ensemble per
/// edge length, with the realization count scaled so every size sees a
/// comparable total number of spins (ceil(reference_volume / L^3)).
struct ScalingSpec {
    std::vector<int> edges = {8, 12, 16, 20};
    double reference_volume = 28.0 * 28.0 * 28.0;

    int realizations_for(int edge) const {
        if (edge < 2) throw std::invalid_argument("ScalingSpec: edge must be >= 2");
        const double volume = static_cast<double>(edge) * edge * edge;
        return static_cast<int>(std::ceil(reference_volume / volume));
    }
};

struct ScalingPointResult {
    int edge = 0;
    int realizations = 0;
    EnsembleResult ensemble;
};

inline std::vector<ScalingPointResult> run_scaling(
    const ScalingSpec& scaling, const DriveParams& params, const RunOptions& run_options,
    const EnsembleSpec& ensemble, int threads = 1,
    const std::function<void(std::size_t index, const ScalingPointResult&)>& on_point = {}) {
    std::vector<ScalingPointResult> results;
    results.reserve(scaling.edges.size());
    for (std::size_t i = 0; i < scaling.edges.size(); ++i) {
        const int L = scaling.edges[i];
        ScalingPointResult r;
        r.edge = L;
        r.realizations = scaling.realizations_for(L);
        EnsembleSpec point_spec = ensemble;
        point_spec.realizations = r.realizations;
        point_spec.base_seed =
            derive_seed(ensemble.base_seed, 0x5ca1e000ULL + static_cast<std::uint64_t>(L));
        r.ensemble = run_ensemble(LatticeGeometry::cubic_shared(L), params, run_options,
                                  point_spec, threads, /*keep_trajectories=*/false);
        if (on_point) on_point(i, r);
        results.push_back(std::move(r));
    }
    return results;
}

}  // namespace spindrive
