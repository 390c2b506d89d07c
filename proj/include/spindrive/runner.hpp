// runner.hpp
// Single-run driver: evolves one configuration (or a twin pair) for a fixed
// number of drive periods while recording stroboscopic observables into a
// TrajectoryRecord. Adds the policy layers the raw evolve() loop does not
// know about: early stop once the decorrelator has saturated, periodic
// snapshot/checkpoint hooks, and assembly of the final result.

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "spindrive/dynamics.hpp"
#include "spindrive/observables.hpp"

namespace spindrive {

struct RunOptions {
    std::int64_t n_periods = 0;
    SamplingPlan sampling = SamplingPlan::every(1);
    std::int64_t renorm_every = 1000;

    // Early stop: end the run once the raw decorrelator has exceeded
    // `stop_when_d_above` (absolute value, not a fraction) at
    // `stop_confirm_samples` consecutive samples. 0 disables. Only
    // meaningful for twin runs.
    double stop_when_d_above = 0.0;
    int stop_confirm_samples = 25;

    // Called at sampled periods after observables are recorded; lets the
    // caller persist snapshots/checkpoints without the runner knowing about
    // files. Return value is ignored.
    std::function<void(std::int64_t period, const SpinLattice& state,
                       const SpinLattice* twin)>
        on_sample;

    void validate() const {
        if (n_periods < 0) throw std::invalid_argument("RunOptions: n_periods must be >= 0");
        sampling.validate();
        if (renorm_every < 0)
            throw std::invalid_argument("RunOptions: renorm_every must be >= 0");
        if (stop_when_d_above < 0.0)
            throw std::invalid_argument("RunOptions: stop_when_d_above must be >= 0");
        if (stop_confirm_samples < 1)
            throw std::invalid_argument("RunOptions: stop_confirm_samples must be >= 1");
    }
};

struct RunResult {
    TrajectoryRecord trajectory;
    SpinLattice final_state;
    std::optional<SpinLattice> final_twin;
    std::int64_t periods_completed = 0;
    bool stopped_early = false;
};

namespace detail {

inline void record_sample(TrajectoryRecord& rec, std::int64_t n, const SpinLattice& state,
                          const DriveParams& params) {
    rec.sample_periods.push_back(n);
    rec.m.push_back(magnetization(state));
    rec.h1.push_back(energy_h1(state, params));
    rec.ht.push_back(energy_ht(state, params));
}

}  // namespace detail

/// Evolves a single configuration, recording m, H1 and HT at sampled
/// periods. The decorrelator column stays empty.
inline RunResult run_single(SpinLattice initial, const DriveParams& params,
                            const RunOptions& options) {
    params.validate();
    options.validate();
    RunResult result;
    result.trajectory.period = params.period();
    EvolveOptions evolve_options{.renorm_every = options.renorm_every,
                                 .sampling = options.sampling};
    auto observer = [&](std::int64_t n, const SpinLattice& state) {
        detail::record_sample(result.trajectory, n, state, params);
        result.periods_completed = n;
        if (options.on_sample) options.on_sample(n, state, nullptr);
        return true;
    };
    result.final_state =
        evolve(std::move(initial), params, options.n_periods, evolve_options, observer);
    // A sparse plan may jump past the end; always record the final period.
    if (result.trajectory.sample_periods.back() != options.n_periods) {
        detail::record_sample(result.trajectory, options.n_periods, result.final_state, params);
        result.periods_completed = options.n_periods;
        if (options.on_sample) options.on_sample(options.n_periods, result.final_state, nullptr);
    }
    return result;
}

/// Evolves a reference/twin pair in lockstep, recording the decorrelator
/// alongside the reference-copy observables. With early stop enabled the
/// run ends once d has stayed above the threshold for the required number
/// of consecutive samples — by then the trace carries both crossings, so
/// the remaining periods would only burn time.
inline RunResult run_twin(SpinLattice initial, SpinLattice twin, const DriveParams& params,
                          const RunOptions& options) {
    params.validate();
    options.validate();
    RunResult result;
    result.trajectory.period = params.period();
    EvolveOptions evolve_options{.renorm_every = options.renorm_every,
                                 .sampling = options.sampling};
    int consecutive_above = 0;
    auto observer = [&](std::int64_t n, const SpinLattice& state, const SpinLattice& other) {
        detail::record_sample(result.trajectory, n, state, params);
        const double d = decorrelator(state, other);
        result.trajectory.d.push_back(d);
        result.periods_completed = n;
        if (options.on_sample) options.on_sample(n, state, &other);
        if (options.stop_when_d_above > 0.0) {
            consecutive_above = d > options.stop_when_d_above ? consecutive_above + 1 : 0;
            if (consecutive_above >= options.stop_confirm_samples && n < options.n_periods) {
                result.stopped_early = true;
                return false;
            }
        }
        return true;
    };
    auto [state, other] = evolve_twin(std::move(initial), std::move(twin), params,
                                      options.n_periods, evolve_options, observer);
    // A sparse plan may jump past the end; always record the final period.
    if (!result.stopped_early &&
        result.trajectory.sample_periods.back() != options.n_periods) {
        detail::record_sample(result.trajectory, options.n_periods, state, params);
        result.trajectory.d.push_back(decorrelator(state, other));
        result.periods_completed = options.n_periods;
        if (options.on_sample) options.on_sample(options.n_periods, state, &other);
    }
    result.final_state = std::move(state);
    result.final_twin = std::move(other);
    return result;
}

/// Continues a previously checkpointed single-copy run from `start_period`:
/// samples and renormalizations are scheduled on absolute period numbers, so
/// a run that was interrupted and resumed reproduces an uninterrupted run
/// bitwise.
inline RunResult run_single_from(SpinLattice state, std::int64_t start_period,
                                 const DriveParams& params, const RunOptions& options) {
    if (start_period < 0)
        throw std::invalid_argument("run_single_from: start_period must be >= 0");
    if (options.n_periods < start_period)
        throw std::invalid_argument("run_single_from: run already past n_periods");
    params.validate();
    options.validate();

    RunResult result;
    result.trajectory.period = params.period();
    EvolveOptions hop_options{.renorm_every = 0, .sampling = SamplingPlan::every(1)};
    std::int64_t n = start_period;
    std::int64_t next_sample = start_period;
    while (true) {
        if (n == next_sample) {
            detail::record_sample(result.trajectory, n, state, params);
            result.periods_completed = n;
            if (options.on_sample) options.on_sample(n, state, nullptr);
            next_sample = std::min(options.sampling.next_after(n), options.n_periods);
        }
        if (n >= options.n_periods) break;
        std::int64_t next_stop = next_sample;
        if (options.renorm_every > 0) {
            const std::int64_t boundary =
                (n / options.renorm_every + 1) * options.renorm_every;
            next_stop = std::min(next_stop, boundary);
        }
        state = evolve(std::move(state), params, next_stop - n, hop_options);
        n = next_stop;
        if (options.renorm_every > 0 && n % options.renorm_every == 0) state.renormalize();
    }
    result.final_state = std::move(state);
    return result;
}

/// Continues a previously checkpointed twin run from `start_period`: samples
/// and renormalizations are scheduled on absolute period numbers, so a run
/// that was interrupted and resumed reproduces an uninterrupted run bitwise.
inline RunResult run_twin_from(SpinLattice state, SpinLattice twin, std::int64_t start_period,
                               const DriveParams& params, const RunOptions& options) {
    if (start_period < 0)
        throw std::invalid_argument("run_twin_from: start_period must be >= 0");
    if (options.n_periods < start_period)
        throw std::invalid_argument("run_twin_from: run already past n_periods");
    params.validate();
    options.validate();

    RunResult result;
    result.trajectory.period = params.period();
    // Renormalization is applied here at absolute-period boundaries; the
    // inner evolve_twin hops must not add their own (locally numbered) one.
    EvolveOptions hop_options{.renorm_every = 0, .sampling = SamplingPlan::every(1)};
    std::int64_t n = start_period;
    std::int64_t next_sample = start_period;
    int consecutive_above = 0;
    while (true) {
        if (n == next_sample) {
            detail::record_sample(result.trajectory, n, state, params);
            const double d = decorrelator(state, twin);
            result.trajectory.d.push_back(d);
            result.periods_completed = n;
            if (options.on_sample) options.on_sample(n, state, &twin);
            if (options.stop_when_d_above > 0.0) {
                consecutive_above = d > options.stop_when_d_above ? consecutive_above + 1 : 0;
                if (consecutive_above >= options.stop_confirm_samples &&
                    n < options.n_periods) {
                    result.stopped_early = true;
                    break;
                }
            }
            next_sample = std::min(options.sampling.next_after(n), options.n_periods);
        }
        if (n >= options.n_periods) break;
        std::int64_t next_stop = next_sample;
        if (options.renorm_every > 0) {
            const std::int64_t boundary =
                (n / options.renorm_every + 1) * options.renorm_every;
            next_stop = std::min(next_stop, boundary);
        }
        std::tie(state, twin) =
            evolve_twin(std::move(state), std::move(twin), params, next_stop - n, hop_options);
        n = next_stop;
        if (options.renorm_every > 0 && n % options.renorm_every == 0) {
            state.renormalize();
            twin.renormalize();
        }
    }
    result.final_state = std::move(state);
    result.final_twin = std::move(twin);
    return result;
}

}  // namespace spindrive
