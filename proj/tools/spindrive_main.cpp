// spindrive_main.cpp
// Command-line front end for the simulator library.
//
//   spindrive run      one trajectory (single copy, or twin pair with
//                      decorrelator), plus spectrum and timescale analysis
//   spindrive sweep    ensembles over a g/omega/L grid, with per-point
//                      spectra and an optional heating-exponent fit
//   spindrive scaling  system-size study at fixed drive parameters
//   spindrive analyze  re-analysis of a previously written trajectory CSV
//
// Every subcommand reads an optional config file (`key = value` lines),
// then applies --set overrides and dedicated flags, in that order. Each run
// directory gets a manifest.json recording the exact configuration, its
// hash, timestamps and final status, so any CSV can be traced back to the
// parameters that produced it.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "spindrive/spindrive.hpp"

namespace fs = std::filesystem;
using namespace spindrive;

namespace {

constexpr const char* kVersion = "spindrive 1.0.0";

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Options shared by the simulation subcommands.
struct CommonArgs {
    std::string config_path;
    std::vector<std::string> sets;
    std::optional<int> L;
    std::optional<double> omega;
    std::optional<double> g;
    std::optional<double> delta;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> n_periods;
    std::optional<int> threads;
    std::optional<int> realizations;
    std::optional<std::string> outdir;

    void attach(CLI::App& cmd) {
        cmd.add_option("-c,--config", config_path, "config file (key = value lines)")
            ->check(CLI::ExistingFile);
        cmd.add_option("--set", sets, "override a config key, e.g. --set g=1/4")
            ->type_name("KEY=VALUE");
        cmd.add_option("-L,--edge", L, "lattice edge length");
        cmd.add_option("--omega", omega, "drive frequency");
        cmd.add_option("-g,--kick", g, "kick strength g");
        cmd.add_option("--delta", delta, "twin perturbation scale");
        cmd.add_option("--seed", seed, "base random seed");
        cmd.add_option("-n,--n-periods", n_periods, "number of drive periods");
        cmd.add_option("--threads", threads, "worker threads (0 = all cores)");
        cmd.add_option("--realizations", realizations, "ensemble realizations per point");
        cmd.add_option("-o,--outdir", outdir, "output directory");
    }

    RunConfig build() const {
        RunConfig config;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) throw std::runtime_error("cannot open config '" + config_path + "'");
            config = parse_config(in, config_path);
        }
        for (const std::string& entry : sets) {
            const auto eq = entry.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("--set expects KEY=VALUE, got '" + entry + "'");
            apply_config_entry(config, entry.substr(0, eq), entry.substr(eq + 1));
        }
        if (L) config.L = *L;
        if (omega) config.omega = *omega;
        if (g) config.g = *g;
        if (delta) config.delta = *delta;
        if (seed) config.seed = *seed;
        if (n_periods) config.n_periods = *n_periods;
        if (threads) config.threads = *threads;
        if (realizations) config.realizations = *realizations;
        if (outdir) config.outdir = *outdir;
        return config;
    }
};

Metadata base_metadata(const RunConfig& c) {
    Metadata meta;
    meta.emplace_back("L", std::to_string(c.L));
    meta.emplace_back("omega", detail::format_double(c.omega));
    meta.emplace_back("g", detail::format_double(c.g));
    meta.emplace_back("h", detail::format_double(c.h));
    meta.emplace_back("width", detail::format_double(c.width));
    meta.emplace_back("delta", detail::format_double(c.delta));
    meta.emplace_back("seed", std::to_string(c.seed));
    meta.emplace_back("n_periods", std::to_string(c.n_periods));
    return meta;
}

RunOptions run_options_from(const RunConfig& config) {
    RunOptions options;
    options.n_periods = config.n_periods;
    options.sampling = config.sampling_plan();
    options.renorm_every = config.renorm_every;
    if (config.stop_d_fraction > 0.0)
        options.stop_when_d_above = config.stop_d_fraction * kDecorrelatorInfinity;
    return options;
}

/// Writes the manifest twice per run: once up front (status "running") so a
/// crash leaves a traceable directory, once at the end with the outcome.
struct ManifestWriter {
    std::string path;
    RunConfig config;
    ManifestInfo info;

    ManifestWriter(const fs::path& outdir, const RunConfig& cfg, std::string command)
        : path((outdir / "manifest.json").string()), config(cfg) {
        info.tool_version = kVersion;
        info.command = std::move(command);
        info.started_utc = utc_now();
        write_manifest(path, config, info);
    }

    void finish(const std::string& status, const std::vector<std::string>& outputs,
                const std::string& error = {}) {
        info.status = status;
        info.finished_utc = utc_now();
        info.outputs = outputs;
        info.error = error;
        write_manifest(path, config, info);
    }
};

/// Spectrum of the recorded magnetization over the configured window, if the
/// samples there are consecutive periods (a geometric plan usually is not).
std::optional<SpectralResult> try_spectrum(const TrajectoryRecord& record,
                                           const RunConfig& config) {
    const std::int64_t end = std::min<std::int64_t>(
        config.spectrum_end,
        record.sample_periods.empty() ? 0 : record.sample_periods.back() + 1);
    if (end - config.spectrum_start < 16) return std::nullopt;
    const auto window = contiguous_window(record, config.spectrum_start, end);
    if (!window) return std::nullopt;
    return fourier_spectrum(*window, config.omega, config.order_candidates,
                            config.spectrum_start);
}

int cmd_run(const CommonArgs& args, bool resume) {
    RunConfig config = args.build();
    if (config.mode == RunMode::sweep || config.mode == RunMode::scaling)
        throw std::runtime_error("config mode '" + to_string(config.mode) +
                                 "' belongs to the " + to_string(config.mode) +
                                 " subcommand");
    if (config.mode == RunMode::twin && !(config.delta > 0.0))
        throw std::runtime_error("twin mode needs delta > 0 (or set mode = single)");
    if (config.mode == RunMode::single) config.delta = 0.0;
    config.validate();

    const fs::path outdir(config.outdir);
    fs::create_directories(outdir);
    ManifestWriter manifest(outdir, config, resume ? "run --resume" : "run");
    std::vector<std::string> outputs;
    try {
        const bool twin_mode = config.mode == RunMode::twin;
        RunOptions options = run_options_from(config);

        const std::string checkpoint_path = (outdir / "checkpoint.bin").string();
        const std::uint64_t cfg_hash = config_hash(config);
        std::set<std::int64_t> snapshots(config.snapshot_periods.begin(),
                                         config.snapshot_periods.end());
        std::int64_t last_checkpoint = 0;
        options.on_sample = [&](std::int64_t n, const SpinLattice& state,
                                const SpinLattice* twin) {
            if (snapshots.count(n)) {
                const std::string tag = std::to_string(n);
                const std::string snap = (outdir / ("snapshot_" + tag + ".bin")).string();
                write_lattice_binary(snap, state);
                outputs.push_back(snap);
                const std::string slice_path = (outdir / ("slice_" + tag + ".csv")).string();
                Metadata meta = base_metadata(config);
                meta.emplace_back("period", tag);
                write_slice_csv(slice_path,
                                extract_slice(state, config.slice_axis, config.slice_layer),
                                meta);
                outputs.push_back(slice_path);
            }
            if (config.checkpoint_every > 0 && n - last_checkpoint >= config.checkpoint_every &&
                n > 0) {
                Checkpoint cp;
                cp.config_hash = cfg_hash;
                cp.period = n;
                cp.state = state;
                if (twin) cp.twin = *twin;
                write_checkpoint(checkpoint_path, cp);
                last_checkpoint = n;
            }
        };

        RunResult result;
        TrajectoryRecord merged;
        if (resume) {
            Checkpoint cp = read_checkpoint(checkpoint_path);
            if (cp.config_hash != cfg_hash)
                throw std::runtime_error(
                    "checkpoint was written under a different configuration (hash mismatch); "
                    "refusing to resume");
            if (twin_mode && !cp.twin)
                throw std::runtime_error("checkpoint holds no twin copy but mode is twin");
            last_checkpoint = cp.period;
            TrajectoryFile previous =
                read_trajectory_csv((outdir / "trajectory.csv").string());
            if (twin_mode)
                result = run_twin_from(std::move(cp.state), std::move(*cp.twin), cp.period,
                                       config.drive_params(), options);
            else
                result = run_single_from(std::move(cp.state), cp.period,
                                         config.drive_params(), options);
            // Keep rows before the checkpoint, replace everything after.
            merged.period = result.trajectory.period;
            for (std::size_t i = 0; i < previous.record.size(); ++i) {
                if (previous.record.sample_periods[i] >= cp.period) break;
                merged.sample_periods.push_back(previous.record.sample_periods[i]);
                merged.m.push_back(previous.record.m[i]);
                merged.h1.push_back(previous.record.h1[i]);
                merged.ht.push_back(previous.record.ht[i]);
                if (previous.record.has_decorrelator())
                    merged.d.push_back(previous.record.d[i]);
            }
            for (std::size_t i = 0; i < result.trajectory.size(); ++i) {
                merged.sample_periods.push_back(result.trajectory.sample_periods[i]);
                merged.m.push_back(result.trajectory.m[i]);
                merged.h1.push_back(result.trajectory.h1[i]);
                merged.ht.push_back(result.trajectory.ht[i]);
                if (result.trajectory.has_decorrelator())
                    merged.d.push_back(result.trajectory.d[i]);
            }
        } else {
            const InitialConditionSpec init{config.width, config.delta, config.seed};
            SpinLattice state = init_polarized(LatticeGeometry::cubic_shared(config.L), init);
            if (twin_mode) {
                SpinLattice twin = perturb_twin(state, init);
                result = run_twin(std::move(state), std::move(twin), config.drive_params(),
                                  options);
            } else {
                result = run_single(std::move(state), config.drive_params(), options);
            }
            merged = std::move(result.trajectory);
        }

        const std::string trajectory_path = (outdir / "trajectory.csv").string();
        write_trajectory_csv(trajectory_path, merged, base_metadata(config));
        outputs.push_back(trajectory_path);

        if (const auto spectrum = try_spectrum(merged, config)) {
            const std::string spectrum_path = (outdir / "spectrum.csv").string();
            write_spectrum_csv(spectrum_path, *spectrum, base_metadata(config));
            outputs.push_back(spectrum_path);
            std::printf("spectrum: peak at %.6g (omega x %.4f), amplitude %.6g, order %s\n",
                        spectrum->peak_frequency, spectrum->peak_frequency / config.omega,
                        spectrum->peak_amplitude,
                        spectrum->detected_order ? spectrum->detected_order->str().c_str()
                                                 : "none");
        }

        if (merged.has_decorrelator()) {
            const TimescaleFit fit = analyze_timescales(merged);
            const std::string timescales_path = (outdir / "timescales.csv").string();
            write_timescales_csv(timescales_path, fit, base_metadata(config));
            outputs.push_back(timescales_path);
            std::printf("timescales: lambda %s, tau_pth %s, tau_th %s\n",
                        fit.lambda() ? detail::format_double(*fit.lambda()).c_str() : "n/a",
                        fit.tau_pth ? detail::format_double(*fit.tau_pth).c_str() : "n/a",
                        fit.tau_th ? detail::format_double(*fit.tau_th).c_str() : "n/a");
        }

        manifest.finish(result.stopped_early ? "stopped_early" : "complete", outputs);
        std::printf("run finished after %lld periods -> %s\n",
                    static_cast<long long>(result.periods_completed), config.outdir.c_str());
        return 0;
    } catch (const std::exception& e) {
        manifest.finish("failed", outputs, e.what());
        throw;
    }
}

int cmd_sweep(const CommonArgs& args) {
    RunConfig config = args.build();
    config.mode = RunMode::sweep;
    config.validate();

    const fs::path outdir(config.outdir);
    fs::create_directories(outdir);
    ManifestWriter manifest(outdir, config, "sweep");
    std::vector<std::string> outputs;
    try {
        SweepSpec sweep;
        sweep.edges = config.L_grid.empty() ? std::vector<int>{config.L} : config.L_grid;
        sweep.omegas = config.omega_grid;
        sweep.gs = config.g_grid;
        sweep.h = config.h;

        EnsembleSpec ensemble{config.realizations, config.seed, config.width, config.delta};
        const RunOptions options = run_options_from(config);
        const std::size_t total = sweep.points().size();

        const std::string sweep_path = (outdir / "sweep.csv").string();
        std::vector<SweepPointResult> done;
        const auto on_point = [&](std::size_t index, const SweepPointResult& point) {
            done.push_back(point);
            write_sweep_csv(sweep_path, done, base_metadata(config));
            std::fprintf(stderr, "sweep: point %zu/%zu (L=%d omega=%g g=%g)%s\n", index + 1,
                         total, point.point.edge, point.point.params.omega,
                         point.point.params.g, point.failed ? " FAILED" : "");
        };
        std::vector<SweepPointResult> results = run_sweep(
            sweep, options, ensemble, config.threads, /*keep_trajectories=*/true, on_point);
        write_sweep_csv(sweep_path, results, base_metadata(config));
        outputs.push_back(sweep_path);

        std::vector<SweepSpectrumRow> spectra;
        for (const SweepPointResult& point : results) {
            if (point.failed || point.ensemble.trajectories.empty()) continue;
            if (const auto s = try_spectrum(point.ensemble.trajectories.front(), config))
                spectra.push_back({point.point, *s});
        }
        if (!spectra.empty()) {
            const std::string spectra_path = (outdir / "sweep_spectra.csv").string();
            write_sweep_spectra_csv(spectra_path, spectra, base_metadata(config));
            outputs.push_back(spectra_path);
        }

        // A frequency sweep at one (L, g) point doubles as a heating study.
        if (sweep.omegas.size() >= 3 && sweep.gs.size() == 1 && sweep.edges.size() == 1) {
            std::vector<HeatingPoint> heating;
            for (const SweepPointResult& point : results) {
                HeatingPoint hp;
                hp.omega = point.point.params.omega;
                if (!point.failed) {
                    const ScalarStats stats = point.ensemble.tau_th_stats();
                    if (stats.count >= 1) hp.tau_th = stats.mean;
                }
                heating.push_back(hp);
            }
            try {
                const LineFit fit = fit_heating_exponent(heating);
                TimescaleFit summary;
                summary.heating = fit;
                const std::string heating_path = (outdir / "timescales.csv").string();
                write_timescales_csv(heating_path, summary, base_metadata(config));
                outputs.push_back(heating_path);
                std::printf("heating fit: ln tau_th = %.4f * omega + %.4f (r2 %.4f)\n",
                            fit.slope, fit.intercept, fit.r2);
            } catch (const std::exception& e) {
                std::fprintf(stderr, "heating fit skipped: %s\n", e.what());
            }
        }

        const bool any_failed =
            std::any_of(results.begin(), results.end(),
                        [](const SweepPointResult& p) { return p.failed; });
        manifest.finish(any_failed ? "complete_with_failures" : "complete", outputs);
        std::printf("sweep finished: %zu points -> %s\n", results.size(),
                    config.outdir.c_str());
        return 0;
    } catch (const std::exception& e) {
        manifest.finish("failed", outputs, e.what());
        throw;
    }
}

int cmd_scaling(const CommonArgs& args) {
    RunConfig config = args.build();
    config.mode = RunMode::scaling;
    config.validate();

    const fs::path outdir(config.outdir);
    fs::create_directories(outdir);
    ManifestWriter manifest(outdir, config, "scaling");
    std::vector<std::string> outputs;
    try {
        ScalingSpec scaling;
        if (!config.L_grid.empty()) scaling.edges = config.L_grid;

        EnsembleSpec ensemble{config.realizations, config.seed, config.width, config.delta};
        const RunOptions options = run_options_from(config);
        const std::string scaling_path = (outdir / "scaling.csv").string();

        std::vector<ScalingPointResult> done;
        const auto on_point = [&](std::size_t index, const ScalingPointResult& point) {
            done.push_back(point);
            write_scaling_csv(scaling_path, done, base_metadata(config));
            std::fprintf(stderr, "scaling: point %zu/%zu (L=%d, %d realizations)\n",
                         index + 1, scaling.edges.size(), point.edge, point.realizations);
        };
        std::vector<ScalingPointResult> results = run_scaling(
            scaling, config.drive_params(), options, ensemble, config.threads, on_point);
        write_scaling_csv(scaling_path, results, base_metadata(config));
        outputs.push_back(scaling_path);

        manifest.finish("complete", outputs);
        std::printf("scaling finished: %zu sizes -> %s\n", results.size(),
                    config.outdir.c_str());
        return 0;
    } catch (const std::exception& e) {
        manifest.finish("failed", outputs, e.what());
        throw;
    }
}

int cmd_analyze(const std::string& input, const CommonArgs& args) {
    RunConfig config = args.build();
    TrajectoryFile file = read_trajectory_csv(input);
    // The trajectory metadata carries the physical parameters; overrides
    // from the command line win so windows can be re-chosen freely.
    if (auto it = file.metadata.find("omega"); it != file.metadata.end() && !args.omega)
        config.omega = detail::parse_csv_double(it->second, input);

    const fs::path base = args.outdir ? fs::path(*args.outdir) : fs::path(input).parent_path();
    fs::create_directories(base.empty() ? "." : base);
    std::vector<std::string> outputs;

    if (const auto spectrum = try_spectrum(file.record, config)) {
        const std::string spectrum_path = (base / "spectrum.csv").string();
        write_spectrum_csv(spectrum_path, *spectrum);
        outputs.push_back(spectrum_path);
        std::printf("spectrum: peak at %.6g (omega x %.4f), amplitude %.6g, order %s\n",
                    spectrum->peak_frequency, spectrum->peak_frequency / config.omega,
                    spectrum->peak_amplitude,
                    spectrum->detected_order ? spectrum->detected_order->str().c_str()
                                             : "none");
    } else {
        std::fprintf(stderr,
                     "spectrum skipped: window [%lld, %lld) is not densely sampled\n",
                     static_cast<long long>(config.spectrum_start),
                     static_cast<long long>(config.spectrum_end));
    }

    if (file.record.has_decorrelator()) {
        const TimescaleFit fit = analyze_timescales(file.record);
        const std::string timescales_path = (base / "timescales.csv").string();
        write_timescales_csv(timescales_path, fit);
        outputs.push_back(timescales_path);
        std::printf("timescales: lambda %s, tau_pth %s, tau_th %s\n",
                    fit.lambda() ? detail::format_double(*fit.lambda()).c_str() : "n/a",
                    fit.tau_pth ? detail::format_double(*fit.tau_pth).c_str() : "n/a",
                    fit.tau_th ? detail::format_double(*fit.tau_th).c_str() : "n/a");
    }

    if (outputs.empty()) {
        std::fprintf(stderr, "analyze produced no outputs for '%s'\n", input.c_str());
        return 1;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"driven classical spin-lattice simulator"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    CommonArgs run_args;
    bool resume = false;
    CLI::App* run = app.add_subcommand("run", "evolve one configuration (or twin pair)");
    run_args.attach(*run);
    run->add_flag("--resume", resume, "continue from the checkpoint in outdir");

    CommonArgs sweep_args;
    CLI::App* sweep = app.add_subcommand("sweep", "ensembles over a g/omega/L grid");
    sweep_args.attach(*sweep);

    CommonArgs scaling_args;
    CLI::App* scaling = app.add_subcommand("scaling", "system-size study");
    scaling_args.attach(*scaling);

    CommonArgs analyze_args;
    std::string analyze_input;
    CLI::App* analyze = app.add_subcommand("analyze", "re-analyze a trajectory CSV");
    analyze->add_option("trajectory", analyze_input, "trajectory CSV to analyze")
        ->required()
        ->check(CLI::ExistingFile);
    analyze_args.attach(*analyze);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_args, resume);
        if (sweep->parsed()) return cmd_sweep(sweep_args);
        if (scaling->parsed()) return cmd_scaling(scaling_args);
        if (analyze->parsed()) return cmd_analyze(analyze_input, analyze_args);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
