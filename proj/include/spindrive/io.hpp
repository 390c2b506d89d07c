// io.hpp
// On-disk artifacts: CSV tables for trajectories, spectra and ensemble
// summaries, raw lattice snapshots (text and binary), versioned binary
// checkpoints for resumable runs, and the JSON run manifest. All numeric
// text uses %.17g so a written double reads back bit-identically; nothing
// here embeds wall-clock time except the manifest, which exists to record
// it. Binary files carry a magic tag and are native-endian.

#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "spindrive/config.hpp"
#include "spindrive/lattice.hpp"
#include "spindrive/observables.hpp"
#include "spindrive/spectrum.hpp"
#include "spindrive/sweep.hpp"

namespace spindrive {

/// Ordered key/value pairs emitted as `# key = value` lines atop CSV files.
using Metadata = std::vector<std::pair<std::string, std::string>>;

namespace detail {

inline std::ofstream open_output(const std::string& path, std::ios::openmode mode = {}) {
    std::ofstream out(path, mode);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    return out;
}

inline std::ifstream open_input(const std::string& path, std::ios::openmode mode = {}) {
    std::ifstream in(path, mode);
    if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
    return in;
}

inline void write_metadata(std::ostream& out, std::string_view format,
                           const Metadata& metadata) {
    out << "# format = " << format << "\n";
    for (const auto& [key, value] : metadata) out << "# " << key << " = " << value << "\n";
}

/// Reads the `# key = value` block; leaves the stream at the header row.
inline std::map<std::string, std::string> read_metadata(std::istream& in,
                                                        const std::string& path) {
    std::map<std::string, std::string> meta;
    while (in.peek() == '#') {
        std::string line;
        std::getline(in, line);
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ": malformed metadata line '" + line + "'");
        std::string key(trim(std::string_view(line).substr(1, eq - 1)));
        std::string value(trim(std::string_view(line).substr(eq + 1)));
        meta.emplace(std::move(key), std::move(value));
    }
    return meta;
}

inline double parse_csv_double(std::string_view cell, const std::string& path) {
    const std::string owned(cell);
    char* end = nullptr;
    const double v = std::strtod(owned.c_str(), &end);
    if (end == owned.c_str() || *end != '\0')
        throw std::runtime_error(path + ": bad numeric cell '" + owned + "'");
    return v;
}

/// Commas and newlines inside free-text cells would break the table.
inline std::string sanitize_cell(std::string text) {
    for (char& ch : text)
        if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
    return text;
}

inline std::string opt_cell(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string{};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Trajectory tables

inline void write_trajectory_csv(const std::string& path, const TrajectoryRecord& record,
                                 const Metadata& metadata = {}) {
    std::ofstream out = detail::open_output(path);
    Metadata meta = metadata;
    meta.emplace_back("period_T", detail::format_double(record.period));
    detail::write_metadata(out, "spindrive-trajectory-1", meta);
    const bool has_d = record.has_decorrelator();
    if (has_d && record.d.size() != record.size())
        throw std::invalid_argument("write_trajectory_csv: ragged decorrelator column");
    out << (has_d ? "n,t,m,h1,ht,d\n" : "n,t,m,h1,ht\n");
    for (std::size_t i = 0; i < record.size(); ++i) {
        out << record.sample_periods[i] << ','
            << detail::format_double(record.period * static_cast<double>(record.sample_periods[i]))
            << ',' << detail::format_double(record.m[i]) << ','
            << detail::format_double(record.h1[i]) << ','
            << detail::format_double(record.ht[i]);
        if (has_d) out << ',' << detail::format_double(record.d[i]);
        out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

struct TrajectoryFile {
    TrajectoryRecord record;
    std::map<std::string, std::string> metadata;
};

inline TrajectoryFile read_trajectory_csv(const std::string& path) {
    std::ifstream in = detail::open_input(path);
    TrajectoryFile file;
    file.metadata = detail::read_metadata(in, path);
    if (auto it = file.metadata.find("format");
        it == file.metadata.end() || it->second != "spindrive-trajectory-1")
        throw std::runtime_error(path + ": not a spindrive trajectory file");
    file.record.period = detail::parse_csv_double(file.metadata.at("period_T"), path);
    std::string header;
    std::getline(in, header);
    const bool has_d = header == "n,t,m,h1,ht,d";
    if (!has_d && header != "n,t,m,h1,ht")
        throw std::runtime_error(path + ": unexpected column header '" + header + "'");
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cells = detail::split(line, ',');
        if (cells.size() != (has_d ? 6u : 5u))
            throw std::runtime_error(path + ": wrong cell count in row '" + line + "'");
        file.record.sample_periods.push_back(
            static_cast<std::int64_t>(detail::parse_csv_double(cells[0], path)));
        file.record.m.push_back(detail::parse_csv_double(cells[2], path));
        file.record.h1.push_back(detail::parse_csv_double(cells[3], path));
        file.record.ht.push_back(detail::parse_csv_double(cells[4], path));
        if (has_d) file.record.d.push_back(detail::parse_csv_double(cells[5], path));
    }
    return file;
}

// ---------------------------------------------------------------------------
// Spectrum tables

inline void write_spectrum_csv(const std::string& path, const SpectralResult& spectrum,
                               const Metadata& metadata = {}) {
    std::ofstream out = detail::open_output(path);
    Metadata meta = metadata;
    meta.emplace_back("omega", detail::format_double(spectrum.omega));
    meta.emplace_back("window_start", std::to_string(spectrum.window_start));
    meta.emplace_back("window_length", std::to_string(spectrum.window_length));
    meta.emplace_back("peak_bin", std::to_string(spectrum.peak_bin));
    meta.emplace_back("peak_frequency", detail::format_double(spectrum.peak_frequency));
    meta.emplace_back("peak_amplitude", detail::format_double(spectrum.peak_amplitude));
    meta.emplace_back("median_amplitude", detail::format_double(spectrum.median_amplitude));
    meta.emplace_back("has_peak", spectrum.has_peak ? "1" : "0");
    meta.emplace_back("detected_order",
                      spectrum.detected_order ? spectrum.detected_order->str() : "none");
    detail::write_metadata(out, "spindrive-spectrum-1", meta);
    out << "k,frequency,amplitude\n";
    for (std::size_t k = 0; k < spectrum.amplitude.size(); ++k)
        out << k << ',' << detail::format_double(spectrum.frequency[k]) << ','
            << detail::format_double(spectrum.amplitude[k]) << '\n';
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

/// One sweep point together with the spectral analysis of its trajectory;
/// the rows of the n-DTC phase map.
struct SweepSpectrumRow {
    SweepPoint point;
    SpectralResult spectrum;
};

inline void write_sweep_spectra_csv(const std::string& path,
                                    const std::vector<SweepSpectrumRow>& rows,
                                    const Metadata& metadata = {}) {
    std::ofstream out = detail::open_output(path);
    detail::write_metadata(out, "spindrive-sweep-spectra-1", metadata);
    out << "L,omega,g,window_length,peak_bin,peak_frequency,peak_amplitude,"
           "median_amplitude,has_peak,detected_order\n";
    for (const SweepSpectrumRow& row : rows) {
        const SpectralResult& s = row.spectrum;
        out << row.point.edge << ',' << detail::format_double(row.point.params.omega) << ','
            << detail::format_double(row.point.params.g) << ',' << s.window_length << ','
            << s.peak_bin << ',' << detail::format_double(s.peak_frequency) << ','
            << detail::format_double(s.peak_amplitude) << ','
            << detail::format_double(s.median_amplitude) << ',' << (s.has_peak ? 1 : 0)
            << ',' << (s.detected_order ? s.detected_order->str() : "none") << '\n';
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Timescale summary for a single run

inline void write_timescales_csv(const std::string& path, const TimescaleFit& fit,
                                 const Metadata& metadata = {}) {
    std::ofstream out = detail::open_output(path);
    detail::write_metadata(out, "spindrive-timescales-1", metadata);
    out << "quantity,value,stderr,r2\n";
    if (fit.lyapunov)
        out << "lambda," << detail::format_double(fit.lyapunov->slope) << ','
            << detail::format_double(fit.lyapunov->slope_stderr) << ','
            << detail::format_double(fit.lyapunov->r2) << '\n';
    if (fit.tau_pth) out << "tau_pth," << detail::format_double(*fit.tau_pth) << ",,\n";
    if (fit.tau_th) out << "tau_th," << detail::format_double(*fit.tau_th) << ",,\n";
    if (fit.heating)
        out << "heating_c," << detail::format_double(fit.heating->slope) << ','
            << detail::format_double(fit.heating->slope_stderr) << ','
            << detail::format_double(fit.heating->r2) << '\n';
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Ensemble / sweep / scaling summaries

inline void append_stats(Metadata& meta, const std::string& prefix, const ScalarStats& stats) {
    meta.emplace_back(prefix + "_count", std::to_string(stats.count));
    if (stats.count >= 1) meta.emplace_back(prefix + "_mean", detail::format_double(stats.mean));
    if (stats.stddev)
        meta.emplace_back(prefix + "_stddev", detail::format_double(*stats.stddev));
}

inline void write_ensemble_csv(const std::string& path, const EnsembleResult& ensemble,
                               const Metadata& metadata = {}) {
    std::ofstream out = detail::open_output(path);
    Metadata meta = metadata;
    append_stats(meta, "lambda", ensemble.lambda_stats());
    append_stats(meta, "tau_pth", ensemble.tau_pth_stats());
    append_stats(meta, "tau_th", ensemble.tau_th_stats());
    detail::write_metadata(out, "spindrive-ensemble-1", meta);
    out << "realization,seed,lambda,lambda_stderr,lambda_r2,tau_pth,tau_th\n";
    for (std::size_t r = 0; r < ensemble.fits.size(); ++r) {
        const TimescaleFit& fit = ensemble.fits[r];
        out << r << ',' << ensemble.seeds[r] << ',';
        if (fit.lyapunov)
            out << detail::format_double(fit.lyapunov->slope) << ','
                << detail::format_double(fit.lyapunov->slope_stderr) << ','
                << detail::format_double(fit.lyapunov->r2);
        else
            out << ",,";
        out << ',' << detail::opt_cell(fit.tau_pth) << ',' << detail::opt_cell(fit.tau_th)
            << '\n';
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline void write_sweep_csv(const std::string& path,
                            const std::vector<SweepPointResult>& points,
                            const Metadata& metadata = {}) {
    std::ofstream out = detail::open_output(path);
    detail::write_metadata(out, "spindrive-sweep-1", metadata);
    out << "L,omega,g,failed,realizations,lambda_mean,lambda_sem,tau_pth_mean,tau_pth_sem,"
           "tau_th_mean,tau_th_sem,error\n";
    for (const SweepPointResult& p : points) {
        out << p.point.edge << ',' << detail::format_double(p.point.params.omega) << ','
            << detail::format_double(p.point.params.g) << ',' << (p.failed ? 1 : 0) << ','
            << p.ensemble.fits.size() << ',';
        const auto emit = [&](const ScalarStats& s) {
            out << (s.count >= 1 ? detail::format_double(s.mean) : std::string{}) << ','
                << detail::opt_cell(s.sem()) << ',';
        };
        emit(p.ensemble.lambda_stats());
        emit(p.ensemble.tau_pth_stats());
        emit(p.ensemble.tau_th_stats());
        out << detail::sanitize_cell(p.error) << '\n';
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline void write_scaling_csv(const std::string& path,
                              const std::vector<ScalingPointResult>& points,
                              const Metadata& metadata = {}) {
    std::ofstream out = detail::open_output(path);
    detail::write_metadata(out, "spindrive-scaling-1", metadata);
    out << "L,realizations,lambda_mean,lambda_sem,tau_pth_mean,tau_pth_sem,tau_th_mean,"
           "tau_th_sem\n";
    for (const ScalingPointResult& p : points) {
        out << p.edge << ',' << p.realizations << ',';
        const auto emit = [&](const ScalarStats& s, bool last) {
            out << (s.count >= 1 ? detail::format_double(s.mean) : std::string{}) << ','
                << detail::opt_cell(s.sem()) << (last ? '\n' : ',');
        };
        emit(p.ensemble.lambda_stats(), false);
        emit(p.ensemble.tau_pth_stats(), false);
        emit(p.ensemble.tau_th_stats(), true);
    }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Lattice snapshots

inline void write_lattice_csv(const std::string& path, const SpinLattice& lattice,
                              const Metadata& metadata = {}) {
    std::ofstream out = detail::open_output(path);
    Metadata meta = metadata;
    meta.emplace_back("L", std::to_string(lattice.geometry->edge()));
    detail::write_metadata(out, "spindrive-lattice-1", meta);
    out << "ix,iy,iz,sx,sy,sz\n";
    const int L = lattice.geometry->edge();
    for (int iz = 0; iz < L; ++iz)
        for (int iy = 0; iy < L; ++iy)
            for (int ix = 0; ix < L; ++ix) {
                const std::int64_t i = lattice.geometry->site_index(ix, iy, iz);
                const auto s = static_cast<std::size_t>(i);
                out << ix << ',' << iy << ',' << iz << ','
                    << detail::format_double(lattice.sx[s]) << ','
                    << detail::format_double(lattice.sy[s]) << ','
                    << detail::format_double(lattice.sz[s]) << '\n';
            }
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline void write_slice_csv(const std::string& path, const SliceField& slice,
                            const Metadata& metadata = {}) {
    std::ofstream out = detail::open_output(path);
    Metadata meta = metadata;
    meta.emplace_back("L", std::to_string(slice.edge));
    meta.emplace_back("normal", to_string(slice.normal));
    meta.emplace_back("layer", std::to_string(slice.layer));
    detail::write_metadata(out, "spindrive-slice-1", meta);
    out << "a,b,sx,sz\n";
    for (int a = 0; a < slice.edge; ++a)
        for (int b = 0; b < slice.edge; ++b)
            out << a << ',' << b << ',' << detail::format_double(slice.at_sx(a, b)) << ','
                << detail::format_double(slice.at_sz(a, b)) << '\n';
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

namespace detail {

inline constexpr char kLatticeMagic[8] = {'S', 'P', 'D', 'L', 'A', 'T', '0', '1'};
inline constexpr char kCheckpointMagic[8] = {'S', 'P', 'D', 'C', 'H', 'K', '0', '1'};

inline void write_lattice_payload(std::ostream& out, const SpinLattice& lattice) {
    const std::int32_t edge = lattice.geometry->edge();
    out.write(reinterpret_cast<const char*>(&edge), sizeof edge);
    const auto write_array = [&out](const std::vector<double>& v) {
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * sizeof(double)));
    };
    write_array(lattice.sx);
    write_array(lattice.sy);
    write_array(lattice.sz);
}

inline SpinLattice read_lattice_payload(std::istream& in, const std::string& path) {
    std::int32_t edge = 0;
    in.read(reinterpret_cast<char*>(&edge), sizeof edge);
    if (!in || edge < 2) throw std::runtime_error(path + ": corrupt lattice payload");
    SpinLattice lattice(LatticeGeometry::cubic_shared(edge));
    const auto read_array = [&](std::vector<double>& v) {
        in.read(reinterpret_cast<char*>(v.data()),
                static_cast<std::streamsize>(v.size() * sizeof(double)));
    };
    read_array(lattice.sx);
    read_array(lattice.sy);
    read_array(lattice.sz);
    if (!in) throw std::runtime_error(path + ": truncated lattice payload");
    return lattice;
}

}  // namespace detail

inline void write_lattice_binary(const std::string& path, const SpinLattice& lattice) {
    std::ofstream out = detail::open_output(path, std::ios::binary);
    out.write(detail::kLatticeMagic, sizeof detail::kLatticeMagic);
    detail::write_lattice_payload(out, lattice);
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline SpinLattice read_lattice_binary(const std::string& path) {
    std::ifstream in = detail::open_input(path, std::ios::binary);
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, detail::kLatticeMagic, sizeof magic) != 0)
        throw std::runtime_error(path + ": not a spindrive lattice file");
    return detail::read_lattice_payload(in, path);
}

// ---------------------------------------------------------------------------
// Checkpoints

/// Resumable mid-run state. The config hash binds a checkpoint to the exact
/// run configuration; resuming under different parameters is an error, not
/// a silent physics change.
struct Checkpoint {
    std::uint64_t config_hash = 0;
    std::int64_t period = 0;
    SpinLattice state;
    std::optional<SpinLattice> twin;
};

inline void write_checkpoint(const std::string& path, const Checkpoint& checkpoint) {
    std::ofstream out = detail::open_output(path, std::ios::binary);
    out.write(detail::kCheckpointMagic, sizeof detail::kCheckpointMagic);
    out.write(reinterpret_cast<const char*>(&checkpoint.config_hash),
              sizeof checkpoint.config_hash);
    out.write(reinterpret_cast<const char*>(&checkpoint.period), sizeof checkpoint.period);
    const std::uint8_t has_twin = checkpoint.twin ? 1 : 0;
    out.write(reinterpret_cast<const char*>(&has_twin), sizeof has_twin);
    detail::write_lattice_payload(out, checkpoint.state);
    if (checkpoint.twin) detail::write_lattice_payload(out, *checkpoint.twin);
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

inline Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream in = detail::open_input(path, std::ios::binary);
    char magic[8];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, detail::kCheckpointMagic, sizeof magic) != 0)
        throw std::runtime_error(path + ": not a spindrive checkpoint file");
    Checkpoint checkpoint;
    in.read(reinterpret_cast<char*>(&checkpoint.config_hash), sizeof checkpoint.config_hash);
    in.read(reinterpret_cast<char*>(&checkpoint.period), sizeof checkpoint.period);
    std::uint8_t has_twin = 0;
    in.read(reinterpret_cast<char*>(&has_twin), sizeof has_twin);
    if (!in) throw std::runtime_error(path + ": truncated checkpoint header");
    checkpoint.state = detail::read_lattice_payload(in, path);
    if (has_twin) checkpoint.twin = detail::read_lattice_payload(in, path);
    return checkpoint;
}

// ---------------------------------------------------------------------------
// Run manifest

/// JSON sidecar recording what produced the other files in the directory.
/// This is the only artifact that records wall-clock time; `status` is
/// "running" while the process works, then "complete", "stopped_early" or
/// "failed", so interrupted output is recognizable.
struct ManifestInfo {
    std::string tool_version = "spindrive 1.0.0";
    std::string command;
    std::string status = "running";
    std::string started_utc;
    std::string finished_utc;
    std::vector<std::string> outputs;
    std::string error;
};

inline void write_manifest(const std::string& path, const RunConfig& config,
                           const ManifestInfo& info) {
    nlohmann::json j;
    j["tool_version"] = info.tool_version;
    j["command"] = info.command;
    j["status"] = info.status;
    j["started_utc"] = info.started_utc;
    j["finished_utc"] = info.finished_utc;
    j["config_hash"] = config_hash(config);
    j["config"] = render_config(config);
    j["seed"] = config.seed;
    j["outputs"] = info.outputs;
    if (!info.error.empty()) j["error"] = info.error;
    std::ofstream out = detail::open_output(path);
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

}  // namespace spindrive
