// config.hpp
// Plain-text run configuration: `key = value` lines with '#' comments.
// Parsing is strict — unknown keys and malformed values are reported with
// the file name and line number instead of being silently skipped, because
// a typo like `dense_untill` would otherwise change physics without any
// trace. render_config() writes the canonical echo that run manifests and
// checkpoints embed, and config_hash() fingerprints that echo.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spindrive/dynamics.hpp"
#include "spindrive/observables.hpp"
#include "spindrive/spectrum.hpp"

namespace spindrive {

enum class RunMode { single, twin, sweep, scaling };

inline std::string to_string(RunMode mode) {
    switch (mode) {
        case RunMode::single: return "single";
        case RunMode::twin: return "twin";
        case RunMode::sweep: return "sweep";
        case RunMode::scaling: return "scaling";
    }
    throw std::logic_error("unreachable RunMode");
}

inline std::string to_string(Axis axis) {
    switch (axis) {
        case Axis::x: return "x";
        case Axis::y: return "y";
        case Axis::z: return "z";
    }
    throw std::logic_error("unreachable Axis");
}

/// Everything a run needs, with defaults matching the standard operating
/// point of the model (h = W = 0.1, period-four drive near g = 1/4).
struct RunConfig {
    RunMode mode = RunMode::twin;
    int L = 8;
    double omega = 2.86;
    double g = 0.25;
    double h = 0.1;
    double width = 0.1;   // W, spread of the initial polar angle
    double delta = 0.01;  // twin perturbation scale
    std::uint64_t seed = 1;
    std::int64_t n_periods = 1000;
    int realizations = 1;
    int threads = 0;  // 0 = all hardware threads
    std::string outdir = "out";

    // Stroboscopic sampling and numerical hygiene.
    std::string sampling = "every";  // "every" or "geometric"
    std::int64_t sample_stride = 1;
    std::int64_t dense_until = 1000;
    double growth = 1.02;
    std::int64_t renorm_every = 1000;

    // Persistence.
    std::int64_t checkpoint_every = 0;  // periods between checkpoints; 0 = off
    std::vector<std::int64_t> snapshot_periods;
    Axis slice_axis = Axis::z;
    int slice_layer = 0;

    // Analysis windows and early stop.
    std::int64_t spectrum_start = 100;
    std::int64_t spectrum_end = 10000;
    std::vector<RationalOrder> order_candidates = default_order_candidates();
    double stop_d_fraction = 0.0;  // stop once d exceeds this fraction of d_inf; 0 = off

    // Grids for sweep/scaling modes.
    std::vector<double> g_grid;
    std::vector<double> omega_grid;
    std::vector<int> L_grid;

    SamplingPlan sampling_plan() const {
        if (sampling == "every") return SamplingPlan::every(sample_stride);
        if (sampling == "geometric") return SamplingPlan::geometric(dense_until, growth);
        throw std::invalid_argument("sampling must be 'every' or 'geometric'");
    }

    DriveParams drive_params() const { return {omega, g, h}; }

    /// Names the first violated constraint; empty string when valid.
    std::string validation_error() const {
        if (L < 2) return "L must be >= 2";
        if (!(omega > 0.0)) return "omega must be > 0";
        if (!(h == h)) return "h must be finite";
        if (!(width >= 0.0)) return "width must be >= 0";
        if (!(delta >= 0.0)) return "delta must be >= 0";
        if (n_periods < 0) return "n_periods must be >= 0";
        if (realizations < 1) return "realizations must be >= 1";
        if (threads < 0) return "threads must be >= 0";
        if (sampling != "every" && sampling != "geometric")
            return "sampling must be 'every' or 'geometric'";
        if (sample_stride < 1) return "sample_stride must be >= 1";
        if (dense_until < 0) return "dense_until must be >= 0";
        if (!(growth > 1.0)) return "growth must be > 1";
        if (renorm_every < 0) return "renorm_every must be >= 0";
        if (checkpoint_every < 0) return "checkpoint_every must be >= 0";
        if (slice_layer < 0 || slice_layer >= L) return "slice_layer must be in [0, L)";
        if (spectrum_start < 0) return "spectrum_start must be >= 0";
        if (spectrum_end <= spectrum_start) return "spectrum_end must exceed spectrum_start";
        if (order_candidates.empty()) return "order_candidates must not be empty";
        if (!(stop_d_fraction >= 0.0 && stop_d_fraction < 1.0))
            return "stop_d_fraction must be in [0, 1)";
        if (mode == RunMode::sweep && (g_grid.empty() || omega_grid.empty()))
            return "sweep mode needs g_grid and omega_grid";
        if (mode == RunMode::scaling && L_grid.empty()) return "scaling mode needs L_grid";
        for (int edge : L_grid)
            if (edge < 2) return "L_grid entries must be >= 2";
        return {};
    }

    void validate() const {
        const std::string error = validation_error();
        if (!error.empty()) throw std::invalid_argument("config: " + error);
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

[[noreturn]] inline void config_error(const std::string& source, int line,
                                      const std::string& message) {
    throw std::invalid_argument(source + ":" + std::to_string(line) + ": " + message);
}

/// Doubles accept plain literals and exact rationals ("1/3", "20/7").
inline double parse_double_value(std::string_view text, const std::string& source, int line,
                                 std::string_view key) {
    const std::string owned(text);
    const auto fail = [&] {
        config_error(source, line,
                     "invalid value '" + owned + "' for '" + std::string(key) + "'");
    };
    if (const auto slash = owned.find('/'); slash != std::string::npos) {
        char* end = nullptr;
        const double num = std::strtod(owned.c_str(), &end);
        if (end != owned.c_str() + slash) fail();
        const double den = std::strtod(owned.c_str() + slash + 1, &end);
        if (*end != '\0' || den == 0.0) fail();
        return num / den;
    }
    char* end = nullptr;
    const double value = std::strtod(owned.c_str(), &end);
    if (end == owned.c_str() || *end != '\0') fail();
    return value;
}

inline std::int64_t parse_int_value(std::string_view text, const std::string& source, int line,
                                    std::string_view key) {
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        config_error(source, line,
                     "invalid integer '" + std::string(text) + "' for '" + std::string(key) +
                         "'");
    return value;
}

inline std::uint64_t parse_uint_value(std::string_view text, const std::string& source,
                                      int line, std::string_view key) {
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        config_error(source, line,
                     "invalid unsigned integer '" + std::string(text) + "' for '" +
                         std::string(key) + "'");
    return value;
}

inline std::vector<std::string_view> split(std::string_view text, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = text.find(sep, start);
        if (pos == std::string_view::npos) {
            parts.push_back(trim(text.substr(start)));
            return parts;
        }
        parts.push_back(trim(text.substr(start, pos - start)));
        start = pos + 1;
    }
}

/// Grids accept either a comma list ("2.6, 2.86, 3.1") or an inclusive
/// range "start:stop:step".
inline std::vector<double> parse_double_list(std::string_view text, const std::string& source,
                                             int line, std::string_view key) {
    if (const auto parts = split(text, ':'); parts.size() == 3) {
        const double start = parse_double_value(parts[0], source, line, key);
        const double stop = parse_double_value(parts[1], source, line, key);
        const double step = parse_double_value(parts[2], source, line, key);
        if (!(step > 0.0) || stop < start)
            config_error(source, line, "range for '" + std::string(key) +
                                           "' needs stop >= start and step > 0");
        std::vector<double> values;
        // Count-based generation keeps the endpoint exact when it divides.
        const auto count =
            static_cast<std::int64_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        for (std::int64_t i = 0; i < count; ++i)
            values.push_back(start + step * static_cast<double>(i));
        return values;
    }
    std::vector<double> values;
    for (std::string_view part : split(text, ','))
        if (!part.empty()) values.push_back(parse_double_value(part, source, line, key));
    if (values.empty())
        config_error(source, line, "empty list for '" + std::string(key) + "'");
    return values;
}

inline std::vector<std::int64_t> parse_int_list(std::string_view text,
                                                const std::string& source, int line,
                                                std::string_view key) {
    std::vector<std::int64_t> values;
    for (std::string_view part : split(text, ','))
        if (!part.empty()) values.push_back(parse_int_value(part, source, line, key));
    if (values.empty())
        config_error(source, line, "empty list for '" + std::string(key) + "'");
    return values;
}

inline RationalOrder parse_order(std::string_view text, const std::string& source, int line,
                                 std::string_view key) {
    const auto parts = split(text, '/');
    if (parts.size() == 1) {
        const std::int64_t n = parse_int_value(parts[0], source, line, key);
        if (n < 1) config_error(source, line, "order candidates must be positive");
        return RationalOrder{static_cast<int>(n), 1};
    }
    if (parts.size() == 2) {
        const std::int64_t num = parse_int_value(parts[0], source, line, key);
        const std::int64_t den = parse_int_value(parts[1], source, line, key);
        if (num < 1 || den < 1) config_error(source, line, "order candidates must be positive");
        return RationalOrder{static_cast<int>(num), static_cast<int>(den)};
    }
    config_error(source, line, "invalid order '" + std::string(text) + "'");
}

}  // namespace detail

/// Applies one `key = value` assignment. Shared by the file parser and the
/// CLI override path (--set key=value), so both reject the same mistakes.
inline void apply_config_entry(RunConfig& config, std::string_view key, std::string_view value,
                               const std::string& source = "<override>", int line = 0) {
    using namespace detail;
    const std::string k(key);
    if (k == "mode") {
        if (value == "single") config.mode = RunMode::single;
        else if (value == "twin") config.mode = RunMode::twin;
        else if (value == "sweep") config.mode = RunMode::sweep;
        else if (value == "scaling") config.mode = RunMode::scaling;
        else config_error(source, line, "mode must be single|twin|sweep|scaling");
    } else if (k == "L") {
        config.L = static_cast<int>(parse_int_value(value, source, line, key));
    } else if (k == "omega") {
        config.omega = parse_double_value(value, source, line, key);
    } else if (k == "g") {
        config.g = parse_double_value(value, source, line, key);
    } else if (k == "h") {
        config.h = parse_double_value(value, source, line, key);
    } else if (k == "W" || k == "width") {
        config.width = parse_double_value(value, source, line, key);
    } else if (k == "delta") {
        config.delta = parse_double_value(value, source, line, key);
    } else if (k == "seed") {
        config.seed = parse_uint_value(value, source, line, key);
    } else if (k == "n_periods") {
        config.n_periods = parse_int_value(value, source, line, key);
    } else if (k == "realizations") {
        config.realizations = static_cast<int>(parse_int_value(value, source, line, key));
    } else if (k == "threads") {
        config.threads = static_cast<int>(parse_int_value(value, source, line, key));
    } else if (k == "outdir") {
        config.outdir = std::string(value);
    } else if (k == "sampling") {
        config.sampling = std::string(value);
    } else if (k == "sample_stride") {
        config.sample_stride = parse_int_value(value, source, line, key);
    } else if (k == "dense_until") {
        config.dense_until = parse_int_value(value, source, line, key);
    } else if (k == "growth") {
        config.growth = parse_double_value(value, source, line, key);
    } else if (k == "renorm_every") {
        config.renorm_every = parse_int_value(value, source, line, key);
    } else if (k == "checkpoint_every") {
        config.checkpoint_every = parse_int_value(value, source, line, key);
    } else if (k == "snapshot_periods") {
        config.snapshot_periods = parse_int_list(value, source, line, key);
    } else if (k == "slice_axis") {
        if (value == "x") config.slice_axis = Axis::x;
        else if (value == "y") config.slice_axis = Axis::y;
        else if (value == "z") config.slice_axis = Axis::z;
        else config_error(source, line, "slice_axis must be x|y|z");
    } else if (k == "slice_layer") {
        config.slice_layer = static_cast<int>(parse_int_value(value, source, line, key));
    } else if (k == "spectrum_start") {
        config.spectrum_start = parse_int_value(value, source, line, key);
    } else if (k == "spectrum_end") {
        config.spectrum_end = parse_int_value(value, source, line, key);
    } else if (k == "order_candidates") {
        config.order_candidates.clear();
        for (std::string_view part : split(value, ','))
            if (!part.empty())
                config.order_candidates.push_back(parse_order(part, source, line, key));
        if (config.order_candidates.empty())
            config_error(source, line, "empty list for 'order_candidates'");
    } else if (k == "stop_d_fraction") {
        config.stop_d_fraction = parse_double_value(value, source, line, key);
    } else if (k == "g_grid") {
        config.g_grid = parse_double_list(value, source, line, key);
    } else if (k == "omega_grid") {
        config.omega_grid = parse_double_list(value, source, line, key);
    } else if (k == "L_grid") {
        config.L_grid.clear();
        for (std::int64_t v : parse_int_list(value, source, line, key))
            config.L_grid.push_back(static_cast<int>(v));
    } else {
        config_error(source, line, "unknown key '" + k + "'");
    }
}

/// Parses a config stream on top of `base` (defaults unless overridden).
inline RunConfig parse_config(std::istream& in, const std::string& source = "<config>",
                              RunConfig base = {}) {
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        std::string_view text = detail::trim(raw);
        if (const auto hash = text.find('#'); hash != std::string_view::npos)
            text = detail::trim(text.substr(0, hash));
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos)
            detail::config_error(source, line, "expected 'key = value'");
        const std::string_view key = detail::trim(text.substr(0, eq));
        const std::string_view value = detail::trim(text.substr(eq + 1));
        if (key.empty()) detail::config_error(source, line, "missing key before '='");
        if (value.empty())
            detail::config_error(source, line, "missing value for '" + std::string(key) + "'");
        apply_config_entry(base, key, value, source, line);
    }
    return base;
}

inline RunConfig parse_config_string(const std::string& text,
                                     const std::string& source = "<config>",
                                     RunConfig base = {}) {
    std::istringstream in(text);
    return parse_config(in, source, std::move(base));
}

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <typename T, typename Fmt>
std::string join(const std::vector<T>& values, Fmt fmt) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += fmt(values[i]);
    }
    return out;
}

}  // namespace detail

/// Canonical echo: every key, fixed order, full double precision. Parsing
/// the echo reproduces the config exactly; manifests and checkpoints embed
/// this text and its hash.
inline std::string render_config(const RunConfig& c) {
    using detail::format_double;
    using detail::join;
    std::string out;
    const auto kv = [&out](std::string_view key, const std::string& value) {
        out += key;
        out += " = ";
        out += value;
        out += "\n";
    };
    kv("mode", to_string(c.mode));
    kv("L", std::to_string(c.L));
    kv("omega", format_double(c.omega));
    kv("g", format_double(c.g));
    kv("h", format_double(c.h));
    kv("width", format_double(c.width));
    kv("delta", format_double(c.delta));
    kv("seed", std::to_string(c.seed));
    kv("n_periods", std::to_string(c.n_periods));
    kv("realizations", std::to_string(c.realizations));
    kv("threads", std::to_string(c.threads));
    kv("outdir", c.outdir);
    kv("sampling", c.sampling);
    kv("sample_stride", std::to_string(c.sample_stride));
    kv("dense_until", std::to_string(c.dense_until));
    kv("growth", format_double(c.growth));
    kv("renorm_every", std::to_string(c.renorm_every));
    kv("checkpoint_every", std::to_string(c.checkpoint_every));
    if (!c.snapshot_periods.empty())
        kv("snapshot_periods",
           join(c.snapshot_periods, [](std::int64_t v) { return std::to_string(v); }));
    kv("slice_axis", to_string(c.slice_axis));
    kv("slice_layer", std::to_string(c.slice_layer));
    kv("spectrum_start", std::to_string(c.spectrum_start));
    kv("spectrum_end", std::to_string(c.spectrum_end));
    kv("order_candidates", join(c.order_candidates, [](const RationalOrder& o) {
           return o.str();
       }));
    kv("stop_d_fraction", format_double(c.stop_d_fraction));
    if (!c.g_grid.empty()) kv("g_grid", join(c.g_grid, detail::format_double));
    if (!c.omega_grid.empty()) kv("omega_grid", join(c.omega_grid, detail::format_double));
    if (!c.L_grid.empty())
        kv("L_grid", join(c.L_grid, [](int v) { return std::to_string(v); }));
    return out;
}

/// FNV-1a 64-bit; stable fingerprint for config echoes and file payloads.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char byte : data) {
        hash ^= byte;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

inline std::uint64_t config_hash(const RunConfig& config) {
    return fnv1a64(render_config(config));
}

}  // namespace spindrive
