// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The braidmc Authors

/**
 * @file config.hpp
 * @brief Run configuration files: `[section]` headers and `key = value` lines.
 *
 *   # deep checkerboard, desk scale
 *   [lattice]
 *   kind = square
 *   L = 4
 *   [model]
 *   kind = nn_square
 *   V = 20
 *   mu = auto          # or `symmetric`, or a number
 *   filling = 1/2
 *   [run]
 *   samples = 20000
 *   [output]
 *   dir = out/cb_L4
 *
 * Strings may be quoted. Every key belongs to exactly one section and unknown
 * keys are an error naming the key.
 */

#pragma once

#include <braidmc/common.hpp>
#include <braidmc/engine.hpp>
#include <braidmc/lattice.hpp>

#include <json.hpp>

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace braidmc {

struct ConfigError : InvalidArgument {
    using InvalidArgument::InvalidArgument;
};

enum class MuMode { fixed, tuned, symmetric };

inline std::string to_string(MuMode m) {
    switch (m) {
        case MuMode::fixed: return "fixed";
        case MuMode::tuned: return "auto";
        case MuMode::symmetric: return "symmetric";
    }
    return "?";
}

struct RunConfig {
    RunParams params;
    MuMode mu_mode = MuMode::fixed;
    std::size_t replicas = 1;
    std::size_t pilot_sweeps = 400;
    std::size_t log_every = 1000;        ///< samples per replica between log lines and checkpoints
    std::string output_dir = "braidmc_out";
    double threshold = 0.01;             ///< spectrum report cut
    std::string name;                    ///< free-form label

    /// Resolved key = value listing in a fixed order; the config fingerprint hashes this.
    [[nodiscard]] std::string canonical() const;
    [[nodiscard]] nlohmann::json to_json() const;
};

namespace detail {

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::string unquote(const std::string& v) {
    if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) return v.substr(1, v.size() - 2);
    return v;
}

/// Drops a trailing `# comment` that is not inside quotes.
inline std::string strip_comment(const std::string& line) {
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quote) {
            if (c == quote) quote = 0;
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '#' || c == ';') {
            return line.substr(0, i);
        }
    }
    return line;
}

inline double to_double(const std::string& key, const std::string& v) {
    double x = 0;
    const auto* end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, x);
    if (r.ec != std::errc() || r.ptr != end || !std::isfinite(x))
        throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
    return x;
}

inline std::uint64_t to_uint(const std::string& key, const std::string& v) {
    std::uint64_t x = 0;
    const auto* end = v.data() + v.size();
    const auto r = std::from_chars(v.data(), end, x);
    if (r.ec != std::errc() || r.ptr != end)
        throw ConfigError("key '" + key + "': expected a non-negative integer, got '" + v + "'");
    return x;
}

inline int to_int(const std::string& key, const std::string& v) {
    const auto x = to_uint(key, v);
    if (x > 1000000) throw ConfigError("key '" + key + "': value out of range");
    return static_cast<int>(x);
}

inline bool to_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("key '" + key + "': expected true or false, got '" + v + "'");
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

inline const std::map<std::string, std::map<std::string, Setter>>& config_schema() {
    static const std::map<std::string, std::map<std::string, Setter>> schema = {
        {"lattice",
         {
             {"kind", [](RunConfig& c, const std::string& v) {
                  try {
                      c.params.lattice.kind = parse_lattice_kind(v);
                  } catch (const InvalidArgument& e) {
                      throw ConfigError(std::string("key 'kind': ") + e.what());
                  }
              }},
             {"L", [](RunConfig& c, const std::string& v) { c.params.lattice.L = to_int("L", v); }},
             {"Ly", [](RunConfig& c, const std::string& v) { c.params.lattice.Ly = to_int("Ly", v); }},
         }},
        {"model",
         {
             {"kind", [](RunConfig& c, const std::string& v) {
                  try {
                      c.params.model.kind = parse_model_kind(v);
                  } catch (const InvalidArgument& e) {
                      throw ConfigError(std::string("key 'kind': ") + e.what());
                  }
              }},
             {"t", [](RunConfig& c, const std::string& v) { c.params.model.t = to_double("t", v); }},
             {"V", [](RunConfig& c, const std::string& v) { c.params.model.V = to_double("V", v); }},
             {"mu", [](RunConfig& c, const std::string& v) {
                  if (v == "auto") {
                      c.mu_mode = MuMode::tuned;
                  } else if (v == "symmetric") {
                      c.mu_mode = MuMode::symmetric;
                  } else {
                      c.mu_mode = MuMode::fixed;
                      c.params.model.mu = to_double("mu", v);
                  }
              }},
             {"filling", [](RunConfig& c, const std::string& v) {
                  try {
                      c.params.model.filling = parse_rational(v);
                  } catch (const InvalidArgument& e) {
                      throw ConfigError(std::string("key 'filling': ") + e.what());
                  }
              }},
             {"beta", [](RunConfig& c, const std::string& v) { c.params.model.beta = to_double("beta", v); }},
             {"cutoff", [](RunConfig& c, const std::string& v) { c.params.model.cutoff = to_double("cutoff", v); }},
         }},
        {"run",
         {
             {"thermalization", [](RunConfig& c, const std::string& v) { c.params.thermalization_sweeps = to_uint("thermalization", v); }},
             {"samples", [](RunConfig& c, const std::string& v) { c.params.target_samples = to_uint("samples", v); }},
             {"measure_interval", [](RunConfig& c, const std::string& v) { c.params.measure_interval = to_uint("measure_interval", v); }},
             {"seed", [](RunConfig& c, const std::string& v) { c.params.seed = to_uint("seed", v); }},
             {"replicas", [](RunConfig& c, const std::string& v) { c.replicas = to_uint("replicas", v); }},
             {"worm_fugacity", [](RunConfig& c, const std::string& v) { c.params.sampler.worm_fugacity = to_double("worm_fugacity", v); }},
             {"translations", [](RunConfig& c, const std::string& v) { c.params.sampler.translations = to_bool("translations", v); }},
             {"validate", [](RunConfig& c, const std::string& v) { c.params.validate = to_bool("validate", v); }},
             {"stall_sweeps", [](RunConfig& c, const std::string& v) { c.params.stall_sweeps = to_uint("stall_sweeps", v); }},
             {"pilot_sweeps", [](RunConfig& c, const std::string& v) { c.pilot_sweeps = to_uint("pilot_sweeps", v); }},
         }},
        {"output",
         {
             {"dir", [](RunConfig& c, const std::string& v) { c.output_dir = v; }},
             {"name", [](RunConfig& c, const std::string& v) { c.name = v; }},
             {"threshold", [](RunConfig& c, const std::string& v) { c.threshold = to_double("threshold", v); }},
             {"log_every", [](RunConfig& c, const std::string& v) { c.log_every = to_uint("log_every", v); }},
         }},
    };
    return schema;
}

}  // namespace detail

/// Sets `section.key` from text. Throws ConfigError for unknown keys or bad values.
inline void set_config_value(RunConfig& cfg, const std::string& section, const std::string& key, const std::string& value) {
    const auto& schema = detail::config_schema();
    const auto sec = schema.find(section);
    if (sec == schema.end()) throw ConfigError("unknown section [" + section + "]");
    const auto it = sec->second.find(key);
    if (it == sec->second.end()) throw ConfigError("unknown key '" + key + "' in [" + section + "]");
    it->second(cfg, detail::unquote(detail::trim(value)));
}

/// Applies a `section.key=value` override.
inline void apply_override(RunConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    const auto dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw ConfigError("override '" + assignment + "' is not of the form section.key=value");
    set_config_value(cfg, detail::trim(assignment.substr(0, dot)), detail::trim(assignment.substr(dot + 1, eq - dot - 1)),
                     assignment.substr(eq + 1));
}

/// Cross-field checks after all keys are read.
inline void validate_config(const RunConfig& cfg) {
    const auto& p = cfg.params;
    try {
        p.model.validate();
        p.check();
        if (!compatible(p.model.kind, p.lattice.kind))
            throw ConfigError("model " + to_string(p.model.kind) + " does not live on a " + to_string(p.lattice.kind) +
                              " lattice");
        if (p.lattice.L < 2 || p.lattice.Ly < 0) throw ConfigError("lattice: L must be >= 2");
        (void)p.model.particles(static_cast<std::size_t>(p.lattice.site_count()));
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
    if (cfg.replicas < 1) throw ConfigError("run: replicas must be >= 1");
    if (p.target_samples < 1) throw ConfigError("run: samples must be >= 1");
    if (cfg.log_every < 1) throw ConfigError("output: log_every must be >= 1");
    if (!(cfg.threshold >= 0 && cfg.threshold < 1)) throw ConfigError("output: threshold must lie in [0, 1)");
    if (!(p.sampler.worm_fugacity > 0)) throw ConfigError("run: worm_fugacity must be > 0");
}

inline RunConfig parse_config(std::istream& in, const std::string& origin = "<config>") {
    RunConfig cfg;
    std::string section;
    std::string line;
    int lineno = 0;
    std::map<std::string, int> seen;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string where = origin + ":" + std::to_string(lineno) + ": ";
        const std::string s = detail::trim(detail::strip_comment(line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(where + "malformed section header");
            section = detail::trim(s.substr(1, s.size() - 2));
            if (!detail::config_schema().count(section)) throw ConfigError(where + "unknown section [" + section + "]");
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
        if (section.empty()) throw ConfigError(where + "key outside of a section");
        const std::string key = detail::trim(s.substr(0, eq));
        const std::string full = section + "." + key;
        if (seen.count(full))
            throw ConfigError(where + "duplicate key '" + key + "' (first set on line " + std::to_string(seen[full]) + ")");
        seen[full] = lineno;
        try {
            set_config_value(cfg, section, key, s.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
    return cfg;
}

inline RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>") {
    std::istringstream in(text);
    return parse_config(in, origin);
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    return parse_config(in, path);
}

inline std::string RunConfig::canonical() const {
    const auto& p = params;
    std::ostringstream os;
    os.precision(17);
    os << "lattice.kind=" << to_string(p.lattice.kind) << "\nlattice.L=" << p.lattice.extent_x()
       << "\nlattice.Ly=" << p.lattice.extent_y() << "\nmodel.kind=" << to_string(p.model.kind) << "\nmodel.t=" << p.model.t
       << "\nmodel.V=" << p.model.V << "\nmodel.mu=" << (mu_mode == MuMode::fixed ? "" : to_string(mu_mode) + ":")
       << p.model.mu << "\nmodel.filling=" << p.model.filling.str() << "\nmodel.beta=" << p.model.beta
       << "\nmodel.cutoff=" << p.model.cutoff << "\nrun.thermalization=" << p.thermalization_sweeps
       << "\nrun.samples=" << p.target_samples << "\nrun.measure_interval=" << p.measure_interval << "\nrun.seed=" << p.seed
       << "\nrun.replicas=" << replicas << "\nrun.worm_fugacity=" << p.sampler.worm_fugacity
       << "\nrun.translations=" << p.sampler.translations << "\nrun.validate=" << p.validate
       << "\nrun.stall_sweeps=" << p.stall_sweeps << "\nrun.pilot_sweeps=" << pilot_sweeps << "\n";
    return os.str();
}

inline nlohmann::json RunConfig::to_json() const {
    const auto& p = params;
    return {
        {"lattice", {{"kind", to_string(p.lattice.kind)}, {"L", p.lattice.extent_x()}, {"Ly", p.lattice.extent_y()}}},
        {"model",
         {{"kind", to_string(p.model.kind)},
          {"t", p.model.t},
          {"V", p.model.V},
          {"mu", p.model.mu},
          {"mu_mode", to_string(mu_mode)},
          {"filling", p.model.filling.str()},
          {"beta", p.model.beta},
          {"cutoff", p.model.cutoff}}},
        {"run",
         {{"thermalization", p.thermalization_sweeps},
          {"samples", p.target_samples},
          {"measure_interval", p.measure_interval},
          {"seed", p.seed},
          {"replicas", replicas},
          {"worm_fugacity", p.sampler.worm_fugacity},
          {"translations", p.sampler.translations},
          {"validate", p.validate},
          {"stall_sweeps", p.stall_sweeps},
          {"pilot_sweeps", pilot_sweeps}}},
        {"output", {{"dir", output_dir}, {"name", name}, {"threshold", threshold}, {"log_every", log_every}}},
    };
}

/// Resolves `mu = auto | symmetric` into a number. Returns the tuning record for `auto`.
inline std::optional<TuneResult> resolve_mu(RunConfig& cfg) {
    auto& p = cfg.params;
    if (cfg.mu_mode == MuMode::symmetric) {
        const auto lat = build_lattice(p.lattice);
        const auto table = build_interactions(lat, p.model.kind, p.model.cutoff);
        p.model.mu = symmetric_mu(p.model, table);
        return std::nullopt;
    }
    if (cfg.mu_mode == MuMode::tuned) {
        const int n = p.model.particles(static_cast<std::size_t>(p.lattice.site_count()));
        auto r = tune_mu(p, n, cfg.pilot_sweeps);
        p.model.mu = r.mu;
        return r;
    }
    return std::nullopt;
}

}  // namespace braidmc
