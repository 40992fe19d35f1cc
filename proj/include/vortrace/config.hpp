#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vortrace/dynamics.hpp"
#include "vortrace/field.hpp"
#include "vortrace/noise.hpp"
#include "vortrace/util.hpp"
#include "vortrace/version.hpp"

namespace vortrace {

class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

/// Analytic initial fields referenced by name in configs and tests.
///   cos1: 2 cos(2 pi x1)   sin1: 2 sin(2 pi x1)
///   cos2: 2 cos(2 pi x2)   sin2: 2 sin(2 pi x2)
///   checker: 4 cos(2 pi x1) cos(2 pi x2)
///   mix: a fixed low-mode combination exciting both components of psi*.
inline SpectralField make_named_field(const std::string& name, int cutoff) {
    SpectralField w(cutoff);
    if (name == "zero") return w;
    if (name == "cos1") {
        w.set({1, 0}, Complex{1.0, 0.0});
    } else if (name == "sin1") {
        w.set({1, 0}, Complex{0.0, -1.0});
    } else if (name == "cos2") {
        w.set({0, 1}, Complex{1.0, 0.0});
    } else if (name == "sin2") {
        w.set({0, 1}, Complex{0.0, -1.0});
    } else if (name == "checker") {
        w.set({1, 1}, Complex{1.0, 0.0});
        w.set({-1, 1}, Complex{1.0, 0.0});
    } else if (name == "mix") {
        w.set({1, 0}, Complex{0.3, -0.4});
        w.set({0, 1}, Complex{-0.2, 0.5});
        w.set({1, 1}, Complex{0.1, 0.2});
        w.set({-1, 1}, Complex{0.25, -0.15});
        if (cutoff >= 2) w.set({2, 1}, Complex{-0.1, 0.05});
    } else {
        throw ConfigError("[initial].name: unknown analytic field '" + name + "'");
    }
    return w;
}

struct RunConfig {
    // [run]
    std::string kind = "lagrangian";  // lagrangian | eulerian | deterministic
    int cutoff = 4;
    double dt = 1e-3;
    double T = 10.0;
    std::uint64_t seed = 1;
    bool nonlinearity = true;
    std::string lambda_convention = "four_pi_sq";  // four_pi_sq | unit

    // [noise]
    double noise_amplitude = 1.0;
    double noise_exponent = 3.0;
    struct Override {
        int k1, k2;
        double value;
    };
    std::vector<Override> noise_overrides;

    // [initial]
    std::string initial_type = "zero";  // zero | analytic | snapshot
    std::string initial_name = "zero";
    std::string initial_path;

    // [tracer]
    bool tracer_enabled = false;
    Vec2 tracer_x0{0.0, 0.0};
    std::uint64_t tracer_start_steps = 0;

    // [ensemble]
    int ensemble_paths = 128;
    double burn_in = 50.0;
    double thinning = 1.0;
    bool antithetic = false;
    bool green_kubo = false;
    bool v_star_zero = false;  // center psi* with 0 instead of the estimate

    // [observables]
    std::uint64_t cadence = 1;

    // [corrector]
    double corrector_t = 2.0;
    int corrector_inner = 32;
    int corrector_outer = 128;

    // [coupling]
    int coupling_n0 = 0;  // 0 -> cutoff/2
    std::string coupling_xi = "sin1";
    int coupling_ensemble = 32;

    // [output]
    std::string output_dir = "out";

    double lambda_factor() const {
        return lambda_convention == "unit" ? 1.0 : kFourPiSq;
    }

    EquationKind equation_kind() const {
        if (kind == "lagrangian") return EquationKind::Lagrangian;
        if (kind == "eulerian") return EquationKind::Eulerian;
        if (kind == "deterministic") return EquationKind::Deterministic;
        throw ConfigError("[run].kind: unknown kind '" + kind + "'");
    }

    SolverParams solver_params() const {
        SolverParams p;
        p.kind = equation_kind();
        p.dt = dt;
        p.lambda_factor = lambda_factor();
        p.nonlinearity = nonlinearity;
        return p;
    }

    NoiseSpec noise_spec() const {
        NoiseSpec spec = NoiseSpec::power_law(cutoff, noise_amplitude, noise_exponent);
        for (const auto& o : noise_overrides) spec.override_mode({o.k1, o.k2}, o.value);
        return spec;
    }

    SpectralField initial_field() const {
        if (initial_type == "zero") return SpectralField(cutoff);
        if (initial_type == "analytic") return make_named_field(initial_name, cutoff);
        throw ConfigError("[initial].type: snapshot initial data is resolved by the harness");
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& path, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return d;
    } catch (...) {
        throw ConfigError(path + ": expected a number, got '" + v + "'");
    }
}

inline std::uint64_t parse_u64(const std::string& path, const std::string& v) {
    try {
        std::size_t pos = 0;
        const unsigned long long d = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return d;
    } catch (...) {
        throw ConfigError(path + ": expected a non-negative integer, got '" + v + "'");
    }
}

inline int parse_int(const std::string& path, const std::string& v) {
    try {
        std::size_t pos = 0;
        const long d = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return static_cast<int>(d);
    } catch (...) {
        throw ConfigError(path + ": expected an integer, got '" + v + "'");
    }
}

inline bool parse_bool(const std::string& path, const std::string& v) {
    if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "off" || v == "0" || v == "no") return false;
    throw ConfigError(path + ": expected a boolean, got '" + v + "'");
}

inline Vec2 parse_vec2(const std::string& path, const std::string& v) {
    std::istringstream is(v);
    double x, y;
    if (!(is >> x >> y)) throw ConfigError(path + ": expected two numbers, got '" + v + "'");
    std::string rest;
    if (is >> rest) throw ConfigError(path + ": trailing content '" + rest + "'");
    return {x, y};
}

}  // namespace detail

inline void validate(const RunConfig& cfg);

/// Parses the sectioned key = value config text. Unknown sections or keys
/// are errors (validation happens before any run).
inline RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        const std::string path = "[" + section + "]." + key;

        auto unknown = [&]() { throw ConfigError(path + ": unknown key"); };
        if (section == "run") {
            if (key == "kind") cfg.kind = value;
            else if (key == "cutoff") cfg.cutoff = detail::parse_int(path, value);
            else if (key == "dt") cfg.dt = detail::parse_double(path, value);
            else if (key == "T") cfg.T = detail::parse_double(path, value);
            else if (key == "seed") cfg.seed = detail::parse_u64(path, value);
            else if (key == "nonlinearity") cfg.nonlinearity = detail::parse_bool(path, value);
            else if (key == "lambda_convention") cfg.lambda_convention = value;
            else unknown();
        } else if (section == "noise") {
            if (key == "amplitude") cfg.noise_amplitude = detail::parse_double(path, value);
            else if (key == "exponent") cfg.noise_exponent = detail::parse_double(path, value);
            else if (key == "overrides") {
                std::istringstream os(value);
                std::string item;
                while (std::getline(os, item, ',')) {
                    item = detail::trim(item);
                    if (item.empty()) continue;
                    std::istringstream is(item);
                    RunConfig::Override o{};
                    if (!(is >> o.k1 >> o.k2 >> o.value))
                        throw ConfigError(path + ": override entries are 'k1 k2 value'");
                    cfg.noise_overrides.push_back(o);
                }
            } else unknown();
        } else if (section == "initial") {
            if (key == "type") cfg.initial_type = value;
            else if (key == "name") cfg.initial_name = value;
            else if (key == "path") cfg.initial_path = value;
            else unknown();
        } else if (section == "tracer") {
            if (key == "enabled") cfg.tracer_enabled = detail::parse_bool(path, value);
            else if (key == "x0") cfg.tracer_x0 = detail::parse_vec2(path, value);
            else if (key == "start_steps") cfg.tracer_start_steps = detail::parse_u64(path, value);
            else unknown();
        } else if (section == "ensemble") {
            if (key == "paths") cfg.ensemble_paths = detail::parse_int(path, value);
            else if (key == "burn_in") cfg.burn_in = detail::parse_double(path, value);
            else if (key == "thinning") cfg.thinning = detail::parse_double(path, value);
            else if (key == "antithetic") cfg.antithetic = detail::parse_bool(path, value);
            else if (key == "green_kubo") cfg.green_kubo = detail::parse_bool(path, value);
            else if (key == "v_star") {
                if (value == "zero") cfg.v_star_zero = true;
                else if (value == "estimate") cfg.v_star_zero = false;
                else throw ConfigError(path + ": must be estimate | zero");
            } else unknown();
        } else if (section == "observables") {
            if (key == "cadence") cfg.cadence = detail::parse_u64(path, value);
            else unknown();
        } else if (section == "corrector") {
            if (key == "t") cfg.corrector_t = detail::parse_double(path, value);
            else if (key == "inner") cfg.corrector_inner = detail::parse_int(path, value);
            else if (key == "outer") cfg.corrector_outer = detail::parse_int(path, value);
            else unknown();
        } else if (section == "coupling") {
            if (key == "n0") cfg.coupling_n0 = detail::parse_int(path, value);
            else if (key == "xi") cfg.coupling_xi = value;
            else if (key == "ensemble") cfg.coupling_ensemble = detail::parse_int(path, value);
            else unknown();
        } else if (section == "output") {
            if (key == "dir") cfg.output_dir = value;
            else unknown();
        } else {
            throw ConfigError("line " + std::to_string(lineno) + ": unknown section [" + section +
                              "]");
        }
    }
    validate(cfg);
    return cfg;
}

inline void validate(const RunConfig& cfg) {
    if (cfg.cutoff < 1 || cfg.cutoff > 64) throw ConfigError("[run].cutoff: must be in [1, 64]");
    if (!(cfg.dt > 0.0)) throw ConfigError("[run].dt: must be > 0");
    if (cfg.T < 0.0) throw ConfigError("[run].T: must be >= 0");
    if (cfg.kind != "lagrangian" && cfg.kind != "eulerian" && cfg.kind != "deterministic")
        throw ConfigError("[run].kind: must be lagrangian | eulerian | deterministic");
    if (cfg.lambda_convention != "four_pi_sq" && cfg.lambda_convention != "unit")
        throw ConfigError("[run].lambda_convention: must be four_pi_sq | unit");
    if (cfg.noise_exponent < 0.0) throw ConfigError("[noise].exponent: must be >= 0");
    if (cfg.initial_type != "zero" && cfg.initial_type != "analytic" &&
        cfg.initial_type != "snapshot")
        throw ConfigError("[initial].type: must be zero | analytic | snapshot");
    if (cfg.initial_type == "snapshot" && cfg.initial_path.empty())
        throw ConfigError("[initial].path: required for snapshot initial data");
    if (cfg.ensemble_paths < 1) throw ConfigError("[ensemble].paths: must be >= 1");
    if (cfg.burn_in < 0.0) throw ConfigError("[ensemble].burn_in: must be >= 0");
    if (!(cfg.thinning > 0.0)) throw ConfigError("[ensemble].thinning: must be > 0");
    if (!(cfg.corrector_t > 0.0)) throw ConfigError("[corrector].t: must be > 0");
    if (cfg.corrector_inner < 1) throw ConfigError("[corrector].inner: must be >= 1");
    if (cfg.corrector_outer < 2) throw ConfigError("[corrector].outer: must be >= 2");
    if (cfg.coupling_n0 < 0 || cfg.coupling_n0 > cfg.cutoff)
        throw ConfigError("[coupling].n0: must be in [0, cutoff]");
    if (cfg.coupling_ensemble < 1) throw ConfigError("[coupling].ensemble: must be >= 1");
    for (const auto& o : cfg.noise_overrides) {
        const Wavevector k{o.k1, o.k2};
        if ((o.k1 == 0 && o.k2 == 0) || k.ring() > cfg.cutoff)
            throw ConfigError("[noise].overrides: mode (" + std::to_string(o.k1) + "," +
                              std::to_string(o.k2) + ") outside the cutoff lattice");
    }
}

/// Fully-resolved config echo (sorted keys): every run writes this next to
/// its outputs. No timestamps, so reruns stay byte-identical.
inline std::string config_manifest(const RunConfig& cfg) {
    std::map<std::string, std::string> kv;
    kv["version"] = version_string();
    kv["run.kind"] = cfg.kind;
    kv["run.cutoff"] = std::to_string(cfg.cutoff);
    kv["run.dt"] = format_g17(cfg.dt);
    kv["run.T"] = format_g17(cfg.T);
    kv["run.seed"] = std::to_string(cfg.seed);
    kv["run.nonlinearity"] = cfg.nonlinearity ? "on" : "off";
    kv["run.lambda_convention"] = cfg.lambda_convention;
    kv["noise.amplitude"] = format_g17(cfg.noise_amplitude);
    kv["noise.exponent"] = format_g17(cfg.noise_exponent);
    std::string ov;
    for (const auto& o : cfg.noise_overrides) {
        if (!ov.empty()) ov += ", ";
        ov += std::to_string(o.k1) + " " + std::to_string(o.k2) + " " + format_g17(o.value);
    }
    kv["noise.overrides"] = ov;
    kv["initial.type"] = cfg.initial_type;
    kv["initial.name"] = cfg.initial_name;
    kv["initial.path"] = cfg.initial_path;
    kv["tracer.enabled"] = cfg.tracer_enabled ? "true" : "false";
    kv["tracer.x0"] = format_g17(cfg.tracer_x0.x) + " " + format_g17(cfg.tracer_x0.y);
    kv["tracer.start_steps"] = std::to_string(cfg.tracer_start_steps);
    kv["ensemble.paths"] = std::to_string(cfg.ensemble_paths);
    kv["ensemble.burn_in"] = format_g17(cfg.burn_in);
    kv["ensemble.thinning"] = format_g17(cfg.thinning);
    kv["ensemble.antithetic"] = cfg.antithetic ? "true" : "false";
    kv["ensemble.green_kubo"] = cfg.green_kubo ? "true" : "false";
    kv["ensemble.v_star"] = cfg.v_star_zero ? "zero" : "estimate";
    kv["observables.cadence"] = std::to_string(cfg.cadence);
    kv["corrector.t"] = format_g17(cfg.corrector_t);
    kv["corrector.inner"] = std::to_string(cfg.corrector_inner);
    kv["corrector.outer"] = std::to_string(cfg.corrector_outer);
    kv["coupling.n0"] = std::to_string(cfg.coupling_n0);
    kv["coupling.xi"] = cfg.coupling_xi;
    kv["coupling.ensemble"] = std::to_string(cfg.coupling_ensemble);
    kv["output.dir"] = cfg.output_dir;
    std::string out;
    for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
    return out;
}

}  // namespace vortrace
