#pragma once

// Run configuration: flat `key = value` text files with command-line
// overrides (flags win). Unknown and duplicate keys are rejected with the
// offending key named. The effective configuration (defaults filled) is
// echoed into the output directory and re-parses to an equal value.

#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sie2d/convergence.hpp"
#include "sie2d/stepper.hpp"

namespace sie2d {

enum class RunMode { kSimulate, kConverge, kProbOrder, kSelfcheck };

inline std::string mode_name(RunMode m) {
    switch (m) {
        case RunMode::kSimulate: return "simulate";
        case RunMode::kConverge: return "converge";
        case RunMode::kProbOrder: return "prob-order";
        case RunMode::kSelfcheck: return "selfcheck";
    }
    return "?";
}

struct RunConfig {
    RunMode mode = RunMode::kSelfcheck;
    int N = 16;
    double T = 0.5;
    int n = 512;                                      // simulate: step count
    std::vector<int> levels = {16, 32, 64, 128, 256, 512};
    double c0 = 0.1;
    double r = 6.0;
    int paths = 3;                                    // prob-order default is 50
    int ref_extra = 2;
    std::uint64_t seed = 1;
    std::uint64_t path_id = 0;                        // simulate: which path of the seed
    Xi0Spec xi0;
    std::string out;                                  // output directory
    int workers = 1;
    SolverKind solver = SolverKind::kFixedPoint;
    double fp_tol = 1e-12;
    int fp_max_iter = 200;
    int dense_dim_cap = 4096;
    bool diagnostics = true;
    std::vector<double> betas = {0.6, 0.75, 0.9};     // prob-order
    bool dump_noise = false;                          // simulate: also write the SIEW table

    friend bool operator==(const RunConfig&, const RunConfig&) = default;

    StudyConfig study() const {
        StudyConfig s;
        s.N = N;
        s.T = T;
        s.xi0 = xi0;
        s.c0 = c0;
        s.r = r;
        s.levels = levels;
        s.ref_extra = ref_extra;
        s.paths = paths;
        s.master_seed = seed;
        s.workers = workers;
        s.stepper.solver = solver;
        s.stepper.fp_tol = fp_tol;
        s.stepper.fp_max_iter = fp_max_iter;
        s.stepper.dense_dim_cap = dense_dim_cap;
        s.stepper.tau = 1.0;  // placeholder; set per level
        return s;
    }
};

class config_error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline long long parse_integer(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw config_error("key '" + key + "': expected an integer, got '" + value + "'");
    }
}

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const std::uint64_t v = std::stoull(value, &pos);
        if (pos != value.size() || value.find('-') != std::string::npos) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw config_error("key '" + key + "': expected an unsigned integer, got '" + value + "'");
    }
}

inline double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        throw config_error("key '" + key + "': expected a number, got '" + value + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw config_error("key '" + key + "': expected true/false, got '" + value + "'");
}

inline std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) parts.push_back(trim(item));
    return parts;
}

inline Xi0Spec parse_xi0(const std::string& key, const std::string& value) {
    Xi0Spec spec;
    if (value == "preset-3mode") return spec;
    if (value == "random-smooth") {
        spec.kind = Xi0Spec::Kind::kRandomSmooth;
        return spec;
    }
    // random-smooth(decay, seed)
    const std::string prefix = "random-smooth(";
    if (value.rfind(prefix, 0) == 0 && value.back() == ')') {
        const auto args = split_list(value.substr(prefix.size(), value.size() - prefix.size() - 1));
        if (args.size() == 2) {
            spec.kind = Xi0Spec::Kind::kRandomSmooth;
            spec.decay = parse_real(key, args[0]);
            spec.seed = parse_unsigned(key, args[1]);
            return spec;
        }
    }
    throw config_error("key '" + key + "': expected preset-3mode or random-smooth(decay, seed), got '" +
                       value + "'");
}

inline std::string xi0_to_string(const Xi0Spec& spec) {
    if (spec.kind == Xi0Spec::Kind::kPreset3Mode) return "preset-3mode";
    return "random-smooth(" + format_double(spec.decay) + "," + std::to_string(spec.seed) + ")";
}

}  // namespace detail

// Ordered key/value pairs as read from a file or assembled from flags.
using KeyValues = std::vector<std::pair<std::string, std::string>>;

// Parse `key = value` lines; '#' starts a comment. Duplicate keys are
// rejected here, naming the key and line.
inline KeyValues parse_key_value_text(const std::string& text) {
    KeyValues out;
    std::map<std::string, int> seen;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("line " + std::to_string(line_no) + ": expected key = value, got '" + line + "'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw config_error("line " + std::to_string(line_no) + ": empty key");
        if (auto [it, inserted] = seen.emplace(key, line_no); !inserted)
            throw config_error("duplicate key '" + key + "' on line " + std::to_string(line_no) +
                               " (first seen on line " + std::to_string(it->second) + ")");
        out.emplace_back(key, value);
    }
    return out;
}

// Apply typed key/value pairs onto a RunConfig. Unknown keys are rejected.
inline void apply_key_values(RunConfig& cfg, const KeyValues& kv) {
    for (const auto& [key, value] : kv) {
        if (key == "N") cfg.N = static_cast<int>(detail::parse_integer(key, value));
        else if (key == "T") cfg.T = detail::parse_real(key, value);
        else if (key == "n") cfg.n = static_cast<int>(detail::parse_integer(key, value));
        else if (key == "levels") {
            cfg.levels.clear();
            for (const auto& item : detail::split_list(value))
                cfg.levels.push_back(static_cast<int>(detail::parse_integer(key, item)));
        } else if (key == "c0") cfg.c0 = detail::parse_real(key, value);
        else if (key == "r") cfg.r = detail::parse_real(key, value);
        else if (key == "paths") cfg.paths = static_cast<int>(detail::parse_integer(key, value));
        else if (key == "ref_extra") cfg.ref_extra = static_cast<int>(detail::parse_integer(key, value));
        else if (key == "seed") cfg.seed = detail::parse_unsigned(key, value);
        else if (key == "path_id") cfg.path_id = detail::parse_unsigned(key, value);
        else if (key == "xi0") cfg.xi0 = detail::parse_xi0(key, value);
        else if (key == "out") cfg.out = value;
        else if (key == "workers") cfg.workers = static_cast<int>(detail::parse_integer(key, value));
        else if (key == "solver") {
            if (value == "fixed-point") cfg.solver = SolverKind::kFixedPoint;
            else if (value == "dense") cfg.solver = SolverKind::kDense;
            else throw config_error("key 'solver': expected fixed-point or dense, got '" + value + "'");
        } else if (key == "fp_tol") cfg.fp_tol = detail::parse_real(key, value);
        else if (key == "fp_max_iter") cfg.fp_max_iter = static_cast<int>(detail::parse_integer(key, value));
        else if (key == "dense_dim_cap") cfg.dense_dim_cap = static_cast<int>(detail::parse_integer(key, value));
        else if (key == "diagnostics") cfg.diagnostics = detail::parse_bool(key, value);
        else if (key == "betas") {
            cfg.betas.clear();
            for (const auto& item : detail::split_list(value)) cfg.betas.push_back(detail::parse_real(key, item));
        } else if (key == "dump_noise") cfg.dump_noise = detail::parse_bool(key, value);
        else throw config_error("unknown key '" + key + "'");
    }
}

inline void validate_config(const RunConfig& cfg) {
    require_valid_truncation(cfg.N);
    if (!(cfg.T > 0.0)) throw config_error("final time T must be positive");
    if (cfg.c0 < 0.0) throw config_error("noise amplitude must be nonnegative");
    if (cfg.c0 > 0.0 && !(cfg.r > 0.0)) throw config_error("decay exponent must be positive");
    if (cfg.workers < 1) throw config_error("workers must be >= 1");
    if (!(cfg.fp_tol > 0.0)) throw config_error("fp_tol must be positive");
    if (cfg.fp_max_iter < 1) throw config_error("fp_max_iter must be >= 1");
    if (cfg.dense_dim_cap < 0) throw config_error("dense_dim_cap must be >= 0");
    if (cfg.xi0.kind == Xi0Spec::Kind::kRandomSmooth && !(cfg.xi0.decay > 0.0))
        throw config_error("initial-condition decay must be positive");

    switch (cfg.mode) {
        case RunMode::kSimulate:
            if (cfg.n < 1) throw config_error("step count n must be >= 1");
            if (cfg.out.empty()) throw config_error("missing required field: out");
            break;
        case RunMode::kConverge:
        case RunMode::kProbOrder: {
            if (cfg.out.empty()) throw config_error("missing required field: out");
            if (cfg.paths < 1) throw config_error("paths must be >= 1");
            if (cfg.ref_extra < 0) throw config_error("ref_extra must be >= 0");
            try {
                cfg.study().validate();
            } catch (const std::exception& e) {
                throw config_error(e.what());
            }
            if (cfg.mode == RunMode::kProbOrder) {
                if (cfg.betas.empty()) throw config_error("missing required field: betas");
                for (double b : cfg.betas)
                    if (!(b > 0.0 && b < 1.0)) throw config_error("betas must lie in (0, 1)");
            }
            break;
        }
        case RunMode::kSelfcheck:
            break;
    }
}

// Canonical text form of the effective configuration. Parsing it back
// yields an equal RunConfig (the mode travels as the subcommand).
inline std::string serialize_config(const RunConfig& cfg) {
    std::string out;
    auto kv = [&out](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
    out += "# effective configuration (" + mode_name(cfg.mode) + ")\n";
    kv("N", std::to_string(cfg.N));
    kv("T", format_double(cfg.T));
    kv("n", std::to_string(cfg.n));
    std::string levels;
    for (std::size_t i = 0; i < cfg.levels.size(); ++i)
        levels += (i ? "," : "") + std::to_string(cfg.levels[i]);
    kv("levels", levels);
    kv("c0", format_double(cfg.c0));
    kv("r", format_double(cfg.r));
    kv("paths", std::to_string(cfg.paths));
    kv("ref_extra", std::to_string(cfg.ref_extra));
    kv("seed", std::to_string(cfg.seed));
    kv("path_id", std::to_string(cfg.path_id));
    kv("xi0", detail::xi0_to_string(cfg.xi0));
    kv("out", cfg.out);
    kv("workers", std::to_string(cfg.workers));
    kv("solver", cfg.solver == SolverKind::kFixedPoint ? "fixed-point" : "dense");
    kv("fp_tol", format_double(cfg.fp_tol));
    kv("fp_max_iter", std::to_string(cfg.fp_max_iter));
    kv("dense_dim_cap", std::to_string(cfg.dense_dim_cap));
    kv("diagnostics", cfg.diagnostics ? "true" : "false");
    std::string betas;
    for (std::size_t i = 0; i < cfg.betas.size(); ++i)
        betas += (i ? "," : "") + format_double(cfg.betas[i]);
    kv("betas", betas);
    kv("dump_noise", cfg.dump_noise ? "true" : "false");
    return out;
}

// Assemble a RunConfig for `mode` from optional config-file text plus
// override pairs (command-line flags; flags win), then validate.
inline RunConfig parse_config(RunMode mode, const std::optional<std::string>& config_text,
                              const KeyValues& overrides) {
    RunConfig cfg;
    cfg.mode = mode;
    if (mode == RunMode::kProbOrder) cfg.paths = 50;
    if (config_text) apply_key_values(cfg, parse_key_value_text(*config_text));
    apply_key_values(cfg, overrides);
    validate_config(cfg);
    return cfg;
}

}  // namespace sie2d
