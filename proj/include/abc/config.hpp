#pragma once
// Run configuration: a flat key = value file.  Values use JSON literal syntax
// (numbers, "strings", true/false, arrays), so the file reads like a small
// TOML subset.

#include "abc/engine.hpp"
#include "abc/stage.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace abc {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    int d = 2;
    double rho = 0.05;
    BigInt p1 = 3, q1 = 5;
    std::vector<std::pair<BigInt, BigInt>> kl{{1, 10}};  // per stage (k, l)
    Mode mode = Mode::Exact;
    EpsVariant epsilon_variant = EpsVariant::TwelveD;
    std::uint64_t cell_budget = 100000000;
    std::uint64_t samples = 1000;
    std::uint64_t seed = 1;
    bool tower_grid = true;
    double mollifier_sigma = 0;   // x-space kernel width; 0 derives it from (eps, delta)
    bool choose_k = false;        // analytic: doubling search for k_n from stage 2 on
    bool towers = true;
    bool spectral = true;
    std::uint64_t spectral_lags = 64;
    double residual_tol = 0.2;
    double r_stability = 0.1;
    double mass_tol = 1e-8;
    bool figures = true;
    std::string out = "out";

    ParamSchedule schedule() const;
    EngineOptions engine_options() const;
    nlohmann::json to_json() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
// Throws ConfigError naming the failing constraint.
void validate(const RunConfig& c);

}  // namespace abc
