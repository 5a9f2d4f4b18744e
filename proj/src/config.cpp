#include "abc/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace abc {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Drops a trailing # comment that is not inside a string.
std::string strip_comment(const std::string& s) {
    bool in = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in = !in;
        if (s[i] == '#' && !in) return s.substr(0, i);
    }
    return s;
}

BigInt big(const json& v, const std::string& key) {
    if (v.is_string()) return parse_bigint(v.get<std::string>());
    if (v.is_number_integer()) return BigInt(v.dump());
    throw ConfigError(key + ": expected an integer");
}

template <class T>
T num(const json& v, const std::string& key) {
    if (!v.is_number()) throw ConfigError(key + ": expected a number");
    return v.get<T>();
}

std::uint64_t u64(const json& v, const std::string& key) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ConfigError(key + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
}

bool boolean(const json& v, const std::string& key) {
    if (!v.is_boolean()) throw ConfigError(key + ": expected true or false");
    return v.get<bool>();
}

std::string str(const json& v, const std::string& key) {
    if (!v.is_string()) throw ConfigError(key + ": expected a quoted string");
    return v.get<std::string>();
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig c;
    std::istringstream in(text);
    std::string line;
    std::set<std::string> seen;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq)), raw = trim(line.substr(eq + 1));
        if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key " + key);
        json v;
        try {
            v = json::parse(raw);
        } catch (const json::parse_error&) {
            throw ConfigError("line " + std::to_string(lineno) + ": cannot parse value of " + key);
        }
        try {
            if (key == "d") c.d = num<int>(v, key);
            else if (key == "rho") c.rho = num<double>(v, key);
            else if (key == "p1") c.p1 = big(v, key);
            else if (key == "q1") c.q1 = big(v, key);
            else if (key == "kl") {
                if (!v.is_array()) throw ConfigError("kl: expected [[k, l], ...]");
                c.kl.clear();
                for (const auto& e : v) {
                    if (!e.is_array() || e.size() != 2) throw ConfigError("kl: each entry must be [k, l]");
                    c.kl.push_back({big(e[0], "kl"), big(e[1], "kl")});
                }
            } else if (key == "mode") c.mode = mode_from_string(str(v, key));
            else if (key == "epsilon_variant") c.epsilon_variant = eps_variant_from_string(str(v, key));
            else if (key == "cell_budget") c.cell_budget = u64(v, key);
            else if (key == "samples") c.samples = u64(v, key);
            else if (key == "seed") c.seed = u64(v, key);
            else if (key == "tower_grid") c.tower_grid = boolean(v, key);
            else if (key == "mollifier_sigma") c.mollifier_sigma = num<double>(v, key);
            else if (key == "choose_k") c.choose_k = boolean(v, key);
            else if (key == "towers") c.towers = boolean(v, key);
            else if (key == "spectral") c.spectral = boolean(v, key);
            else if (key == "spectral_lags") c.spectral_lags = u64(v, key);
            else if (key == "residual_tol") c.residual_tol = num<double>(v, key);
            else if (key == "r_stability") c.r_stability = num<double>(v, key);
            else if (key == "mass_tol") c.mass_tol = num<double>(v, key);
            else if (key == "figures") c.figures = boolean(v, key);
            else if (key == "out") c.out = str(v, key);
            else throw ConfigError("unknown key " + key);
        } catch (const ParameterError& e) {
            throw ConfigError(key + ": " + e.what());
        } catch (const std::invalid_argument& e) {
            throw ConfigError(key + ": " + e.what());
        }
    }
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

void validate(const RunConfig& c) {
    if (c.d < 2) throw ConfigError("d must be >= 2");
    if (!(c.rho > 0)) throw ConfigError("rho must be positive");
    if (c.kl.empty()) throw ConfigError("kl needs at least one stage");
    if (!(c.mollifier_sigma >= 0)) throw ConfigError("mollifier_sigma must be >= 0");
    if (c.spectral_lags < 2) throw ConfigError("spectral_lags must be >= 2");
    if (!l_even_holds(BigInt(1), c.q1, c.kl[0].second))
        throw ConfigError("stage 1 violates 2 q_1 | l_1 (q_1 = " + c.q1.get_str() + ", l_1 = " + c.kl[0].second.get_str() +
                          ")");
    try {
        ParamSchedule s = c.schedule();
        if (!s.consistent()) throw ConfigError("stage chain is inconsistent");
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("stage chain: ") + e.what());
    }
}

ParamSchedule RunConfig::schedule() const { return build_schedule(p1, q1, kl, d, epsilon_variant, rho); }

EngineOptions RunConfig::engine_options() const {
    EngineOptions o;
    o.cell_budget = cell_budget;
    o.tower_grid = tower_grid;
    o.samples = samples;
    o.seed = seed;
    o.analytic.cell_budget = cell_budget;
    o.analytic.mollify.sigma = mollifier_sigma;
    return o;
}

json RunConfig::to_json() const {
    json kls = json::array();
    for (const auto& [k, l] : kl) kls.push_back({k.get_str(), l.get_str()});
    return json{{"d", d},
                {"rho", rho},
                {"p1", p1.get_str()},
                {"q1", q1.get_str()},
                {"kl", kls},
                {"mode", abc::to_string(mode)},
                {"epsilon_variant", abc::to_string(epsilon_variant)},
                {"cell_budget", cell_budget},
                {"samples", samples},
                {"seed", seed},
                {"tower_grid", tower_grid},
                {"mollifier_sigma", mollifier_sigma},
                {"choose_k", choose_k},
                {"towers", towers},
                {"spectral", spectral},
                {"spectral_lags", spectral_lags},
                {"residual_tol", residual_tol},
                {"r_stability", r_stability},
                {"mass_tol", mass_tol},
                {"figures", figures},
                {"out", out}};
}

}  // namespace abc
