#pragma once
#include "abc/rational.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace abc {

enum class EpsVariant { FourL, EightD, TwelveD };

std::string to_string(EpsVariant v);
EpsVariant eps_variant_from_string(const std::string& s);

struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// One stage of the scheme.  (p, q) fix alpha_n; (k, l) are the stage's own
// choices, so q_{n+1} = k l q^2 is derivable from the record alone.
struct StageParams {
    int n = 1;
    int d = 2;
    BigInt p, q, k, l;
    BigInt m;  // k l / 2
    BigInt r;  // m p mod q
    Rational delta, epsilon;
    EpsVariant variant = EpsVariant::TwelveD;
    double rho = 0.05;

    Rational alpha() const { return Rational(p, q); }
    BigInt p_next() const { return k * l * q * p + 1; }
    BigInt q_next() const { return k * l * q * q; }
    Rational alpha_next() const { return Rational(p_next(), q_next()); }
    // alpha_{n+1} - alpha_n = 1 / q_{n+1}
    Rational rotation_gap() const { return alpha_next() - alpha(); }
};

Rational epsilon_for(const Rational& delta, int d, const BigInt& l, const BigInt& q, EpsVariant v);

StageParams make_stage(int n, int d, const BigInt& p, const BigInt& q, const BigInt& k, const BigInt& l,
                       EpsVariant v = EpsVariant::TwelveD, double rho = 0.05);

// Builds stage n+1 from stage n.  (k, l) are the new stage's own choices and
// must satisfy 2 l_n q_{n+1} | l.
StageParams next_stage(const StageParams& prev, const BigInt& k, const BigInt& l);

// 2 l_prev q | l, with l_prev = 1 for the first stage.
bool l_even_holds(const BigInt& l_prev, const BigInt& q, const BigInt& l);

struct ReturnIdentityReport {
    bool pass = false;
    Rational lhs1, rhs1, residual1;  // m alpha_{n+1} vs r/q + 1/(2q^2), mod 1
    Rational lhs2, rhs2, residual2;  // (m+1) alpha_{n+1} vs (r+p)/q + 1/(2q^2) + 1/q_{n+1}
};

ReturnIdentityReport check_return_identities(const StageParams& s, const StageParams& next);
ReturnIdentityReport check_return_identities(const StageParams& s);

bool validate_l_condition(const BigInt& l, int d, int n, double dh_norm_bound);

struct ParamSchedule {
    std::vector<StageParams> stages;
    std::vector<std::optional<double>> l_bound_witness;

    bool consistent() const;
};

// Chain from a seed (p1, q1) and per-stage (k, l).
ParamSchedule build_schedule(const BigInt& p1, const BigInt& q1,
                             const std::vector<std::pair<BigInt, BigInt>>& kl, int d,
                             EpsVariant v = EpsVariant::TwelveD, double rho = 0.05);

nlohmann::json to_json(const StageParams& s);
StageParams stage_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ParamSchedule& s);
ParamSchedule schedule_from_json(const nlohmann::json& j);

}  // namespace abc
