#include "abc/stage.hpp"

#include <sstream>

namespace abc {

std::string to_string(EpsVariant v) {
    switch (v) {
        case EpsVariant::FourL: return "four_l";
        case EpsVariant::EightD: return "eight_d";
        case EpsVariant::TwelveD: return "twelve_d";
    }
    return "twelve_d";
}

EpsVariant eps_variant_from_string(const std::string& s) {
    if (s == "four_l") return EpsVariant::FourL;
    if (s == "eight_d") return EpsVariant::EightD;
    if (s == "twelve_d" || s == "strictest") return EpsVariant::TwelveD;
    throw ParameterError("unknown epsilon variant '" + s + "'");
}

Rational epsilon_for(const Rational& delta, int d, const BigInt& l, const BigInt& q, EpsVariant v) {
    BigInt base = pow(l, static_cast<unsigned long>(d)) * q * q;
    switch (v) {
        case EpsVariant::FourL: return delta / Rational(4 * base);
        case EpsVariant::EightD: return delta / Rational(8 * d * base);
        case EpsVariant::TwelveD: return delta / Rational(12 * d * base);
    }
    return delta;
}

StageParams make_stage(int n, int d, const BigInt& p, const BigInt& q, const BigInt& k, const BigInt& l,
                       EpsVariant v, double rho) {
    if (n < 1) throw ParameterError("stage index must be >= 1");
    if (d < 2) throw ParameterError("dimension must be >= 2");
    if (p <= 0 || q <= 0 || k <= 0 || l <= 0) throw ParameterError("p, q, k, l must be positive");
    if (gcd(p, q) != 1) throw ParameterError("gcd(p, q) != 1 for p=" + p.get_str() + ", q=" + q.get_str());
    if (mod(k * l, BigInt(2)) != 0) throw ParameterError("k*l must be even");
    if (!(rho > 0)) throw ParameterError("rho must be positive");
    StageParams s;
    s.n = n;
    s.d = d;
    s.p = p;
    s.q = q;
    s.k = k;
    s.l = l;
    s.m = k * l / 2;
    s.r = mod(s.m * p, q);
    s.delta = Rational(BigInt(1), BigInt(n) * q);
    s.variant = v;
    s.epsilon = epsilon_for(s.delta, d, l, q, v);
    s.rho = rho;
    return s;
}

bool l_even_holds(const BigInt& l_prev, const BigInt& q, const BigInt& l) {
    return mod(l, 2 * l_prev * q) == 0;
}

StageParams next_stage(const StageParams& prev, const BigInt& k, const BigInt& l) {
    if (k < 1) throw ParameterError("k must be >= 1");
    BigInt qn = prev.q_next();
    if (!l_even_holds(prev.l, qn, l))
        throw ParameterError("divisibility condition 2*l_prev*q_new | l failed: 2*" + prev.l.get_str() + "*" +
                             qn.get_str() + " does not divide " + l.get_str());
    return make_stage(prev.n + 1, prev.d, prev.p_next(), qn, k, l, prev.variant, prev.rho);
}

ReturnIdentityReport check_return_identities(const StageParams& s, const StageParams& next) {
    ReturnIdentityReport rep;
    Rational a = Rational(next.p, next.q);
    Rational qq = Rational(s.q * s.q);
    rep.lhs1 = mod1(Rational(s.m) * a);
    rep.rhs1 = mod1(Rational(s.r, s.q) + Rational(1) / (2 * qq));
    rep.residual1 = mod1(rep.lhs1 - rep.rhs1);
    rep.lhs2 = mod1(Rational(s.m + 1) * a);
    rep.rhs2 = mod1(Rational(s.r + s.p, s.q) + Rational(1) / (2 * qq) + Rational(BigInt(1), next.q));
    rep.residual2 = mod1(rep.lhs2 - rep.rhs2);
    rep.pass = rep.residual1 == 0 && rep.residual2 == 0;
    return rep;
}

ReturnIdentityReport check_return_identities(const StageParams& s) {
    StageParams next = s;
    next.n = s.n + 1;
    next.p = s.p_next();
    next.q = s.q_next();
    return check_return_identities(s, next);
}

bool validate_l_condition(const BigInt& l, int d, int n, double dh_norm_bound) {
    mpq_class rhs(static_cast<double>(d) * n * n * dh_norm_bound);
    return mpq_class(l) > rhs;
}

bool ParamSchedule::consistent() const {
    for (std::size_t i = 1; i < stages.size(); ++i) {
        const auto& a = stages[i - 1];
        const auto& b = stages[i];
        if (b.p != a.p_next() || b.q != a.q_next() || b.n != a.n + 1) return false;
    }
    return true;
}

ParamSchedule build_schedule(const BigInt& p1, const BigInt& q1,
                             const std::vector<std::pair<BigInt, BigInt>>& kl, int d, EpsVariant v, double rho) {
    if (kl.empty()) throw ParameterError("schedule needs at least one stage");
    ParamSchedule s;
    s.stages.push_back(make_stage(1, d, p1, q1, kl[0].first, kl[0].second, v, rho));
    for (std::size_t i = 1; i < kl.size(); ++i)
        s.stages.push_back(next_stage(s.stages.back(), kl[i].first, kl[i].second));
    s.l_bound_witness.assign(s.stages.size(), std::nullopt);
    s.l_bound_witness[0] = 1.0;
    return s;
}

using nlohmann::json;

json to_json(const StageParams& s) {
    return json{{"n", s.n},
                {"d", s.d},
                {"p", s.p.get_str()},
                {"q", s.q.get_str()},
                {"k", s.k.get_str()},
                {"l", s.l.get_str()},
                {"alpha", s.alpha().str()},
                {"m", s.m.get_str()},
                {"r", s.r.get_str()},
                {"delta", s.delta.str()},
                {"epsilon", s.epsilon.str()},
                {"epsilon_variant", to_string(s.variant)},
                {"rho", s.rho}};
}

StageParams stage_from_json(const json& j) {
    auto big = [&](const char* key) { return parse_bigint(j.at(key).get<std::string>()); };
    StageParams s = make_stage(j.at("n").get<int>(), j.at("d").get<int>(), big("p"), big("q"), big("k"), big("l"),
                               eps_variant_from_string(j.value("epsilon_variant", std::string("twelve_d"))),
                               j.value("rho", 0.05));
    if (j.contains("r") && big("r") != s.r) throw ParameterError("stored r disagrees with (m p) mod q");
    return s;
}

json to_json(const ParamSchedule& s) {
    json arr = json::array();
    for (std::size_t i = 0; i < s.stages.size(); ++i) {
        json st = to_json(s.stages[i]);
        if (i < s.l_bound_witness.size() && s.l_bound_witness[i]) st["l_bound_witness"] = *s.l_bound_witness[i];
        arr.push_back(st);
    }
    return json{{"schema", "abc.stage_chain/1"}, {"stages", arr}};
}

ParamSchedule schedule_from_json(const json& j) {
    ParamSchedule s;
    for (const auto& st : j.at("stages")) {
        s.stages.push_back(stage_from_json(st));
        if (st.contains("l_bound_witness"))
            s.l_bound_witness.push_back(st.at("l_bound_witness").get<double>());
        else
            s.l_bound_witness.push_back(std::nullopt);
    }
    if (!s.consistent()) throw ParameterError("stage chain violates the p/q recursion");
    return s;
}

}  // namespace abc
