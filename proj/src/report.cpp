#include "abc/report.hpp"

#include "abc/hmap.hpp"
#include "abc/svg.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace abc {

using nlohmann::json;

namespace {

std::string dstr(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

bool compare(const Rational& a, const std::string& op, const Rational& b) {
    if (op == "<=") return a <= b;
    if (op == "<") return a < b;
    if (op == "==") return a == b;
    if (op == ">=") return a >= b;
    if (op == ">") return a > b;
    throw std::logic_error("unknown comparison " + op);
}

bool compare(double a, const std::string& op, double b) {
    if (op == "<=") return a <= b;
    if (op == "<") return a < b;
    if (op == "==") return a == b;
    if (op == ">=") return a >= b;
    if (op == ">") return a > b;
    throw std::logic_error("unknown comparison " + op);
}

struct Verdicts {
    std::vector<Verdict> v;

    void exact(int stage, const std::string& check, const std::string& anchor, const Rational& a,
               const std::string& op, const Rational& b, const std::string& note = "") {
        v.push_back({stage, check, anchor, op, a.str(), b.str(), a.to_double(), b.to_double(), compare(a, op, b), note});
    }
    void real(int stage, const std::string& check, const std::string& anchor, double a, const std::string& op,
              double b, const std::string& note = "") {
        v.push_back({stage, check, anchor, op, dstr(a), dstr(b), a, b, compare(a, op, b), note});
    }
    void flag(int stage, const std::string& check, const std::string& anchor, bool ok, const std::string& note = "") {
        v.push_back({stage, check, anchor, "==", ok ? "true" : "false", "true", ok ? 1.0 : 0.0, 1.0, ok, note});
    }
};

json rat(const Rational& r) { return json{{"exact", r.str()}, {"value", r.to_double()}}; }

json speed_json(const SpeedReport& r) {
    return json{{"n", r.n},
                {"finite", rat(r.finite)},
                {"finite_exact", r.finite_exact},
                {"paper_bound", rat(r.paper_bound)},
                {"tail", rat(r.tail)},
                {"m", rat(r.m)},
                {"ratio_finite", rat(r.ratio_finite)},
                {"ratio_bound", rat(r.ratio_bound)},
                {"ratio_closed", rat(r.ratio_closed)},
                {"cyclic_finite", rat(r.cyclic_finite)},
                {"cyclic_tail", rat(r.cyclic_tail)},
                {"cyclic_ratio", rat(r.cyclic_ratio)},
                {"cyclic_closed", rat(r.cyclic_closed)}};
}

std::string speed_csv(const std::vector<SpeedReport>& rows) {
    std::ostringstream os;
    os.precision(17);
    os << "n,finite,paper_bound,tail,ratio_finite,ratio_bound,ratio_closed,cyclic_ratio,cyclic_closed\n";
    for (const auto& r : rows)
        os << r.n << "," << r.finite.to_double() << "," << r.paper_bound.to_double() << "," << r.tail.to_double()
           << "," << r.ratio_finite.to_double() << "," << r.ratio_bound.to_double() << ","
           << r.ratio_closed.to_double() << "," << r.cyclic_ratio.to_double() << "," << r.cyclic_closed.to_double()
           << "\n";
    return os.str();
}

std::string stages_csv(const ParamSchedule& s) {
    std::ostringstream os;
    os << "n,p,q,k,l,m,r,delta,epsilon,p_next,q_next\n";
    for (const auto& x : s.stages)
        os << x.n << "," << x.p.get_str() << "," << x.q.get_str() << "," << x.k.get_str() << "," << x.l.get_str() << ","
           << x.m.get_str() << "," << x.r.get_str() << "," << x.delta.str() << "," << x.epsilon.str() << ","
           << x.p_next().get_str() << "," << x.q_next().get_str() << "\n";
    return os.str();
}

bool layout_fits(const StageParams& s, std::uint64_t budget) {
    if (mod(s.l, 2 * s.q) != 0) return false;
    BigInt cells = 2 * pow(s.l, s.d) * s.q * s.q * pow(s.l, s.d - 1) * 2;
    return cells <= BigInt(static_cast<unsigned long>(budget));
}

// Exact stage checks, towers and spectral diagnostics.
void exact_part(const RunConfig& c, const StageMap& T, json& sj, Verdicts& V, RunReport& R, bool with_files) {
    const int n = T.n;
    const StageParams& s = T.params;
    V.flag(n, "h_n commutes with phi^alpha_n", "conjugator commutation", T.checks.commutes);
    V.flag(n, "T_n^q_{n+1} = id", "periodicity of T_n", T.checks.period_identity);
    V.flag(n, "cycle lengths divide q_{n+1}", "periodicity of T_n", T.checks.cycles_divide);
    V.flag(n, "some cycle has length q_{n+1}", "periodicity of T_n", T.checks.base_orbit_full);
    V.flag(n, "T_n permutes H_n^-1 T_{q_{n+1}}", "rotation atoms", T.checks.atoms_permuted);
    sj["exact"] = json{{"commutes", T.checks.commutes},
                       {"period_identity", T.checks.period_identity},
                       {"cycles_divide", T.checks.cycles_divide},
                       {"base_orbit_full", T.checks.base_orbit_full},
                       {"atoms_permuted", T.checks.atoms_permuted}};
    if (!c.towers || !c.tower_grid) return;

    TowerPair P;
    try {
        P = build_hh1_towers(T);
    } catch (const TowerError& e) {
        V.flag(n, "tower construction", "tower levels disjoint", false, e.what());
        return;
    }
    TowerAccounting A = tower_accounting(T, P);
    Tower C = build_cyclic_tower(T);
    CyclicReport cr = cyclic_report(T, C);
    const Rational qn(s.q_next());

    V.exact(n, "base measure", "base measure formula", A.base_measure, "==", A.base_formula);
    V.exact(n, "mu(B1)", "tower measures", P.mu_B1, "==", P.mu_B1_formula);
    V.exact(n, "mu(B2)", "tower measures", P.mu_B2, "==", P.mu_B2_formula);
    V.exact(n, "mu(B1) + mu(B2)", "tower measures", P.mu_B1 + P.mu_B2, "<=", Rational(1));
    V.exact(n, "h tower substantial", "substantiality", P.mu_B1, ">", P.substantial_r);
    V.exact(n, "h+1 tower substantial", "substantiality", P.mu_B2, ">", P.substantial_r);
    V.flag(n, "levels follow the conjugated rotation", "tower levels", P.conjugacy_ok);
    V.exact(n, "h+1 tower level overlap", "tower levels disjoint", P.overlap, "==", Rational(0),
            "the displayed h+1 base overlaps its own iterates once m_n >= q_n - 1");
    V.exact(n, "d(xi_n,T_n,sigma_n) = top-level discrepancies", "weak distance accounting", A.total, "==",
            A.top1 + A.top2);
    V.exact(n, "d(xi_n,T_n,sigma_n) closed form", "weak distance accounting", A.total, "==", A.closed_form);
    V.exact(n, "d(xi_n,T_n,sigma_n) <= 3 q_n / q_{n+1}", "(h,h+1) discrepancy bound", A.total, "<=", A.paper_bound,
            "the bound counts one side of each symmetric difference");
    V.exact(n, "cyclic levels", "cyclic tower", Rational(long(cr.levels)), "==", qn);
    V.flag(n, "cyclic levels disjoint", "cyclic tower", cr.disjoint);
    V.flag(n, "T_n^q_{n+1} d_0 = d_0", "cyclic tower", cr.returns);
    V.exact(n, "cyclic level measure", "cyclic tower", cr.level_measure, ">=", cr.level_bound);

    sj["towers"] = json{{"m", to_u64(s.m)},
                        {"mu_B1", rat(P.mu_B1)},
                        {"mu_B2", rat(P.mu_B2)},
                        {"overlap_B2", rat(P.overlap)},
                        {"base_measure", rat(A.base_measure)},
                        {"d_total", rat(A.total)},
                        {"top1", rat(A.top1)},
                        {"top2", rat(A.top2)},
                        {"closed_form", rat(A.closed_form)},
                        {"paper_bound", rat(A.paper_bound)},
                        {"cyclic_levels", cr.levels}};
    if (with_files) {
        R.files["tables/towers_stage" + std::to_string(n) + ".csv"] =
            tower_csv(P.B1.base, s.d) + tower_csv(P.B2.base, s.d).substr(tower_csv(P.B2.base, s.d).find('\n') + 1);
    }

    if (!c.spectral || n != 1) return;
    const CellPermutation& Tp = *T.T;
    auto obs = tower_level_observables(P, T.grid);
    const std::uint64_t m = to_u64(s.m);
    std::vector<Observable> U1, Uh;
    for (const auto& f : obs) {
        U1.push_back(koopman_apply(Tp, f, 1));
        Uh.push_back(koopman_apply(Tp, f, std::int64_t(m + 1)));
    }
    std::vector<WeakLimitPair> even, odd;
    for (std::size_t i = 0; i < obs.size(); ++i)
        for (std::size_t j = 0; j < obs.size(); ++j)
            (i % 2 ? odd : even).push_back({inner(Uh[i], obs[j]), inner(U1[i], obs[j]), inner(obs[i], obs[j])});
    WeakLimitFit fe = fit_weak_limit(even), fo = fit_weak_limit(odd);
    for (const auto* f : {&fe, &fo}) {
        const std::string tag = f == &fe ? " (even levels)" : " (odd levels)";
        V.real(n, "weak-limit r > 0.05" + tag, "weak limit U^{h+1} -> rU + (1-r)Id", f->r, ">", 0.05);
        V.real(n, "weak-limit r < 0.95" + tag, "weak limit U^{h+1} -> rU + (1-r)Id", f->r, "<", 0.95);
        V.real(n, "weak-limit relative residual" + tag, "weak limit U^{h+1} -> rU + (1-r)Id", f->relative_residual, "<",
               c.residual_tol, f->warning);
    }
    V.real(n, "weak-limit |r_even - r_odd|", "weak limit U^{h+1} -> rU + (1-r)Id", std::abs(fe.r - fo.r), "<",
           c.r_stability);

    Observable g = Observable::random(T.grid, c.seed, 8);
    Observable ug = koopman_apply(Tp, g, 7);
    V.flag(n, "<U f, U f> = <f, f> bit for bit", "unitarity of U_T",
           inner_canonical(ug, ug) == inner_canonical(g, g) && inner_canonical(ug, g) == inner_canonical(g, ug));
    KoopmanCorrelations corr = correlations(Tp, obs[0], obs[0], c.spectral_lags);
    SpectralDensity dens = spectral_measure_estimate(corr);
    V.flag(n, "Cauchy-Schwarz on correlations", "correlations", corr.cauchy_schwarz);
    V.real(n, "Fejer mass - c_0", "spectral measure total mass", std::abs(dens.mass - corr.c[0]), "<", c.mass_tol);

    // kappa on quarter boxes, along tower-return times
    auto box = [&](Rational a0, Rational a1, Rational b0, Rational b1) {
        Box b = full_box(s.d);
        b.lo[0] = a0, b.hi[0] = a1, b.lo[1] = b0, b.hi[1] = b1;
        return to_cells(BoxUnion{b}, T.grid);
    };
    CellSet A1 = box(0, Rational(1, 2), 0, 1), A2 = box(0, 1, 0, Rational(1, 2)),
            A3 = box(Rational(1, 4), Rational(3, 4), Rational(1, 4), Rational(3, 4));
    std::vector<std::pair<CellSet, CellSet>> sets{{A1, A1}, {A2, A2}, {A3, A3}, {A1, A2}, {A1, A3}};
    json kap = json::array();
    for (std::uint64_t j = 1; j <= 3; ++j) {
        KappaEstimate K = kappa_statistic(Tp, m * j, sets);
        kap.push_back(json{{"k", m * j}, {"kappa", K.kappa}, {"spread", K.spread}, {"per_pair", K.per_pair},
                           {"excluded", K.excluded}});
    }
    sj["spectral"] = json{{"r_even", fe.r},
                          {"r_odd", fo.r},
                          {"relative_residual_even", fe.relative_residual},
                          {"relative_residual_odd", fo.relative_residual},
                          {"pairs_even", fe.pairs},
                          {"pairs_odd", fo.pairs},
                          {"c0", corr.c[0]},
                          {"fejer_mass", dens.mass},
                          {"density_warning", dens.warning},
                          {"kappa", kap}};
    R.doc["figures"]["density"] = json{{"theta", dens.theta}, {"density", dens.density}, {"mass", dens.mass}};
    if (with_files) {
        R.files["tables/correlations.csv"] = correlations_csv(corr);
        R.files["tables/density.csv"] = density_csv(dens);
    }
}

void analytic_part(const RunConfig& c, const StageMap& T, const ConjugationStack& stack, json& sj, Verdicts& V) {
    const int n = T.n;
    json aj;
    if (T.checks.closeness) {
        const auto& cl = *T.checks.closeness;
        V.real(n, "analytic h_n sup error outside E", "(eps,delta)-closeness", cl.sup_error_outside, "<", cl.eps);
        V.real(n, "analytic h_n bad fraction", "(eps,delta)-closeness", cl.bad_fraction, "<", cl.delta);
        V.real(n, "analytic h_n commutation residual", "conjugator commutation", T.checks.commute_residual, "<", 1e-8);
        aj = json{{"sup_error_outside", cl.sup_error_outside},
                  {"bad_fraction", cl.bad_fraction},
                  {"bad_stderr", cl.bad_stderr},
                  {"eps", cl.eps},
                  {"delta", cl.delta},
                  {"commute_residual", T.checks.commute_residual}};
    }
    if (c.choose_k && n >= 2) {
        ConjugationStack prev = stack;
        prev.stages.pop_back();
        ChooseKOptions ko;
        ko.samples = std::min<std::uint64_t>(c.samples, 256);
        ChooseKResult kr = choose_kn(T.params, prev, c.rho, T.params.epsilon.to_double(), c.engine_options(), ko);
        json certs = json::array();
        for (const auto& ct : kr.certificates)
            certs.push_back(json{{"k", ct.k}, {"d_rho", ct.d_rho}, {"rotation_gap", ct.rotation_gap}});
        aj["choose_k"] = json{{"k", kr.k}, {"failed", kr.failed}, {"reason", kr.reason}, {"certificates", certs}};
        if (kr.failed || kr.certificates.empty()) {
            V.flag(n, "choose_k found k_n", "convergence bookkeeping", false, kr.reason);
        } else {
            V.real(n, "d_rho(T_n, T_{n-1}) at chosen k", "convergence bookkeeping", kr.certificates.back().d_rho, "<",
                   T.params.epsilon.to_double());
        }
    }
    sj["analytic"] = aj;
}

}  // namespace

json to_json(const Verdict& v) {
    return json{{"stage", v.stage}, {"check", v.check},     {"anchor", v.anchor},
                {"lhs", v.lhs},     {"op", v.op},           {"rhs", v.rhs},
                {"lhs_value", v.lhs_value}, {"rhs_value", v.rhs_value}, {"pass", v.pass},
                {"note", v.note}};
}

bool RunReport::all_pass() const {
    for (const auto& v : verdicts)
        if (!v.pass) return false;
    return true;
}

std::string dump_deterministic(const json& j) { return j.dump(2) + "\n"; }

RunReport run(const RunConfig& c, bool with_files) {
    validate(c);
    RunReport R;
    Verdicts V;
    const ParamSchedule sch = c.schedule();
    R.doc["config"] = c.to_json();
    R.doc["chain"] = to_json(sch);
    R.doc["figures"] = json::object();

    ConjugationStack stack;
    stack.mode = c.mode;
    stack.d = c.d;
    EngineOptions eo = c.engine_options();
    json stages = json::array();
    std::vector<SpeedReport> speed;
    json tower_figs = json::array(), h_figs = json::array();

    for (const auto& s : sch.stages) {
        const int n = s.n;
        json sj;
        sj["params"] = to_json(s);
        ReturnIdentityReport ri = check_return_identities(s);
        V.exact(n, "m alpha_{n+1} = r/q + 1/(2q^2) mod 1", "return identities", ri.residual1, "==", Rational(0));
        V.exact(n, "(m+1) alpha_{n+1} identity mod 1", "return identities", ri.residual2, "==", Rational(0));
        if (layout_fits(s, c.cell_budget)) {
            ConjugacyReport cj = verify_conjugacy_identity(s);
            V.flag(n, "h_{l,p,q,r} combinatorics", "block map identities", cj.pass());
        }
        // block pictures only while they stay readable
        if (mod(s.l, 2 * s.q) == 0 && 2 * pow(s.l, s.d) * s.q * s.q * s.l <= 8000) {
            h_figs.push_back(json{{"l", to_u64(s.l)}, {"p", to_u64(s.p)}, {"q", to_u64(s.q)}, {"r", to_u64(s.r)},
                                  {"d", s.d}, {"stage", n}});
        }
        tower_figs.push_back(to_json(s));

        try {
            StageMap T = build_stage(s, stack, eo);
            if (!T.grid.den.empty()) sj["grid"] = T.grid.str();
            if (has_exact(c.mode) && T.T) exact_part(c, T, sj, V, R, with_files);
            if (has_analytic(c.mode)) analytic_part(c, T, stack, sj, V);
            if (c.mode == Mode::Both && T.T) {
                CrossModeReport cm = compare_modes(T, std::min<std::uint64_t>(c.samples, 1000), c.seed);
                V.real(n, "exact vs analytic T_n off the bad set", "(eps,delta)-closeness", cm.max_error_outside, "<",
                       cm.eps);
                sj["cross_mode"] = json{{"starts", cm.starts}, {"bad", cm.bad}, {"max_error_outside", cm.max_error_outside},
                                        {"eps", cm.eps}};
            }
        } catch (const BudgetError& e) {
            sj["skipped"] = e.what();
        } catch (const MollifyError& e) {
            sj["skipped"] = e.what();
            V.flag(n, "analytic conjugator", "(eps,delta)-closeness", false, e.what());
        }

        SpeedReport sr = speed_report(s);
        speed.push_back(sr);
        V.exact(n, "(h,h+1) ratio bound closed form", "(h,h+1) speed", sr.ratio_bound, "==", sr.ratio_closed);
        V.exact(n, "cyclic ratio closed form", "cyclic speed", sr.cyclic_ratio, "==", sr.cyclic_closed);
        V.exact(n, "finite-stage d <= 3 q_n / q_{n+1}", "(h,h+1) discrepancy bound", sr.finite, "<=", sr.paper_bound,
                sr.finite_exact ? "" : "closed form, stage too large for intervals");
        try {
            RefinementStats rs = partition_refinement_stats(s);
            V.exact(n, "good xi levels", "xi_n -> points", Rational(rs.xi_good), ">=", rs.xi_bound);
            V.exact(n, "xi coverage", "xi_n -> points", rs.xi_covered, ">=", rs.xi_target);
            V.exact(n, "good Gamma levels", "Gamma_n -> points", Rational(rs.gamma_good), ">=", rs.gamma_bound);
            V.exact(n, "Gamma coverage", "Gamma_n -> points", rs.gamma_covered, ">=", rs.gamma_target);
            sj["refinement"] = json{{"xi_good", rs.xi_good.get_str()},     {"xi_levels", rs.xi_levels.get_str()},
                                    {"xi_covered", rat(rs.xi_covered)},   {"gamma_good", rs.gamma_good.get_str()},
                                    {"gamma_levels", rs.gamma_levels.get_str()}, {"gamma_covered", rat(rs.gamma_covered)}};
        } catch (const BudgetError& e) {
            sj["refinement"] = json{{"skipped", e.what()}};
        }
        stages.push_back(sj);
    }
    if (speed.size() >= 2) V.flag(0, "speed ratios decrease along the chain", "speed of approximation", speed_monotone(speed));

    R.doc["stages"] = stages;
    json sp = json::array();
    for (const auto& r : speed) sp.push_back(speed_json(r));
    R.doc["speed"] = sp;
    if (c.figures) {
        // reference layouts: stripes with p=3, q=5, m=3 and the block map with p=1, q=3, l=6, k=2
        StageParams ref_t = make_stage(1, 2, 3, 5, 1, 6);
        json rt = to_json(ref_t);
        rt["n"] = 0;
        tower_figs.push_back(rt);
        StageParams ref_h = make_stage(1, 2, 1, 3, 2, 6);
        h_figs.push_back(json{{"l", 6}, {"p", 1}, {"q", 3}, {"r", to_u64(ref_h.r)}, {"d", 2}, {"stage", 0}});
        R.doc["figures"]["tower_bases"] = tower_figs;
        R.doc["figures"]["h_pattern"] = h_figs;
        R.doc["figures"]["speed"] = true;
    } else {
        R.doc["figures"] = json::object();
    }

    R.verdicts = V.v;
    json vj = json::array();
    std::size_t failed = 0;
    for (const auto& v : V.v) {
        vj.push_back(to_json(v));
        failed += !v.pass;
    }
    R.doc["verdicts"] = vj;
    R.doc["summary"] = json{{"checks", V.v.size()}, {"failed", failed}, {"pass", failed == 0}};

    if (with_files) {
        R.files["report.json"] = dump_deterministic(R.doc);
        R.files["tables/stages.csv"] = stages_csv(sch);
        R.files["tables/speed.csv"] = speed_csv(speed);
        if (c.figures)
            for (auto& [k, v] : render_figures(R.doc)) R.files[k] = v;
    }
    return R;
}

void write_outputs(const RunReport& r, const std::string& dir) {
    namespace fs = std::filesystem;
    for (const auto& [rel, body] : r.files) {
        fs::path p = fs::path(dir) / rel;
        fs::create_directories(p.parent_path());
        std::ofstream f(p, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + p.string());
        f << body;
    }
}

std::map<std::string, std::string> render_figures(const json& report) {
    std::map<std::string, std::string> out;
    if (!report.is_object() || !report.contains("figures")) return out;
    const json& F = report["figures"];
    if (F.contains("tower_bases"))
        for (const auto& sj : F["tower_bases"]) {
            const int n = sj["n"].get<int>();
            json fixed = sj;
            fixed["n"] = std::max(n, 1);
            StageParams s = stage_from_json(fixed);
            const std::string name = n == 0 ? "reference" : "stage" + std::to_string(n);
            out["figures/tower_bases_" + name + ".svg"] = svg_tower_bases(s);
        }
    if (F.contains("h_pattern"))
        for (const auto& hj : F["h_pattern"]) {
            HLayout L = make_h_layout(hj["l"], hj["p"], hj["q"], hj["r"], hj["d"]);
            const int n = hj["stage"].get<int>();
            const std::string name = n == 0 ? "reference" : "stage" + std::to_string(n);
            out["figures/h_pattern_" + name + ".svg"] = svg_h_pattern(L);
        }
    if (F.value("speed", false) && report.contains("chain")) {
        ParamSchedule sch = schedule_from_json(report["chain"]);
        std::vector<SpeedReport> rows;
        for (const auto& s : sch.stages) rows.push_back(speed_report(s));
        out["figures/speed.svg"] = svg_speed(rows);
    }
    if (F.contains("density")) {
        SpectralDensity d;
        d.theta = F["density"]["theta"].get<std::vector<double>>();
        d.density = F["density"]["density"].get<std::vector<double>>();
        d.mass = F["density"]["mass"].get<double>();
        out["figures/spectral_density.svg"] = svg_density(d);
    }
    return out;
}

}  // namespace abc
