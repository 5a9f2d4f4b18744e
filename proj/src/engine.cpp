#include "abc/engine.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <random>

namespace abc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double frac_double(const Rational& a) { return mod1(a).to_double(); }

std::uint64_t checked_u64(const BigInt& v, const char* what) {
    if (v <= 0 || !mpz_fits_ulong_p(v.get_mpz_t())) throw BudgetError(std::string("grid dimension overflow: ") + what);
    return v.get_ui();
}

CellPermutation conjugator_perm(const StageConjugator& c, const GridSpec& g) {
    if (c.identity) return CellPermutation(g);
    if (c.has_word) return to_permutation(c.word, g);
    // no word: g_d .. g_3 as slides, then the block formula
    const int d = c.params.d;
    const std::uint64_t l = to_u64(c.params.l), q = to_u64(c.params.q);
    BlockSlideMap gs{d, {}};
    for (int i = d; i >= 3; --i) gs = gs.then(build_g(i, l, q, d, true));
    return to_permutation(gs, g).then(apply_h_formula(*c.layout, g));
}

}  // namespace

std::string to_string(Mode m) {
    switch (m) {
        case Mode::Exact: return "exact";
        case Mode::Analytic: return "analytic";
        case Mode::Both: return "both";
    }
    return "exact";
}

Mode mode_from_string(const std::string& s) {
    if (s == "exact") return Mode::Exact;
    if (s == "analytic") return Mode::Analytic;
    if (s == "both") return Mode::Both;
    throw ParameterError("unknown mode '" + s + "' (exact | analytic | both)");
}

StageConjugator make_conjugator(const StageParams& s, Mode mode, const EngineOptions& opt) {
    StageConjugator c;
    c.params = s;
    const std::uint64_t l = to_u64(s.l), q = to_u64(s.q);
    if (l == 1) {
        c.identity = true;
        c.note = "l = 1: identity conjugator";
        return c;
    }
    const std::uint64_t p = to_u64(mod(s.p, s.q)), r = to_u64(s.r);
    c.layout = make_h_layout(l, p, q, r, s.d);
    auto w = h_slide_word(*c.layout, &c.note);
    if (w) {
        BlockSlideMap full{s.d, {}};
        for (int i = s.d; i >= 3; --i) full = full.then(build_g(i, l, q, s.d, true));
        c.word = full.then(*w);
        c.has_word = true;
    }
    if (has_analytic(mode)) {
        if (!c.has_word) throw std::runtime_error("analytic mode needs a slide word: " + c.note);
        c.analytic = std::make_shared<AnalyticBuild>(
            build_h_analytic(c.word, q, s.epsilon.to_double(), s.delta.to_double(), opt.analytic));
    }
    return c;
}

AnalyticTorusMap ConjugationStack::analytic_H() const {
    AnalyticTorusMap H(d);
    for (const auto& c : stages) {
        if (c.identity) continue;
        if (!c.analytic) throw std::runtime_error("stack has no analytic conjugator for stage " + std::to_string(c.params.n));
        H = H.then(c.analytic->h);
    }
    return H;
}

GridSpec stage_grid(const StageParams& s, const ConjugationStack& prev, const EngineOptions& opt) {
    const int d = s.d;
    BigInt W = 2 * pow(s.l, d) * s.q * s.q;
    BigInt x1 = lcm(W, s.q_next());
    BigInt x2 = 2 * s.l, xi = s.l;
    if (opt.tower_grid) {
        BigInt nq = BigInt(s.n) * s.q;
        x1 = lcm(W * nq, s.q_next());
        x2 *= nq;
        xi *= nq;
    }
    std::vector<BigInt> den(d, xi);
    den[0] = x1;
    if (d >= 2) den[1] = x2;
    auto refine = [&](const StageConjugator& c) {
        if (c.identity) return;
        GridSpec g = c.has_word ? natural_grid(c.word, to_u64(c.params.q)) : c.layout->grid();
        for (int i = 0; i < d; ++i) den[i] = lcm(den[i], BigInt(static_cast<unsigned long>(g.den[i])));
    };
    for (const auto& c : prev.stages) refine(c);
    std::vector<std::uint64_t> out(d);
    BigInt total = 1;
    for (int i = 0; i < d; ++i) {
        out[i] = checked_u64(den[i], "stage grid");
        total *= den[i];
    }
    if (total > BigInt(static_cast<unsigned long>(opt.cell_budget)))
        throw BudgetError("stage " + std::to_string(s.n) + " grid needs " + total.get_str() + " cells, budget " +
                          std::to_string(opt.cell_budget));
    return GridSpec(d, out);
}

StageMap build_stage(const StageParams& s, ConjugationStack& stack, const EngineOptions& opt) {
    if (!stack.stages.empty() && stack.d != s.d) throw ParameterError("stage dimension differs from the stack");
    stack.d = s.d;
    StageConjugator conj = make_conjugator(s, stack.mode, opt);
    stack.stages.push_back(conj);

    StageMap T;
    T.n = s.n;
    T.params = s;
    T.mode = stack.mode;
    const Rational a_next = s.alpha_next();
    const BigInt qn = s.q_next();
    bool ok_exact = true, ok_analytic = true;

    if (has_exact(stack.mode)) {
        T.grid = stage_grid(s, stack, opt);
        check_budget(T.grid, opt.cell_budget);
        CellPermutation H(T.grid);
        CellPermutation hn(T.grid);
        for (const auto& c : stack.stages) {
            hn = conjugator_perm(c, T.grid);
            H = H.then(hn);
        }
        ok_exact = commutes_with_phi(hn, to_u64(s.q));
        CellPermutation Hinv = H.inverse();
        CellPermutation R = rotation_permutation(T.grid, a_next);
        CellPermutation Tp = H.then(R).then(Hinv);

        const std::uint64_t qn64 = to_u64(qn);
        auto cyc = Tp.cycle_lengths();
        T.checks.cycles_divide = true;
        T.checks.base_orbit_full = false;
        for (auto L : cyc) {
            if (qn64 % L != 0) T.checks.cycles_divide = false;
            if (L == qn64) T.checks.base_orbit_full = true;
        }
        T.checks.period_identity = Tp.power(qn64).is_identity();

        // atom of F_i = H^{-1} Delta_i containing c is the x1 slab of H(c)
        const std::uint64_t n0 = T.grid.den[0], K = n0 / qn64, pn = to_u64(mod(s.p_next(), qn));
        bool atoms_ok = true;
        for (std::uint32_t c = 0; c < Tp.size() && atoms_ok; ++c) {
            std::uint64_t a = (H(c) % n0) / K, b = (H(Tp(c)) % n0) / K;
            if (b != (a + pn) % qn64) atoms_ok = false;
        }
        T.checks.atoms_permuted = atoms_ok;
        T.H = std::move(H);
        T.Hinv = std::move(Hinv);
        T.T = std::move(Tp);
    }

    if (has_analytic(stack.mode)) {
        T.H_an = stack.analytic_H();
        T.T_an = T.H_an.then(AnalyticTorusMap::rotation(s.d, 0, frac_double(a_next))).then(T.H_an.inverse());
        if (!conj.identity) {
            const AnalyticTorusMap& h = conj.analytic->h;
            const double an = frac_double(s.alpha());
            std::mt19937_64 rng(opt.seed);
            std::uniform_real_distribution<double> U(0.0, 1.0);
            double res = 0;
            for (std::uint64_t i = 0; i < opt.samples; ++i) {
                VecD x(s.d);
                for (int k = 0; k < s.d; ++k) x[k] = U(rng);
                VecD xs = x;
                xs[0] += an;
                VecD a = h.apply<double>(xs), b = h.apply<double>(x);
                b[0] += an;
                res = std::max(res, torus_dist(a, b));
            }
            T.checks.commute_residual = res;
            ok_analytic = res < 1e-10;
            T.checks.closeness = closeness_report(*conj.analytic, opt.samples, opt.seed);
        }
    }
    T.checks.commutes = ok_exact && ok_analytic;
    return T;
}

std::vector<Rational> apply_cells(const CellPermutation& P, const std::vector<Rational>& x) {
    const GridSpec& g = P.grid();
    std::vector<std::uint64_t> idx(g.d);
    std::vector<Rational> off(g.d);
    for (int i = 0; i < g.d; ++i) {
        Rational y = mod1(x[i]) * Rational(BigInt(static_cast<unsigned long>(g.den[i])));
        BigInt f = y.floor();
        idx[i] = to_u64(f);
        off[i] = y - Rational(f);
    }
    auto img = g.coords(P(static_cast<std::uint32_t>(g.index(idx))));
    std::vector<Rational> out(g.d);
    for (int i = 0; i < g.d; ++i)
        out[i] = (Rational(BigInt(static_cast<unsigned long>(img[i]))) + off[i]) /
                 Rational(BigInt(static_cast<unsigned long>(g.den[i])));
    return out;
}

Orbit evaluate(const StageMap& T, const std::vector<Rational>& x, std::uint64_t iterates,
               std::uint64_t max_iterates) {
    if (iterates > max_iterates) throw std::invalid_argument("evaluate: too many iterates");
    Orbit o;
    if (has_exact(T.mode)) {
        if (!T.T) throw std::runtime_error("evaluate: stage has no exact permutation");
        std::vector<Rational> y = x;
        for (auto& v : y) v = mod1(v);
        o.exact.push_back(y);
        for (std::uint64_t i = 0; i < iterates; ++i) {
            y = apply_cells(*T.T, y);
            o.exact.push_back(y);
        }
    }
    if (has_analytic(T.mode)) {
        VecD y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) y[i] = frac_double(x[i]);
        o.analytic.push_back(y);
        for (std::uint64_t i = 0; i < iterates; ++i) {
            y = T.T_an.apply<double>(y);
            for (int k = 0; k < y.size(); ++k) y[k] -= std::floor(y[k]);
            o.analytic.push_back(y);
        }
    }
    return o;
}

CrossModeReport compare_modes(const StageMap& T, std::uint64_t starts, std::uint64_t seed) {
    if (T.mode != Mode::Both || !T.T) throw std::runtime_error("compare_modes: needs a stage built in both modes");
    CrossModeReport r;
    r.starts = starts;
    r.eps = T.params.epsilon.to_double();
    std::mt19937_64 rng(seed);
    const BigInt D = BigInt(1) << 40;
    for (std::uint64_t s = 0; s < starts; ++s) {
        std::vector<Rational> x(T.params.d);
        VecD xd(T.params.d);
        for (int i = 0; i < T.params.d; ++i) {
            x[i] = Rational(BigInt(static_cast<unsigned long>(rng() >> 24)), D);
            xd[i] = x[i].to_double();
        }
        auto ye = apply_cells(*T.T, x);
        bool bad = false;
        VecD ya = T.T_an.apply_tracked(xd, bad);
        if (bad) {
            ++r.bad;
            continue;
        }
        VecD yev(T.params.d);
        for (int i = 0; i < T.params.d; ++i) yev[i] = ye[i].to_double();
        r.max_error_outside = std::max(r.max_error_outside, torus_dist(ya, yev));
    }
    return r;
}

double stage_gap_d_rho(const AnalyticTorusMap& Hprev, const AnalyticTorusMap& h, double alpha_n, double gap,
                       double rho, std::uint64_t samples) {
    const int d = h.dim();
    const std::uint64_t patterns = rho > 0 ? (std::uint64_t(1) << d) : 1;
    double worst = 0;
    for (double sg : {1.0, -1.0}) {
        for (std::uint64_t s = 0; s < samples; ++s) {
            VecD x = halton_point(s, d);
            for (std::uint64_t pat = 0; pat < patterns; ++pat) {
                VecC z(d);
                for (int i = 0; i < d; ++i) z[i] = cplx(x[i], (pat >> i & 1) ? -rho : rho);
                VecC w = Hprev.apply<cplx>(z);
                VecC v = h.apply<cplx>(w);
                VecC dv = VecC::Zero(d);
                dv[0] = sg * gap;
                h.apply_secant<cplx>(v, dv, true);
                dv += v - w;  // rounding of h^{-1} h
                VecC u = w;
                u[0] += sg * alpha_n;
                Hprev.apply_secant<cplx>(u, dv, true);
                for (int i = 0; i < d; ++i) {
                    cplx D = dv[i];
                    if (!std::isfinite(D.real()) || !std::isfinite(D.imag())) return kInf;
                    double n0 = -std::round(D.real());
                    worst = std::max(worst, std::abs(D + n0));
                }
            }
        }
    }
    return worst;
}

ChooseKResult choose_kn(const StageParams& draft, const ConjugationStack& prev, double rho, double budget,
                        const EngineOptions& eopt, const ChooseKOptions& kopt) {
    ChooseKResult res;
    res.k = kopt.k_start;
    if (std::isinf(budget) && budget > 0) return res;
    AnalyticTorusMap Hprev(draft.d);
    try {
        Hprev = prev.analytic_H();
    } catch (const std::exception& e) {
        res.failed = true;
        res.reason = e.what();
        return res;
    }
    const double an = frac_double(draft.alpha());
    std::map<std::string, StageConjugator> cache;
    for (std::uint64_t k = kopt.k_start; k <= kopt.k_ceiling; k *= 2) {
        StageParams s;
        try {
            s = make_stage(draft.n, draft.d, draft.p, draft.q, BigInt(static_cast<unsigned long>(k)), draft.l,
                           draft.variant, rho);
        } catch (const ParameterError&) {
            continue;  // k l odd
        }
        const std::string key = s.r.get_str();
        try {
            if (!cache.count(key)) cache.emplace(key, make_conjugator(s, Mode::Analytic, eopt));
        } catch (const MollifyError& e) {
            res.failed = true;
            res.k = k;
            res.reason = std::string(e.what()) + " (achievable eps " + std::to_string(e.achievable_eps) +
                         ", delta " + std::to_string(e.achievable_delta) + ")";
            return res;
        }
        const StageConjugator& c = cache.at(key);
        AnalyticTorusMap h = c.identity ? AnalyticTorusMap(draft.d) : c.analytic->h;
        ChooseKCertificate cert;
        cert.k = k;
        cert.rotation_gap = Rational(BigInt(1), s.q_next()).to_double();
        cert.d_rho = stage_gap_d_rho(Hprev, h, an, cert.rotation_gap, rho, kopt.samples);
        res.certificates.push_back(cert);
        res.k = k;
        if (!std::isfinite(cert.d_rho)) {
            res.failed = true;
            res.reason = "strip evaluation overflow at rho = " + std::to_string(rho);
            return res;
        }
        if (cert.d_rho < budget) return res;
    }
    res.failed = true;
    res.reason = "budget unreachable below the k ceiling";
    return res;
}

}  // namespace abc
