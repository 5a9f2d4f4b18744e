#include "abc/engine.hpp"

#include <doctest.h>

using namespace abc;

TEST_CASE("stage grid for (1,2,1,4)") {
    StageParams s = make_stage(1, 2, 1, 2, 1, 4);
    ConjugationStack st;
    GridSpec g = stage_grid(s, st, {});
    CHECK(g.den[0] == 128);  // 2 l^2 q^2
    CHECK(g.den[1] == 8);
}

TEST_CASE("exact stage returns to the identity after q_{n+1} steps") {
    StageParams s = make_stage(1, 2, 1, 2, 1, 4);
    ConjugationStack st;
    StageMap T = build_stage(s, st);
    REQUIRE(T.T);
    CHECK(T.T->power(to_u64(s.q_next())).is_identity());
    CHECK(T.checks.period_identity);
    CHECK(T.checks.cycles_divide);
    CHECK(T.checks.base_orbit_full);
    CHECK(T.checks.atoms_permuted);
    CHECK(T.checks.commutes);
    // a cell's orbit closes after its cycle length
    auto len = T.T->cycle_lengths();
    for (std::uint32_t c = 0; c < T.T->size(); c += 97) {
        CHECK(to_u64(s.q_next()) % len[c] == 0);
        CHECK(T.T->power(len[c])(c) == c);
    }
}

TEST_CASE("l = 1 stage is a bare rotation") {
    StageParams s = make_stage(1, 2, 1, 3, 2, 1);
    ConjugationStack st;
    StageMap T = build_stage(s, st);
    REQUIRE(T.T);
    CHECK(*T.T == rotation_permutation(T.grid, s.alpha_next()));
}

TEST_CASE("orbit of phi^{1/2}") {
    StageParams s = make_stage(1, 2, 1, 1, 2, 1);  // l = 1: T_1 = phi^{3/2}
    ConjugationStack st;
    StageMap T = build_stage(s, st);
    Orbit o = evaluate(T, {0, 0}, 4);
    REQUIRE(o.exact.size() == 5);
    CHECK(o.exact[0][0] == 0);
    CHECK(mod1(o.exact[1][0]) == Rational(1, 2));
    CHECK(mod1(o.exact[2][0]) == 0);
    CHECK(mod1(o.exact[3][0]) == Rational(1, 2));
}

TEST_CASE("stages over budget refuse before allocating") {
    StageParams s = make_stage(1, 2, 3, 5, 1, 10);
    ConjugationStack st;
    EngineOptions o;
    o.cell_budget = 1000;
    CHECK_THROWS_AS(build_stage(s, st, o), BudgetError);
}

TEST_CASE("both modes agree off the bad set") {
    StageParams s = make_stage(1, 2, 1, 3, 1, 6);
    ConjugationStack st;
    st.mode = Mode::Both;
    EngineOptions o;
    o.samples = 200;
    StageMap T = build_stage(s, st, o);
    REQUIRE(T.T);
    CrossModeReport c = compare_modes(T, 100, 1);
    CHECK(c.starts == 100);
    CHECK(c.pass());
}

TEST_CASE("choose_k: infinite budget, halving gap, overflow flag") {
    StageParams s1 = make_stage(1, 2, 1, 1, 1, 2);
    ConjugationStack st;
    st.mode = Mode::Analytic;
    EngineOptions o;
    o.analytic.mollify.sigma = 0.3;
    build_stage(s1, st, o);
    StageParams draft = next_stage(s1, 1, 8);
    ChooseKOptions ko;
    ko.samples = 32;
    auto inf = choose_kn(draft, st, 0.05, 1e300, o, ko);
    CHECK_FALSE(inf.failed);
    CHECK(inf.k == 1);
    ko.k_ceiling = 8;
    auto r = choose_kn(draft, st, 0.05, 0, o, ko);
    REQUIRE(r.certificates.size() >= 3);
    for (std::size_t i = 1; i < r.certificates.size(); ++i) {
        CHECK(r.certificates[i].k == 2 * r.certificates[i - 1].k);
        CHECK(r.certificates[i].rotation_gap == r.certificates[i - 1].rotation_gap / 2);
        CHECK(r.certificates[i].d_rho < r.certificates[i - 1].d_rho);
    }
    // faithful kernels are far too sharp for rho = 0.05
    EngineOptions sharp;
    ConjugationStack st2;
    st2.mode = Mode::Analytic;
    build_stage(s1, st2, sharp);
    auto bad = choose_kn(draft, st2, 0.05, 1e-3, sharp, ko);
    CHECK(bad.failed);
    CHECK_FALSE(bad.reason.empty());
}
