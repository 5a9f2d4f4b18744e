#include "abc/spectral.hpp"

#include <doctest.h>

#include <cmath>

using namespace abc;

namespace {

Observable obs(const GridSpec& g, std::vector<double> v) {
    Observable o = Observable::zeros(g);
    o.values = std::move(v);
    return o;
}

std::size_t argmax(const std::vector<double>& v) {
    return std::size_t(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

TEST_CASE("Koopman operator on small permutations") {
    GridSpec g(2, {2, 1});
    CellPermutation half = rotation_permutation(g, Rational(1, 2));
    Observable f = obs(g, {1, -1});
    CHECK(koopman_apply(half, f, 1).values == std::vector<double>{-1, 1});
    CHECK(koopman_apply(CellPermutation(g), f, 5).values == f.values);
}

TEST_CASE("unitarity is exact for permutations") {
    GridSpec g(2, {12, 5});
    CellPermutation T = rotation_permutation(g, Rational(5, 12));
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Observable f = Observable::random(g, seed), h = Observable::random(g, seed + 100);
        for (std::int64_t k : {1, 3, -2, 11}) {
            Observable Uf = koopman_apply(T, f, k), Uh = koopman_apply(T, h, k);
            CHECK(inner_canonical(Uf, Uf) == inner_canonical(f, f));
            CHECK(inner_canonical(Uf, Uh) == inner_canonical(f, h));
        }
    }
}

TEST_CASE("phi^{1/2}: alternating correlations, mass at z = -1") {
    GridSpec g(2, {2, 1});
    CellPermutation T = rotation_permutation(g, Rational(1, 2));
    Observable f = obs(g, {1, -1}).centered();
    auto c = correlations(T, f, f, 16);
    for (std::size_t k = 0; k < c.c.size(); ++k) CHECK(c.c[k] == (k % 2 ? -1.0 : 1.0));
    CHECK(c.cauchy_schwarz);
    auto s = spectral_measure_estimate(c);
    CHECK(s.theta[argmax(s.density)] == doctest::Approx(3.14159265358979323846));
    CHECK(s.mass == doctest::Approx(c.c[0]).epsilon(1e-12));
    for (double v : s.density) CHECK(v >= -1e-12);
}

TEST_CASE("identity map: flat correlations, mass at z = 1") {
    GridSpec g(2, {16, 4});
    Observable f = Observable::random(g, 9).centered();
    auto c = correlations(CellPermutation(g), f, f, 32);
    for (double v : c.c) CHECK(v == c.c[0]);
    auto s = spectral_measure_estimate(c);
    CHECK(argmax(s.density) == 0);
    CHECK(std::abs(s.mass - c.c[0]) < 1e-8);
}

TEST_CASE("constant observables are rejected") {
    GridSpec g(2, {2, 1});
    Observable f = obs(g, {1, 1});
    CHECK_THROWS_AS(correlations(CellPermutation(g), f, f, 4), SpectralError);
}

TEST_CASE("short windows warn") {
    GridSpec g(2, {2, 1});
    Observable f = obs(g, {1, -1});
    auto s = spectral_measure_estimate(correlations(CellPermutation(g), f, f, 3));
    CHECK_FALSE(s.warning.empty());
}

TEST_CASE("weak-limit fit endpoints") {
    const std::uint64_t h = 4;
    // exact period h+1: U^{h+1} = Id, so r = 0
    GridSpec g(2, {h + 1, 1});
    CellPermutation T = rotation_permutation(g, Rational(1, long(h + 1)));
    std::vector<std::pair<Observable, Observable>> pairs;
    for (std::uint64_t s = 1; s <= 4; ++s)
        pairs.push_back({Observable::random(g, s).centered(), Observable::random(g, s + 10).centered()});
    auto fit0 = fit_weak_limit(T, h, pairs);
    CHECK(fit0.r == doctest::Approx(0).epsilon(1e-12));
    CHECK(fit0.residual == doctest::Approx(0).epsilon(1e-12));
    CHECK_FALSE(fit0.in_unit_interval());
    // period h: U^{h+1} = U, so r = 1
    GridSpec g1(2, {h, 1});
    CellPermutation T1 = rotation_permutation(g1, Rational(1, long(h)));
    pairs.clear();
    for (std::uint64_t s = 1; s <= 4; ++s)
        pairs.push_back({Observable::random(g1, s).centered(), Observable::random(g1, s + 10).centered()});
    auto fit1 = fit_weak_limit(T1, h, pairs);
    CHECK(fit1.r == doctest::Approx(1).epsilon(1e-12));
    CHECK(fit1.residual == doctest::Approx(0).epsilon(1e-12));
}

TEST_CASE("degenerate pairs warn") {
    auto fit = fit_weak_limit(std::vector<WeakLimitPair>{{0.5, 0.5, 0.5}, {0.2, 0.2, 0.2}});
    CHECK(fit.ill_conditioned);
    CHECK_FALSE(fit.warning.empty());
}

TEST_CASE("kappa endpoints") {
    GridSpec g(2, {4, 1});
    CellSet A{g, {0, 1}};
    // identity: rigidity
    auto k0 = kappa_statistic(CellPermutation(g), 3, {{A, A}});
    CHECK(k0.kappa == doctest::Approx(0));
    // a quarter shift makes A and T B independent
    auto k1 = kappa_statistic(rotation_permutation(g, Rational(1, 4)), 1, {{A, A}});
    CHECK(k1.kappa == doctest::Approx(1));
    // B the whole torus: mu(A)mu(B) = mu(A cap B), excluded
    CellSet B{g, {0, 1, 2, 3}};
    auto kx = kappa_statistic(CellPermutation(g), 1, {{A, B}});
    CHECK(kx.excluded == 1);
    CHECK_FALSE(kx.notice.empty());
}

TEST_CASE("tilde level pairs agree with the grid route") {
    StageParams s = make_stage(1, 2, 3, 5, 1, 10);
    ConjugationStack st;
    EngineOptions o;
    o.tower_grid = true;
    StageMap T = build_stage(s, st, o);
    TowerPair P = build_hh1_towers(T);
    auto e = tower_level_observables(P, T.grid);
    const std::uint64_t m = to_u64(s.m);
    std::vector<std::pair<std::size_t, std::size_t>> ij{{0, 0}, {1, 3}, {4, 2}};
    auto tl = tilde_level_pairs(s, m, ij);
    for (std::size_t t = 0; t < ij.size(); ++t) {
        auto [i, j] = ij[t];
        CHECK(tl[t].a == doctest::Approx(inner(koopman_apply(*T.T, e[i], std::int64_t(m + 1)), e[j])).epsilon(1e-12));
        CHECK(tl[t].b == doctest::Approx(inner(koopman_apply(*T.T, e[i], 1), e[j])).epsilon(1e-12));
        CHECK(tl[t].c == doctest::Approx(inner(e[i], e[j])).epsilon(1e-12));
    }
}
