#include "abc/blockslide.hpp"
#include "abc/hmap.hpp"
#include "abc/partitions.hpp"

#include <doctest.h>

using namespace abc;

TEST_CASE("psi functions for d=2, i=2, l=2, q=1") {
    StepFunction p1 = build_psi(1, 2, 2, 1, 2);
    CHECK(p1(Rational(1, 4)) == 0);
    CHECK(p1(Rational(3, 4)) == Rational(1, 4));
    StepFunction p3 = build_psi(3, 2, 2, 1, 2);
    CHECK(p3(Rational(1, 4)) == 0);
    CHECK(p3(Rational(3, 4)) == Rational(1, 4));
    CHECK(build_psi(1, 2, 1, 1, 2).is_zero());
}

TEST_CASE("l = 1 gives the identity") {
    GridSpec g(2, {4, 4});
    CHECK(to_permutation(compose_g(1, 1, 2), g).is_identity());
}

TEST_CASE("slide permutations are bijections and invert") {
    GridSpec g(2, {8, 6});
    Slide s{0, 1, StepFunction({Rational(0), Rational(3, 8), Rational(1, 8)})};
    BlockSlideMap m{2, {s, Slide{1, 0, StepFunction({Rational(1, 6), Rational(0)})}}};
    CellPermutation P = to_permutation(m, g);
    CHECK(P.is_bijection());
    CHECK(P.then(to_permutation(m.inverse(), g)).is_identity());
    std::vector<Rational> x{Rational(1, 16), Rational(5, 12)};
    CHECK(m.inverse().apply(m.apply(x)) == x);
}

TEST_CASE("g maps G_{l,q} onto T_{l^d q}") {
    auto run = [](int d, std::uint64_t l, std::uint64_t q) {
        std::vector<std::uint64_t> den(d, l);
        den[0] = q;
        for (int i = 0; i < d; ++i) den[0] *= l;
        return maps_partition(compose_g(l, q, d), PartitionFamily::G(d, l, q), PartitionFamily::T(d, den[0]),
                              GridSpec(d, den));
    };
    auto r = run(2, 2, 1);
    CHECK(r.ok);
    CHECK(r.atoms == 4);
    CHECK(run(3, 2, 1).ok);
    CHECK(run(2, 3, 2).ok);
}

TEST_CASE("g_3 maps G_{3,2,1} onto G_{2,2,1}") {
    GridSpec g(3, {8, 2, 2});
    auto r = maps_partition(build_g(3, 2, 1, 3), PartitionFamily::Gj(3, 3, 2, 1), PartitionFamily::Gj(3, 2, 2, 1), g);
    CHECK(r.ok);
}

TEST_CASE("commutation with phi^{1/q}") {
    HMap h = build_h_lpqr(6, 1, 3, 1, 2);
    CHECK(commutes_with_phi(h.perm, 3));
    CHECK(commutes_with_phi(CellPermutation(GridSpec(2, {6, 4})), 3));
    // x2 += s(x1) with s not 1/3 periodic
    GridSpec g(2, {6, 4});
    BlockSlideMap bad{2, {Slide{1, 0, StepFunction({Rational(1, 4), 0, 0, 0, 0, 0})}}};
    CHECK_FALSE(commutes_with_phi(to_permutation(bad, g), 3));
}

TEST_CASE("h block formula, worked block for (6,1,3,1)") {
    HLayout L = make_h_layout(6, 1, 3, 1, 2);
    CHECK(L.W == 648);
    ABlockIndex B;
    B.a = 0, B.b = 0, B.c = 0, B.e = 1, B.f = 2;
    B.j = 3;
    Box from = L.box(B);
    CHECK(from.lo[0] == Rational(8, 648));
    CHECK(from.hi[0] == Rational(9, 648));
    CHECK(from.lo[1] == Rational(1, 2));
    CHECK(from.hi[1] == Rational(2, 3));
    Box to = L.box(L.image(B));
    CHECK(to.lo[0] == Rational(255, 648));
    CHECK(to.hi[0] == Rational(256, 648));
    CHECK(to.lo[1] == Rational(1, 3));
    CHECK(to.hi[1] == Rational(1, 2));
}

TEST_CASE("e = 0 keeps the sector a = 0") {
    HLayout L = make_h_layout(6, 1, 3, 2, 2);
    for (std::uint64_t f = 0; f < 3; ++f) {
        ABlockIndex A;
        A.e = 0, A.f = f;
        CHECK(L.image(A).a == 0);
    }
}

TEST_CASE("h word equals the block formula and the combinatorics hold") {
    for (int d = 2; d <= 3; ++d)
        for (std::uint64_t r = 0; r < 3; ++r) {
            HMap h = build_h_lpqr(6, 1, 3, r, d);
            REQUIRE(h.word.has_value());
            CHECK(to_permutation(*h.word, h.layout.grid()) == h.perm);
            CombiReport rep = check_combi(h);
            CHECK(rep.pass());
            CHECK(rep.shift1_checked > 0);
            CHECK(rep.shift1_skipped > 0);  // e = q-1 excluded by range
        }
}

TEST_CASE("conjugacy identity and its negative control") {
    StageParams s = make_stage(1, 2, 1, 3, 1, 6);
    CHECK(verify_conjugacy_identity(s).pass());
    CHECK_FALSE(verify_conjugacy_identity(s, (to_u64(s.r) + 1) % 3).pass());
}
