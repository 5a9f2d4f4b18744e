#include "abc/blockslide.hpp"
#include "abc/partitions.hpp"

#include <doctest.h>

using namespace abc;

TEST_CASE("T_3 and T_1 atoms") {
    auto f = PartitionFamily::T(2, 3);
    auto a = atoms(f);
    REQUIRE(a.size() == 3);
    for (int i = 0; i < 3; ++i) {
        CHECK(a[i][0].lo[0] == Rational(i, 3));
        CHECK(a[i][0].hi[0] == Rational(i + 1, 3));
        CHECK(a[i][0].lo[1] == 0);
        CHECK(a[i][0].hi[1] == 1);
    }
    auto one = atoms(PartitionFamily::T(2, 1));
    REQUIRE(one.size() == 1);
    CHECK(measure(one[0]) == 1);
}

TEST_CASE("G_{2,1} has four quarter atoms") {
    auto f = PartitionFamily::G(2, 2, 1);
    CHECK(f.atom_count() == 4);
    for (const auto& a : atoms(f)) {
        CHECK(a[0].hi[0] - a[0].lo[0] == Rational(1, 2));
        CHECK(a[0].hi[1] - a[0].lo[1] == Rational(1, 2));
    }
}

TEST_CASE("rotation action on T_3") {
    auto f = PartitionFamily::T(2, 3);
    CHECK(phi_action(f, Rational(1, 3)) == std::vector<std::uint64_t>{1, 2, 0});
    CHECK(phi_action(f, Rational(2, 3)) == std::vector<std::uint64_t>{2, 0, 1});
    CHECK_THROWS_AS(phi_action(f, Rational(1, 2)), std::invalid_argument);
}

TEST_CASE("locate uses half-open atoms") {
    auto T3 = PartitionFamily::T(2, 3);
    CHECK(locate({0, 0}, T3) == 0);
    CHECK(locate({Rational(1, 3), Rational(1, 2)}, T3) == 1);
    auto G = PartitionFamily::G(2, 2, 1);
    auto idx = locate({Rational(5, 6), 0}, G);
    Box b = atoms(G)[idx][0];
    CHECK(b.lo[0] == Rational(1, 2));
    CHECK(b.lo[1] == 0);
}

TEST_CASE("refinement between families") {
    CHECK(refines(PartitionFamily::T(2, 6), PartitionFamily::T(2, 3)));
    CHECK_FALSE(refines(PartitionFamily::T(2, 3), PartitionFamily::T(2, 6)));
    CHECK(refines(PartitionFamily::G(2, 2, 1), PartitionFamily::T(2, 2)));
}

TEST_CASE("atoms tile the torus") {
    for (auto f : {PartitionFamily::T(3, 4), PartitionFamily::G(3, 2, 3), PartitionFamily::Gj(3, 1, 2, 2),
                   PartitionFamily::S(2, 6, 2), PartitionFamily::R(2, {0, 2, 1}, 3, 3)}) {
        auto a = atoms(f);
        CHECK(a.size() == f.atom_count());
        Rational total = 0;
        for (const auto& u : a) total += measure(u);
        CHECK(total == 1);
        // pairwise disjoint on the natural grid
        GridSpec g = f.natural_grid();
        std::uint64_t cells = 0;
        CellSet all{g, {}};
        for (const auto& u : a) {
            CellSet c = to_cells(u, g);
            cells += c.cells.size();
            all = set_union(all, c);
        }
        CHECK(cells == g.cells());
        CHECK(all.cells.size() == g.cells());
    }
}
