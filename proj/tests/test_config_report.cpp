#include "abc/config.hpp"
#include "abc/report.hpp"
#include "abc/svg.hpp"

#include <doctest.h>

#include <set>

using namespace abc;

TEST_CASE("config parsing") {
    RunConfig c = parse_config(R"(# a comment
d = 3
p1 = "3"
q1 = 5
kl = [[1, 10], ["1", "5000"]]
mode = "both"
seed = 42
)");
    CHECK(c.d == 3);
    CHECK(c.q1 == 5);
    REQUIRE(c.kl.size() == 2);
    CHECK(c.kl[1].second == 5000);
    CHECK(c.mode == Mode::Both);
    CHECK(c.seed == 42);
    CHECK_NOTHROW(validate(c));
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config("bogus = 1"), ConfigError);
    CHECK_THROWS_AS(parse_config("d = 2\nd = 3"), ConfigError);
    CHECK_THROWS_AS(parse_config("d = "), ConfigError);
    CHECK_THROWS_AS(parse_config("mode = \"fast\""), std::exception);
    // 2q does not divide l: rejected before any compute
    RunConfig c = parse_config("kl = [[1, 6]]");
    CHECK_THROWS_AS(validate(c), ConfigError);
    CHECK_THROWS_AS(run(c, false), ConfigError);
    RunConfig chain = parse_config("kl = [[1, 10], [1, 10]]");
    CHECK_THROWS_AS(validate(chain), ConfigError);
}

TEST_CASE("config json round trip keeps every key") {
    RunConfig c;
    auto j = c.to_json();
    for (const char* k : {"d", "rho", "p1", "q1", "kl", "mode", "seed", "cell_budget", "out"}) CHECK(j.contains(k));
}

TEST_CASE("minimal config: completes, and which checks fail") {
    RunConfig c;
    c.figures = false;
    RunReport r = run(c, false);
    std::set<std::string> failed;
    for (const auto& v : r.verdicts) {
        CHECK_FALSE(v.anchor.empty());
        CHECK_FALSE(v.lhs.empty());
        CHECK_FALSE(v.rhs.empty());
        if (!v.pass) failed.insert(v.check);
    }
    for (const auto& f : failed) MESSAGE("failing check: " << f);
    CHECK(r.all_pass());
}

TEST_CASE("reports are byte identical across runs") {
    RunConfig c;
    RunReport a = run(c, true), b = run(c, true);
    CHECK(dump_deterministic(a.doc) == dump_deterministic(b.doc));
    CHECK(a.files == b.files);
    CHECK(a.files.count("figures/tower_bases_stage1.svg"));
    // figures regenerated from the report equal the ones written by run
    auto again = render_figures(a.doc);
    for (const auto& [k, v] : again) CHECK(a.files.at(k) == v);
}

TEST_CASE("empty report renders nothing") {
    CHECK(render_figures(nlohmann::json::object()).empty());
}

TEST_CASE("h pattern blocks for (l=6,p=1,q=3)") {
    HLayout L = make_h_layout(6, 1, 3, to_u64(make_stage(1, 2, 1, 3, 2, 6).r), 2);
    auto blocks = h_pattern(L);
    CHECK(blocks.size() == L.blocks());
    // images tile the square: total measure 1 and no repeated image
    std::set<std::pair<std::string, std::string>> seen;
    Rational total = 0;
    for (const auto& b : blocks) {
        total += b.to.measure();
        seen.insert({b.to.lo[0].str(), b.to.lo[1].str()});
    }
    CHECK(total == 1);
    CHECK(seen.size() == blocks.size());
    // for each (b, e) the f-blocks land in one x1 column, stacked over x2
    std::map<std::tuple<std::uint64_t, std::uint64_t, std::uint64_t, std::uint64_t>, std::set<std::string>> cols;
    for (const auto& b : blocks)
        cols[{b.index.a, b.index.b, b.index.c, b.index.e * 100 + b.index.j}].insert(b.to.lo[0].str());
    for (const auto& [k, v] : cols) CHECK(v.size() == 1);
    std::string svg = svg_h_pattern(L);
    CHECK(svg.find("<svg") == 0);
    CHECK(svg == svg_h_pattern(L));
}

TEST_CASE("tower base figure for (p=3,q=5,m=3,r=4)") {
    StageParams s = make_stage(1, 2, 3, 5, 1, 6);
    std::string svg = svg_tower_bases(s);
    CHECK(svg.find(">A0<") != std::string::npos);
    CHECK(svg.find(">B0<") != std::string::npos);
    CHECK(svg == svg_tower_bases(s));
}
