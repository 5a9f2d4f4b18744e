#include "abc/analytic.hpp"
#include "abc/hmap.hpp"
#include "abc/mollifier.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace abc;

namespace {
const double kPi = 3.14159265358979323846;
StepFunction two_level() { return StepFunction({Rational(0), Rational(1, 2)}); }
}  // namespace

TEST_CASE("step function basics") {
    StepFunction s({Rational(1), Rational(2), Rational(1), Rational(2)});
    CHECK(s.period() == 2);
    CHECK(s.coarsen().pieces() == 4);  // alternating values need every piece
    CHECK(StepFunction({Rational(1), Rational(1), Rational(2), Rational(2)}).coarsen().pieces() == 2);
    CHECK(s.refine(8).coarsen() == s.coarsen());
    CHECK(s.mean() == Rational(3, 2));
    CHECK(s.jumps().size() == 4);
    CHECK((s - s).is_zero());
}

TEST_CASE("constant step mollifies to itself") {
    auto m = mollify_step(StepFunction::constant(Rational(1, 2)), 1, 1e-3, 0.1);
    CHECK(m.is_constant());
    for (int i = 0; i < 100; ++i) CHECK(m(i / 100.0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("two-level step: proximity outside F on a dense grid") {
    auto s = two_level();
    auto m = mollify_step(s, 1, 1e-3, 0.1);
    double worst = 0;
    int outside = 0;
    for (int i = 0; i < 10000; ++i) {
        double x = (i + 0.5) / 1e4;
        if (m.in_bad_set(x)) continue;
        ++outside;
        worst = std::max(worst, std::abs(m(x) - s(x)));
    }
    CHECK(outside > 8000);
    CHECK(worst < 1e-3);
    CHECK(m.bad_measure() <= 0.1 + 1e-15);
    CHECK(m.error_bound() < 1e-3);
}

TEST_CASE("mollified step is 1/N periodic on complex points") {
    StepFunction s({Rational(0), Rational(1, 3), Rational(-1, 4), Rational(0), Rational(1, 3), Rational(-1, 4)});
    auto m = mollify_step(s, 2, 1e-3, 0.1);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1, 1);
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        Vec<cplx>::Scalar z(U(rng), 0.8 * U(rng));
        worst = std::max(worst, std::abs(m(z + cplx(0.5, 0)) - m(z)));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("erf and Fourier routes agree") {
    auto m = mollify_step(two_level(), 1, 1e-3, 0.1);
    double gap = 0;
    for (int i = 0; i < 500; ++i) {
        double x = std::fmod(i * 0.6180339887, 1.0);
        gap = std::max(gap, std::abs(m.erf_route(x) - m.fourier_route(x)));
    }
    CHECK(gap < 1e-12);
}

TEST_CASE("unreachable sharpness fails with achievable values") {
    MollifyOptions o;
    o.max_harmonics = 64;
    try {
        mollify_step(two_level(), 1, 1e-12, 1e-9, o);
        FAIL("expected MollifyError");
    } catch (const MollifyError& e) {
        CHECK(e.achievable_eps > 0);
        CHECK(e.achievable_delta > 0);
    }
}

TEST_CASE("strip norms") {
    double n = strip_norm([](cplx z) { return std::sin(2 * kPi * z); }, 0.1, 512);
    CHECK(n == doctest::Approx(std::cosh(2 * kPi * 0.1)).epsilon(0.01));
    CHECK(strip_norm([](cplx) { return cplx(-3, 0); }, 0.3, 64) == doctest::Approx(3));
    auto m = mollify_step(two_level(), 1, 1e-3, 0.1);
    double a = strip_norm([&](cplx z) { return m(z); }, 0.05, 256);
    double b = strip_norm([&](cplx z) { return m(z); }, 0.08, 256);
    CHECK(std::isfinite(a));
    CHECK(b > a);
}

TEST_CASE("d_rho on rotations and symmetry") {
    auto f = AnalyticTorusMap::rotation(2, 0, 0.1), g = AnalyticTorusMap::rotation(2, 0, 0.95);
    CHECK(d_rho(f, f, 0.05) == doctest::Approx(0).epsilon(1e-15));
    CHECK(d_rho(f, g, 0.05) == doctest::Approx(0.15).epsilon(1e-12));
    auto h = AnalyticTorusMap::rotation(2, 1, 0.3);
    CHECK(d_rho(f, h, 0.05) == doctest::Approx(d_rho(h, f, 0.05)).epsilon(1e-14));
}

TEST_CASE("derivative norms") {
    CHECK(derivative_norm(AnalyticTorusMap::identity(2), 50) == doctest::Approx(1));
    CHECK(derivative_norm(AnalyticTorusMap::rotation(2, 0, 0.3), 50) == doctest::Approx(1));
    AnalyticTorusMap H(2);
    MollifyOptions o;
    o.sigma = 0.02;
    auto s = std::make_shared<MollifiedStep>(mollify_step(two_level(), 1, 1e-3, 0.1, o));
    H.push(AnalyticElement{0, 1, s, 1, 0});
    double an = derivative_norm(H, 400), fd = derivative_norm_fd(H, 400);
    CHECK(std::abs(an - fd) / an < 1e-6);
}

TEST_CASE("identity block slide gives the identity analytic map") {
    auto b = build_h_analytic(BlockSlideMap::identity(2), 1, 1e-3, 0.1);
    CHECK(b.h.elements().empty());
    CHECK(b.bad_measure_bound == 0);
    auto r = closeness_report(b, 1000, 1);
    CHECK(r.sup_error_outside == 0);
    CHECK(r.bad == 0);
}

TEST_CASE("single slide is close to its model outside the stripes") {
    BlockSlideMap m{2, {Slide{0, 1, two_level()}}};
    auto b = build_h_analytic(m, 1, 1e-3, 0.1);
    auto r = closeness_report(b, 100000, 3);
    CHECK(r.pass());
}

TEST_CASE("analytic h_{6,1,3,1}: commutation, volume and inverse") {
    HMap h = build_h_lpqr(6, 1, 3, 1, 2);
    REQUIRE(h.word);
    auto b = build_h_analytic(*h.word, 3, 1e-4, 0.05);
    auto r = closeness_report(b, 1000, 1);
    CHECK(r.commute_residual < 1e-10);
    CHECK(r.pass());
    CHECK(jacobian_det_residual(b.h, 1000).all < 1e-8);
    CHECK(inverse_residual(b.h, 1000).all < 1e-8);
    // same verdict under another seed
    CHECK(closeness_report(b, 1000, 2).pass() == r.pass());
}

TEST_CASE("good domain measure") {
    GoodDomain G{2, 2, 1, 0.1};
    CHECK(G.measure() == doctest::Approx(0.64));
}
