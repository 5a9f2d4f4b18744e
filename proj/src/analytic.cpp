#include "abc/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace abc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double radical_inverse(std::uint64_t i, std::uint64_t base) {
    double inv = 1.0 / double(base), f = inv, r = 0;
    while (i > 0) {
        r += f * double(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

const std::uint64_t kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Complex sample points on the distinguished boundary: Halton real parts and
// every sign pattern of +-i rho.
template <class F>
void for_boundary_points(int d, double rho, std::uint64_t samples, F&& fn) {
    std::uint64_t patterns = rho > 0 ? (std::uint64_t(1) << d) : 1;
    for (std::uint64_t s = 0; s < samples; ++s) {
        VecD x = halton_point(s, d);
        for (std::uint64_t pat = 0; pat < patterns; ++pat) {
            VecC z(d);
            for (int i = 0; i < d; ++i) z[i] = cplx(x[i], (pat >> i & 1) ? -rho : rho);
            fn(z);
        }
    }
}

}  // namespace

AnalyticTorusMap AnalyticTorusMap::rotation(int d, int axis, double t) {
    AnalyticTorusMap m(d);
    AnalyticElement e;
    e.target = axis;
    e.shift = t;
    m.push(e);
    return m;
}

AnalyticTorusMap AnalyticTorusMap::inverse() const {
    AnalyticTorusMap r(d_);
    for (auto it = elems_.rbegin(); it != elems_.rend(); ++it) r.push(it->inverse());
    return r;
}

AnalyticTorusMap AnalyticTorusMap::then(const AnalyticTorusMap& other) const {
    AnalyticTorusMap r = *this;
    for (const auto& e : other.elems_) r.push(e);
    return r;
}

VecD AnalyticTorusMap::apply_tracked(VecD x, bool& bad) const {
    for (const auto& e : elems_) {
        if (!e.is_rotation() && e.s->in_bad_set(x[e.source])) bad = true;
        step(e, x);
    }
    return x;
}

double circle_dist(double a, double b) {
    double u = a - b;
    u -= std::floor(u);
    return std::min(u, 1 - u);
}

double torus_dist(const VecD& a, const VecD& b) {
    double m = 0;
    for (int i = 0; i < a.size(); ++i) m = std::max(m, circle_dist(a[i], b[i]));
    return m;
}

VecD halton_point(std::uint64_t i, int d) {
    VecD x(d);
    for (int k = 0; k < d; ++k) {
        double v = radical_inverse(i + 1, kPrimes[k % 12]) + std::sqrt(double(kPrimes[(k + 1) % 12]));
        x[k] = v - std::floor(v);
    }
    return x;
}

double strip_norm(const std::function<cplx(cplx)>& f, double rho, std::uint64_t samples) {
    if (!(rho > 0)) throw std::invalid_argument("strip_norm: rho must be positive");
    double m = 0;
    for (std::uint64_t s = 0; s < samples; ++s) {
        double x = radical_inverse(s + 1, 2) + std::sqrt(3.0);
        x -= std::floor(x);
        for (double y : {rho, -rho}) {
            cplx v = f(cplx(x, y));
            if (!finite(v)) return kInf;
            m = std::max(m, std::abs(v));
        }
    }
    return m;
}

double strip_norm(const std::function<cplx(const VecC&)>& f, int d, double rho, std::uint64_t samples) {
    if (!(rho > 0)) throw std::invalid_argument("strip_norm: rho must be positive");
    double m = 0;
    bool overflow = false;
    for_boundary_points(d, rho, samples, [&](const VecC& z) {
        if (overflow) return;
        cplx v = f(z);
        if (!finite(v)) overflow = true;
        else m = std::max(m, std::abs(v));
    });
    return overflow ? kInf : m;
}

double d_rho_tilde(const std::function<VecC(const VecC&)>& f, const std::function<VecC(const VecC&)>& g, int d,
                   double rho, std::uint64_t samples) {
    if (rho < 0) throw std::invalid_argument("d_rho: rho must be non-negative");
    std::vector<std::vector<cplx>> diff(d);
    bool overflow = false;
    for_boundary_points(d, rho, samples, [&](const VecC& z) {
        if (overflow) return;
        VecC a = f(z), b = g(z);
        for (int i = 0; i < d; ++i) {
            cplx v = a[i] - b[i];
            if (!finite(v)) overflow = true;
            diff[i].push_back(v);
        }
    });
    if (overflow) return kInf;
    double worst = 0;
    for (int i = 0; i < d; ++i) {
        if (diff[i].empty()) continue;
        // The best integer shift is near minus the mean real part.
        double mean = 0;
        for (auto v : diff[i]) mean += v.real();
        mean /= double(diff[i].size());
        double n0 = -std::round(mean);
        double best = kInf;
        for (double n : {n0 - 1, n0, n0 + 1}) {
            double m = 0;
            for (auto v : diff[i]) m = std::max(m, std::abs(v + n));
            best = std::min(best, m);
        }
        worst = std::max(worst, best);
    }
    return worst;
}

double d_rho(const AnalyticTorusMap& f, const AnalyticTorusMap& g, double rho, std::uint64_t samples) {
    int d = f.dim();
    auto fw = [&](const AnalyticTorusMap& m) {
        return [&m](const VecC& z) { return m.apply<cplx>(z); };
    };
    auto bw = [&](const AnalyticTorusMap& m) {
        return [&m](const VecC& z) { return m.apply_inverse<cplx>(z); };
    };
    double a = d_rho_tilde(fw(f), fw(g), d, rho, samples);
    double b = d_rho_tilde(bw(f), bw(g), d, rho, samples);
    return std::max(a, b);
}

double derivative_norm(const AnalyticTorusMap& H, std::uint64_t samples, double rho) {
    int d = H.dim();
    double m = 0;
    if (rho == 0) {
        for (std::uint64_t s = 0; s < samples; ++s) {
            Eigen::MatrixXd J = H.jacobian<double>(halton_point(s, d));
            if (!J.allFinite()) return kInf;
            m = std::max(m, J.cwiseAbs().maxCoeff());
        }
        return m;
    }
    bool overflow = false;
    for_boundary_points(d, rho, samples, [&](const VecC& z) {
        if (overflow) return;
        Eigen::MatrixXcd J = H.jacobian<cplx>(z);
        if (!J.allFinite()) overflow = true;
        else m = std::max(m, J.cwiseAbs().maxCoeff());
    });
    return overflow ? kInf : m;
}

namespace {

double auto_step(const AnalyticTorusMap& H, double h) {
    if (h > 0) return h;
    double smin = 1;
    for (const auto& e : H.elements())
        if (e.s && !e.s->is_constant()) smin = std::min(smin, e.s->sigma());
    return std::min(1e-6, 1e-4 * smin);
}

Eigen::MatrixXd fd_jacobian(const AnalyticTorusMap& H, const VecD& x, double h) {
    int d = H.dim();
    Eigen::MatrixXd J(d, d);
    for (int j = 0; j < d; ++j) {
        VecD xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        J.col(j) = (H.apply<double>(xp) - H.apply<double>(xm)) / (2 * h);
    }
    return J;
}

template <class F>
ResidualStats random_residual(const AnalyticTorusMap& H, std::uint64_t samples, std::uint64_t seed, F&& f) {
    ResidualStats r;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (std::uint64_t s = 0; s < samples; ++s) {
        VecD x(H.dim());
        for (int i = 0; i < H.dim(); ++i) x[i] = U(rng);
        bool bad = false;
        H.apply_tracked(x, bad);
        double v = f(x);
        ++r.points;
        r.all = std::max(r.all, v);
        if (!bad) {
            ++r.good_points;
            r.good = std::max(r.good, v);
        }
    }
    return r;
}

}  // namespace

double derivative_fd_gap(const AnalyticTorusMap& H, std::uint64_t samples, double h) {
    h = auto_step(H, h);
    double gap = 0;
    for (std::uint64_t s = 0; s < samples; ++s) {
        VecD x = halton_point(s, H.dim());
        Eigen::MatrixXd J = H.jacobian<double>(x);
        double scale = std::max(1.0, J.cwiseAbs().maxCoeff());
        gap = std::max(gap, (fd_jacobian(H, x, h) - J).cwiseAbs().maxCoeff() / scale);
    }
    return gap;
}

double derivative_norm_fd(const AnalyticTorusMap& H, std::uint64_t samples, double h) {
    h = auto_step(H, h);
    double m = 0;
    for (std::uint64_t s = 0; s < samples; ++s)
        m = std::max(m, fd_jacobian(H, halton_point(s, H.dim()), h).cwiseAbs().maxCoeff());
    return m;
}

ResidualStats jacobian_det_residual(const AnalyticTorusMap& H, std::uint64_t samples, std::uint64_t seed) {
    return random_residual(H, samples, seed,
                           [&](const VecD& x) { return std::abs(H.jacobian<double>(x).determinant() - 1); });
}

ResidualStats inverse_residual(const AnalyticTorusMap& H, std::uint64_t samples, std::uint64_t seed) {
    return random_residual(H, samples, seed, [&](const VecD& x) {
        return (H.apply_inverse<double>(H.apply<double>(x)) - x).cwiseAbs().maxCoeff();
    });
}

std::vector<double> GoodDomain::widths() const {
    std::vector<double> w(d);
    double ld = std::pow(double(l), d);
    w[0] = 1.0 / (2 * ld * double(q) * double(q));
    if (d >= 2) w[1] = 1.0 / (2.0 * double(l));
    for (int i = 2; i < d; ++i) w[i] = 1.0 / double(l);
    return w;
}

bool GoodDomain::contains(const VecD& x) const {
    auto w = widths();
    for (int i = 0; i < d; ++i) {
        double u = x[i] / w[i];
        u -= std::floor(u);
        if (u < delta || u > 1 - delta) return false;
    }
    return true;
}

double GoodDomain::measure() const { return std::pow(1 - 2 * delta, d); }

GridSpec natural_grid(const BlockSlideMap& m, std::uint64_t q) {
    std::vector<std::uint64_t> den(m.d, 1);
    den[0] = q;
    for (const auto& sl : m.slides) {
        StepFunction c = sl.s.coarsen();
        den[sl.source] = std::lcm(den[sl.source], c.pieces());
        for (const auto& v : c.values()) den[sl.target] = std::lcm(den[sl.target], to_u64(v.den()));
    }
    return GridSpec(m.d, den);
}

VecD apply_model(const BlockSlideMap& m, VecD x) {
    for (int i = 0; i < x.size(); ++i) x[i] -= std::floor(x[i]);
    for (const auto& sl : m.slides) {
        double v = x[sl.target] + sl.s(x[sl.source]);
        x[sl.target] = v - std::floor(v);
    }
    return x;
}

AnalyticBuild build_h_analytic(const BlockSlideMap& m, std::uint64_t q, double eps, double delta,
                               const AnalyticOptions& opt) {
    if (q == 0) throw std::invalid_argument("build_h_analytic: q must be positive");
    if (opt.check_commutation) {
        GridSpec g = natural_grid(m, q);
        check_budget(g, opt.cell_budget);
        if (!commutes_with_phi(to_permutation(m, g), q))
            throw CommutationError("build_h_analytic: block-slide map does not commute with phi^(1/q)");
    }
    AnalyticBuild b;
    b.model = m;
    b.q = q;
    b.eps = eps;
    b.delta = delta;
    b.h = AnalyticTorusMap(m.d);
    BlockSlideMap ms = m.simplified();
    const std::size_t K = ms.slides.size();
    if (K == 0) return b;

    // Half the delta budget goes to stripes; the eps budget is split so that
    // accumulated errors stay below every stripe half-width.
    b.slide_delta = delta / (2.0 * double(K));
    double tmin = kInf;
    for (const auto& sl : ms.slides) tmin = std::min(tmin, b.slide_delta / (2.0 * double(sl.s.coarsen().pieces())));
    b.slide_eps = std::min(eps, tmin) / (4.0 * double(K));
    for (const auto& sl : ms.slides) {
        StepFunction c = sl.s.coarsen();
        auto s = std::make_shared<MollifiedStep>(mollify_step(c, c.period(), b.slide_eps, b.slide_delta, opt.mollify));
        b.bad_measure_bound += s->bad_measure();
        AnalyticElement e;
        e.target = sl.target;
        e.source = sl.source;
        e.s = std::move(s);
        b.h.push(e);
    }
    return b;
}

ClosenessReport closeness_report(const AnalyticBuild& b, std::uint64_t samples, std::uint64_t seed) {
    ClosenessReport r;
    r.samples = samples;
    r.eps = b.eps;
    r.delta = b.delta;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const int d = b.h.dim();
    const std::uint64_t commute_samples = std::min<std::uint64_t>(samples, 1000);
    for (std::uint64_t s = 0; s < samples; ++s) {
        VecD x(d);
        for (int i = 0; i < d; ++i) x[i] = U(rng);
        bool bad = false;
        VecD y = b.h.apply_tracked(x, bad);
        if (bad) {
            ++r.bad;
        } else {
            r.sup_error_outside = std::max(r.sup_error_outside, torus_dist(y, apply_model(b.model, x)));
        }
        if (s < commute_samples) {
            VecD xs = x;
            xs[0] += 1.0 / double(b.q);
            VecD ys = b.h.apply<double>(xs);
            y[0] += 1.0 / double(b.q);
            r.commute_residual = std::max(r.commute_residual, torus_dist(ys, y));
        }
    }
    r.bad_fraction = double(r.bad) / double(samples);
    r.bad_stderr = std::sqrt(r.bad_fraction * (1 - r.bad_fraction) / double(samples));
    return r;
}

}  // namespace abc
