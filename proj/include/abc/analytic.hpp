#pragma once
// Real-analytic torus maps built from mollified slides, evaluated as
// composition stacks over double or complex points.

#include "abc/blockslide.hpp"
#include "abc/mollifier.hpp"

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <memory>
#include <random>
#include <vector>

namespace abc {

using cplx = std::complex<double>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
using VecD = Vec<double>;
using VecC = Vec<cplx>;

// x[target] += sign * s(x[source]), or x[target] += shift when s is null.
struct AnalyticElement {
    int target = 0, source = 1;
    std::shared_ptr<const MollifiedStep> s;
    double sign = 1;
    double shift = 0;

    bool is_rotation() const { return !s; }
    AnalyticElement inverse() const {
        AnalyticElement e = *this;
        e.sign = -sign;
        e.shift = -shift;
        return e;
    }
};

class AnalyticTorusMap {
public:
    AnalyticTorusMap() = default;
    explicit AnalyticTorusMap(int d) : d_(d) {}
    static AnalyticTorusMap identity(int d) { return AnalyticTorusMap(d); }
    static AnalyticTorusMap rotation(int d, int axis, double t);

    int dim() const { return d_; }
    const std::vector<AnalyticElement>& elements() const { return elems_; }
    void push(AnalyticElement e) { elems_.push_back(std::move(e)); }

    AnalyticTorusMap inverse() const;
    // this, then other
    AnalyticTorusMap then(const AnalyticTorusMap& other) const;

    // Lift evaluation; no reduction mod 1.
    template <class S>
    Vec<S> apply(Vec<S> x) const {
        for (const auto& e : elems_) step(e, x);
        return x;
    }
    template <class S>
    Vec<S> apply_inverse(Vec<S> x) const {
        for (auto it = elems_.rbegin(); it != elems_.rend(); ++it) step(it->inverse(), x);
        return x;
    }
    // Carries (x, dx) to (F(x), F(x + dx) - F(x)).
    template <class S>
    void apply_secant(Vec<S>& x, Vec<S>& dx, bool inverse = false) const {
        auto one = [&](const AnalyticElement& e) {
            if (e.is_rotation()) {
                x[e.target] += S(e.shift);
                return;
            }
            dx[e.target] += S(e.sign) * e.s->diff(x[e.source], dx[e.source]);
            x[e.target] += S(e.sign) * e.s->eval(x[e.source]);
        };
        if (!inverse)
            for (const auto& e : elems_) one(e);
        else
            for (auto it = elems_.rbegin(); it != elems_.rend(); ++it) one(it->inverse());
    }
    // DF by the chain rule; each elementary factor is unipotent.
    template <class S>
    Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> jacobian(Vec<S> x) const {
        Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> J =
            Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>::Identity(d_, d_);
        for (const auto& e : elems_) {
            if (!e.is_rotation()) {
                S ds = S(e.sign) * e.s->deriv(x[e.source]);
                J.row(e.target) += ds * J.row(e.source);
            }
            step(e, x);
        }
        return J;
    }

    // Real evaluation that also reports whether the trajectory met a bad stripe.
    VecD apply_tracked(VecD x, bool& bad) const;

private:
    int d_ = 2;
    std::vector<AnalyticElement> elems_;

    template <class S>
    static void step(const AnalyticElement& e, Vec<S>& x) {
        if (e.is_rotation())
            x[e.target] += S(e.shift);
        else
            x[e.target] += S(e.sign) * e.s->eval(x[e.source]);
    }
};

// Distance on the circle.
double circle_dist(double a, double b);
double torus_dist(const VecD& a, const VecD& b);

// Halton points with a fixed irrational shift: prefix stable, so sampled
// sups only grow, and never on the rational jump positions.
VecD halton_point(std::uint64_t i, int d);

// Boundary sampling of sup |f| over the strip |Im z| < rho.
double strip_norm(const std::function<cplx(cplx)>& f, double rho, std::uint64_t samples);
// d-variable version on the distinguished boundary Im z_i = +-rho.
double strip_norm(const std::function<cplx(const VecC&)>& f, int d, double rho, std::uint64_t samples);

double d_rho(const AnalyticTorusMap& f, const AnalyticTorusMap& g, double rho, std::uint64_t samples = 256);
// One side only, sup_i inf_n ||(f - g)_i + n||_rho.
double d_rho_tilde(const std::function<VecC(const VecC&)>& f, const std::function<VecC(const VecC&)>& g, int d,
                   double rho, std::uint64_t samples);

// max_{i,j} sup |dF_i/dx_j|; rho = 0 samples the real torus.
double derivative_norm(const AnalyticTorusMap& H, std::uint64_t samples, double rho = 0);
// Largest relative gap between analytic and central-difference Jacobians.
// h = 0 picks a step well below the sharpest kernel width.
double derivative_fd_gap(const AnalyticTorusMap& H, std::uint64_t samples, double h = 0);
// Sampled sup of |dF_i/dx_j| from central differences alone.
double derivative_norm_fd(const AnalyticTorusMap& H, std::uint64_t samples, double h = 0);

// Residuals at random points, split by whether the trajectory stays off the
// bad stripes.  Inside the stripes the Jacobian entries are of order 1/sigma
// and double rounding alone dominates.
struct ResidualStats {
    double all = 0, good = 0;
    std::uint64_t points = 0, good_points = 0;
};
ResidualStats jacobian_det_residual(const AnalyticTorusMap& H, std::uint64_t samples, std::uint64_t seed = 1);
ResidualStats inverse_residual(const AnalyticTorusMap& H, std::uint64_t samples, std::uint64_t seed = 1);

// Delta-inset blocks: x1 cells of width 1/(2 l^d q^2), x2 of 1/(2l), others 1/l.
struct GoodDomain {
    int d = 2;
    std::uint64_t l = 1, q = 1;
    double delta = 0;

    std::vector<double> widths() const;
    bool contains(const VecD& x) const;
    double measure() const;
};

struct ClosenessReport {
    std::uint64_t samples = 0, bad = 0;
    double sup_error_outside = 0;  // over sampled points not in E
    double bad_fraction = 0, bad_stderr = 0;
    double eps = 0, delta = 0;
    double commute_residual = 0;   // |h(phi x) - phi h(x)| over samples
    bool pass() const { return sup_error_outside < eps && bad_fraction < delta; }
};

struct AnalyticBuild {
    AnalyticTorusMap h;
    BlockSlideMap model;
    std::uint64_t q = 1;
    double eps = 0, delta = 0;
    double slide_eps = 0, slide_delta = 0;  // per elementary slide
    double bad_measure_bound = 0;           // sum of stripe measures
};

struct AnalyticOptions {
    MollifyOptions mollify;
    std::uint64_t cell_budget = 100000000;
    bool check_commutation = true;
};

struct CommutationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

AnalyticBuild build_h_analytic(const BlockSlideMap& m, std::uint64_t q, double eps, double delta,
                               const AnalyticOptions& opt = {});

// Closeness of h to its block-slide model on random points.
ClosenessReport closeness_report(const AnalyticBuild& b, std::uint64_t samples, std::uint64_t seed);

// Block-slide map evaluated on a double point (reduced mod 1).
VecD apply_model(const BlockSlideMap& m, VecD x);

// Coarsest grid on which every slide of m acts by cells.
GridSpec natural_grid(const BlockSlideMap& m, std::uint64_t q);

}  // namespace abc
