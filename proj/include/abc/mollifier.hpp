#pragma once
// Heat-kernel smoothing of periodic step functions.
//
// The step function is written as g(frac(Np x)) where Np is its period count
// and g has L pieces on [0,1).  Everything is computed in that reduced
// coordinate, which makes the 1/Np periodicity exact in the formula.

#include "abc/step_function.hpp"

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace abc {

struct MollifyError : std::runtime_error {
    double achievable_eps = 0, achievable_delta = 0;
    MollifyError(const std::string& what, double e, double d)
        : std::runtime_error(what), achievable_eps(e), achievable_delta(d) {}
};

struct MollifyOptions {
    double sigma = 0;          // x-space kernel width; 0 derives it from (eps, delta)
    double strip = 0.25;       // complex evaluation wanted on |Im z| <= strip
    bool require_strip = false;  // throw instead of shrinking the strip capacity
    double tail = 1e-14;
    std::size_t max_harmonics = std::size_t(1) << 21;
};

class MollifiedStep {
public:
    using cplx = std::complex<double>;

    MollifiedStep() = default;

    const StepFunction& base() const { return base_; }
    std::uint64_t declared_period() const { return N_; }
    std::uint64_t period() const { return Np_; }   // actual, a multiple of N
    double sigma() const { return sx_; }          // x-space width
    double eps() const { return eps_; }
    double delta() const { return delta_; }
    double error_bound() const { return bound_; }  // proven sup outside F
    double bad_halfwidth() const { return t_ / double(Np_); }
    double bad_measure() const;                   // measure of F
    bool in_bad_set(double x) const;
    bool is_constant() const { return jumps_.empty(); }
    std::size_t harmonics() const { return coef_.size(); }
    double strip_capacity() const { return cap_; }
    bool overflow() const { return overflow_; }   // capacity below the requested strip

    // real line: erf route, falling back to the Fourier route for wide kernels
    double operator()(double x) const;
    cplx operator()(cplx z) const { return fourier(z); }
    double erf_route(double x) const;
    double fourier_route(double x) const { return fourier(cplx(x, 0)).real(); }
    cplx fourier(cplx z) const;

    double derivative(double x) const;
    cplx derivative(cplx z) const;

    // s(z + dz) - s(z) without cancellation
    cplx difference(cplx z, cplx dz) const;
    double difference(double x, double dx) const { return erf_route(x + dx) - erf_route(x); }

    template <class S>
    S eval(S x) const { return (*this)(x); }
    template <class S>
    S diff(S x, S dx) const { return difference(x, dx); }
    template <class S>
    S deriv(S x) const { return derivative(x); }

    friend MollifiedStep mollify_step(const StepFunction&, std::uint64_t, double, double, const MollifyOptions&);

private:
    StepFunction base_;
    std::uint64_t N_ = 1, Np_ = 1, L_ = 1;
    std::vector<double> vals_;                               // g on its L pieces
    std::vector<std::pair<std::uint64_t, double>> jumps_;   // (piece index, jump) sorted
    double mean_ = 0;
    double sa_ = 1, sx_ = 1;  // reduced and x-space widths
    double t_ = 0;            // reduced half-width of F components
    double eps_ = 0, delta_ = 0, bound_ = 0;
    double cap_ = 0;
    bool overflow_ = false;
    std::vector<cplx> coef_;  // c_j, j = 1..J, in the reduced coordinate

    double reduce(double x) const;
    cplx fourier_sum(cplx a, bool deriv) const;
    cplx fourier_diff(cplx a, cplx da) const;
};

MollifiedStep mollify_step(const StepFunction& s, std::uint64_t N, double eps, double delta,
                           const MollifyOptions& opt = {});

// Bound on |s_sigma - s| outside F for reduced width sa, half-width t, piece
// width w and largest jump jmax.
double gaussian_tail_bound(double sa, double t, double w, double jmax);

}  // namespace abc
