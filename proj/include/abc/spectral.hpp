#pragma once
// Koopman diagnostics on finite stages: correlations, weak-limit fits,
// kappa statistics and Fejer spectral densities.

#include "abc/towers.hpp"

#include <string>
#include <vector>

namespace abc {

struct SpectralError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Values on the cells of a grid; the L2 inner product carries the cell volume.
struct Observable {
    GridSpec grid;
    std::vector<double> values;
    bool mean_zero = false;
    bool approximate = false;  // produced by analytic transport

    static Observable zeros(const GridSpec& g);
    static Observable indicator(const CellSet& s);
    // Random integer values in [-range, range], fixed seed.
    static Observable random(const GridSpec& g, std::uint64_t seed, int range = 8);

    double mean() const;
    double norm() const;
    Observable centered() const;  // subtracts the mean, sets mean_zero
    Observable& operator+=(const Observable& o);
    Observable operator*(double a) const;
};

double inner(const Observable& f, const Observable& g);
// Same value bit for bit under any permutation of cells: the products are
// summed in sorted order.
double inner_canonical(const Observable& f, const Observable& g);

// U_T^k f = f o T^k.  Exact permutation of values when the stage has an exact
// map; analytic stages transport by evaluating T_an at cell centres.
Observable koopman_apply(const StageMap& T, const Observable& f, std::int64_t k);
Observable koopman_apply(const CellPermutation& T, const Observable& f, std::int64_t k);

struct KoopmanCorrelations {
    std::vector<double> c;   // c[k] = <U^k f, g>, k = 0..K-1
    double norm_f = 0, norm_g = 0;
    bool cauchy_schwarz = true;
};

// f and g must be mean-zero (to 1e-12 relative); anything else is rejected.
KoopmanCorrelations correlations(const CellPermutation& T, const Observable& f, const Observable& g,
                                 std::size_t K);

struct WeakLimitPair {
    double a = 0, b = 0, c = 0;  // <U^{h+1}f,g>, <Uf,g>, <f,g>
};

struct WeakLimitFit {
    double r = 0;
    double residual = 0;           // l2 norm of a - r b - (1 - r) c
    double relative_residual = 0;  // residual / ||a - c||
    std::size_t pairs = 0;
    bool ill_conditioned = false;
    std::string warning;
    bool in_unit_interval() const { return r > 0 && r < 1; }
};

WeakLimitFit fit_weak_limit(const std::vector<WeakLimitPair>& pairs);
WeakLimitFit fit_weak_limit(const CellPermutation& T, std::uint64_t h,
                            const std::vector<std::pair<Observable, Observable>>& pairs);

// Same fit for the level observables e_i = 1_{c_{i,1} cup c_{i,2}}, computed
// through the conjugacy: <U^k e_i, e_j> = mu(phi^{-k alpha_{n+1}} tilde L_i cap
// tilde L_j) exactly, since H_n preserves measure.  No grid is needed, so
// stages far beyond the cell budget are reachable.
std::vector<WeakLimitPair> tilde_level_pairs(const StageParams& s, std::uint64_t h,
                                             const std::vector<std::pair<std::size_t, std::size_t>>& ij);

// Mean-zero observables 1_{c_{i,1}} + 1_{c_{i,2}} for each level i < m_n.
std::vector<Observable> tower_level_observables(const TowerPair& P, const GridSpec& g);

struct KappaEstimate {
    double kappa = 0;       // mean over usable pairs
    double spread = 0;      // max - min
    std::vector<double> per_pair;
    std::size_t excluded = 0;
    std::string notice;
};

// mu(A cap T^k B) = kappa mu(A) mu(B) + (1 - kappa) mu(A cap B), solved per pair.
KappaEstimate kappa_statistic(const CellPermutation& T, std::uint64_t k,
                              const std::vector<std::pair<CellSet, CellSet>>& sets);

struct SpectralDensity {
    std::vector<double> theta, density;  // density w.r.t. d theta / (2 pi)
    double mass = 0;                     // mean of the density, equals c_0
    std::string warning;
};

// Fejer-weighted transform of a real symmetric correlation window.
SpectralDensity spectral_measure_estimate(const KoopmanCorrelations& corr, std::size_t points = 0);

std::string correlations_csv(const KoopmanCorrelations& c);
std::string density_csv(const SpectralDensity& s);

}  // namespace abc
