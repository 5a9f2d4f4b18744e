#pragma once
// Towers of the (h, h+1) and cyclic approximations, weak distances and speed
// bookkeeping.  Tilde sets live in the coordinates after H_n; the exact
// towers are their pull-backs under H_n^{-1} on the stage grid.

#include "abc/engine.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace abc {

// Finite union of half-open intervals of the circle, kept sorted and merged.
class IntervalSet {
public:
    IntervalSet() = default;
    // Intervals [a, a + w), reduced mod 1; w <= 1.
    static IntervalSet from(const std::vector<std::pair<Rational, Rational>>& starts_widths);

    const std::vector<std::pair<Rational, Rational>>& intervals() const { return iv_; }
    IntervalSet rotate(const Rational& t) const;
    Rational measure() const;
    IntervalSet intersect(const IntervalSet& o) const;
    IntervalSet unite(const IntervalSet& o) const;
    bool operator==(const IntervalSet& o) const { return iv_ == o.iv_; }

private:
    std::vector<std::pair<Rational, Rational>> iv_;  // [lo, hi) within [0, 1]
    void normalize();
};

Rational symmetric_difference_measure(const IntervalSet& a, const IntervalSet& b);

enum class TowerLabel { HTower, HPlusOneTower, Cyclic };
std::string to_string(TowerLabel l);

struct TowerBase {
    int stage = 1;
    TowerLabel label = TowerLabel::HTower;
    IntervalSet x1;               // stripes
    std::vector<Box> cross;       // boxes in x2..xd (dimension d-1)
    Rational cross_measure;       // (1 - 2 delta)^{d-1}
    Rational stripe_width, offset;
    std::uint64_t stripes = 0;
    std::optional<CellSet> pulled;  // H_n^{-1} of the tilde set, exact mode

    BoxUnion tilde(int d) const;  // product boxes, wraps split
    Rational measure() const { return x1.measure() * cross_measure; }
};

TowerBase tilde_base(const StageParams& s, TowerLabel label);

struct Tower {
    TowerBase base;
    std::uint64_t height = 0;
    std::vector<CellSet> levels;  // exact levels T_n^i(c_0)
};

struct TowerPair {
    Tower B1, B2;
    Rational mu_B1, mu_B2;                    // from the levels
    Rational mu_B1_formula, mu_B2_formula;    // displayed closed forms
    Rational substantial_r;                   // 0.4 (1 - 2 delta)^{d-1}
    bool substantial1 = false, substantial2 = false;
    bool conjugacy_ok = false;  // T^i(c_0) = H^{-1}(phi^{i alpha} tilde c_0) for every level
    // Pairwise disjointness.  The h+1 tower as displayed overlaps itself
    // once m_n >= q_n - 1, so that case is reported rather than thrown;
    // overlap is the sum of level measures minus the measure of the union.
    bool disjoint1 = false, disjoint2 = false, disjoint = false;
    Rational overlap;
};

struct TowerError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Needs an exact stage built with EngineOptions::tower_grid.
TowerPair build_hh1_towers(const StageMap& T);
Tower build_cyclic_tower(const StageMap& T);

// Sum over atoms of mu(T(c) symdiff c_sigma(i)).
Rational weak_distance(const std::vector<CellSet>& xi, const CellPermutation& T, const std::vector<std::size_t>& sigma);

struct SampledDistance {
    double value = 0, stderr_ = 0;
    std::uint64_t samples = 0;
};
// Monte-Carlo version; atoms are membership tests and Tinv is the inverse map.
SampledDistance weak_distance_sampled(const std::vector<std::function<bool(const VecD&)>>& xi,
                                      const std::function<VecD(const VecD&)>& Tinv,
                                      const std::vector<std::size_t>& sigma, int d, std::uint64_t samples,
                                      std::uint64_t seed);

struct TowerAccounting {
    Rational base_measure, base_formula;
    Rational total;            // d(xi_n, T_n, sigma_n)
    Rational top1, top2;       // the two top-level discrepancies
    Rational closed_form;      // (6q - 4)(1 - 2 delta)^{d-1} / q_{n+1}
    Rational paper_bound;      // 3 q / q_{n+1}
    bool base_ok() const { return base_measure == base_formula; }
    bool sum_ok() const { return total == top1 + top2; }
    bool within_bound() const { return total <= paper_bound; }
};

// Exact, on the stage grid.
TowerAccounting tower_accounting(const StageMap& T, const TowerPair& P);
// Exact, on x1 intervals in tilde coordinates; any stage size.
TowerAccounting tower_accounting_intervals(const StageParams& s);

struct CyclicReport {
    std::uint64_t levels = 0;
    bool disjoint = false, returns = false;
    Rational level_measure, level_bound;  // >= (1 - 2 delta)^{d-1} / q_{n+1}
};
CyclicReport cyclic_report(const StageMap& T, const Tower& C);

struct SpeedReport {
    int n = 1;
    int d = 2;
    Rational finite;           // d(xi_n, T_n, sigma_n)
    Rational paper_bound;      // 3 q_n / q_{n+1}
    Rational tail;             // 40 d delta_{n+1}, quoted
    Rational m;                // m_n
    Rational ratio_finite;     // (finite + tail) m_n
    Rational ratio_bound;      // (3 q_n / q_{n+1} + tail) m_n
    Rational ratio_closed;     // 3/(2 q_n) + 20 d / ((n+1) q_n^2)
    Rational cyclic_tail;      // 20 d delta_{n+1}
    Rational cyclic_ratio;     // cyclic_tail * q_{n+1}
    Rational cyclic_closed;    // 20 d / (n+1)
    Rational cyclic_finite;    // d(Gamma_n, T_n, tilde sigma_n), zero
    bool finite_exact = true;  // false: q_n too large for intervals, finite is the closed form
    bool ratio_matches() const { return ratio_bound == ratio_closed; }
    bool cyclic_matches() const { return cyclic_ratio == cyclic_closed; }
    bool finite_within() const { return finite <= paper_bound; }
};

// Interval route up to max_stripes stripes per base.
SpeedReport speed_report(const StageParams& s, std::uint64_t max_stripes = 1000000);
// Both ratio sequences strictly decreasing along the chain.
bool speed_monotone(const std::vector<SpeedReport>& r);

struct RefinementStats {
    BigInt xi_levels = 0, xi_good = 0;
    Rational xi_bound;       // 2 (1 - 2 delta) m_n
    Rational xi_covered, xi_target;  // count * level measure, (1 - 1/q)(1 - 2 delta)^d
    BigInt gamma_levels = 0, gamma_good = 0;
    Rational gamma_bound;    // (1 - 2 delta) q_{n+1}
    Rational gamma_covered, gamma_target;  // (1 - 2 delta)^d
    bool pass() const {
        return Rational(xi_good) >= xi_bound && xi_covered >= xi_target &&
               Rational(gamma_good) >= gamma_bound && gamma_covered >= gamma_target;
    }
};

// Diameter proxy: drift i/q_{n+1} at most 1/(2 q_n^2) and left stripe edge
// inside the delta-inset of its x1 block.
RefinementStats partition_refinement_stats(const StageParams& s);

std::string tower_csv(const TowerBase& b, int d);

}  // namespace abc
