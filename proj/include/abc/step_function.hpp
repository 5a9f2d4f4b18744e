#pragma once
#include "abc/rational.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace abc {

// Piecewise constant function on [0,1) with N equal half-open pieces
// [i/N, (i+1)/N).  Every step function of the construction lives on such a
// uniform partition.
class StepFunction {
public:
    StepFunction() : values_(1, Rational(0)) {}
    explicit StepFunction(std::vector<Rational> values);
    static StepFunction constant(const Rational& v) { return StepFunction({v}); }

    std::uint64_t pieces() const { return values_.size(); }
    const Rational& value(std::uint64_t i) const { return values_[i]; }
    const std::vector<Rational>& values() const { return values_; }
    std::vector<Rational> breakpoints() const;

    Rational operator()(const Rational& x) const;
    double operator()(double x) const;

    // Largest P with s(x + 1/P) = s(x); P divides pieces().
    std::uint64_t period() const;
    bool is_periodic(std::uint64_t P) const;
    StepFunction refine(std::uint64_t N) const;  // N must be a multiple of pieces()
    StepFunction coarsen() const;                // fewest equal pieces representing the same function

    // Cyclic jumps: (i, v_i - v_{i-1}) for nonzero differences, position i/N.
    std::vector<std::pair<std::uint64_t, Rational>> jumps() const;
    bool is_zero() const;
    Rational mean() const;
    Rational max_abs() const;

    friend StepFunction operator+(const StepFunction& a, const StepFunction& b);
    friend StepFunction operator-(const StepFunction& a);
    friend StepFunction operator-(const StepFunction& a, const StepFunction& b) { return a + (-b); }
    bool operator==(const StepFunction& o) const;

private:
    std::vector<Rational> values_;
};

}  // namespace abc
