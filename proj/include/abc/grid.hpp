#pragma once
// Uniform rational grids on T^d, half-open boxes and cell sets.

#include "abc/rational.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace abc {

struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Cells of width 1/den[i] along coordinate i.  Cell index is mixed radix with
// x1 varying fastest.
struct GridSpec {
    int d = 2;
    std::vector<std::uint64_t> den;

    GridSpec() = default;
    GridSpec(int dim, std::vector<std::uint64_t> dens);

    std::uint64_t cells() const;
    std::uint64_t index(const std::vector<std::uint64_t>& c) const;
    std::vector<std::uint64_t> coords(std::uint64_t idx) const;
    std::uint64_t stride(int axis) const;
    Rational cell_volume() const;
    bool operator==(const GridSpec& o) const { return d == o.d && den == o.den; }
    std::string str() const;
};

// Refuses grids beyond the budget before anything is allocated.
void check_budget(const GridSpec& g, std::uint64_t budget);

struct Box {
    std::vector<Rational> lo, hi;  // [lo, hi) per coordinate, 0 <= lo < hi <= 1

    Rational measure() const;
    bool contains(const std::vector<Rational>& x) const;
};

using BoxUnion = std::vector<Box>;

Rational measure(const BoxUnion& u);
// Translate along one axis modulo 1, splitting boxes that wrap.
BoxUnion translate(const BoxUnion& u, int axis, const Rational& t);
Box full_box(int d);

// Sorted, duplicate-free cell indices.
struct CellSet {
    GridSpec grid;
    std::vector<std::uint32_t> cells;

    Rational measure() const;
    bool empty() const { return cells.empty(); }
};

CellSet to_cells(const BoxUnion& u, const GridSpec& g);  // throws if boxes are off-grid
CellSet set_union(const CellSet& a, const CellSet& b);
CellSet set_intersection(const CellSet& a, const CellSet& b);
CellSet set_difference(const CellSet& a, const CellSet& b);
std::uint64_t symmetric_difference_count(const CellSet& a, const CellSet& b);
std::uint64_t intersection_count(const CellSet& a, const CellSet& b);

std::string box_csv_row(const Box& b);

}  // namespace abc
