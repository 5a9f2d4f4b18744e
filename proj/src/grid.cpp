#include "abc/grid.hpp"

#include <algorithm>
#include <iterator>
#include <sstream>

namespace abc {

GridSpec::GridSpec(int dim, std::vector<std::uint64_t> dens) : d(dim), den(std::move(dens)) {
    if (static_cast<int>(den.size()) != d) throw std::invalid_argument("grid: one denominator per coordinate");
    for (auto v : den)
        if (v == 0) throw std::invalid_argument("grid: denominators must be >= 1");
}

std::uint64_t GridSpec::cells() const {
    unsigned __int128 c = 1;
    for (auto v : den) {
        c *= v;
        if (c > (static_cast<unsigned __int128>(1) << 62)) throw BudgetError("grid cell count overflows");
    }
    return static_cast<std::uint64_t>(c);
}

std::uint64_t GridSpec::stride(int axis) const {
    std::uint64_t s = 1;
    for (int i = 0; i < axis; ++i) s *= den[i];
    return s;
}

std::uint64_t GridSpec::index(const std::vector<std::uint64_t>& c) const {
    std::uint64_t idx = 0;
    for (int i = d - 1; i >= 0; --i) idx = idx * den[i] + c[i];
    return idx;
}

std::vector<std::uint64_t> GridSpec::coords(std::uint64_t idx) const {
    std::vector<std::uint64_t> c(d);
    for (int i = 0; i < d; ++i) {
        c[i] = idx % den[i];
        idx /= den[i];
    }
    return c;
}

Rational GridSpec::cell_volume() const {
    BigInt v = 1;
    for (auto x : den) v *= BigInt(static_cast<unsigned long>(x));
    return Rational(BigInt(1), v);
}

std::string GridSpec::str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < den.size(); ++i) os << (i ? "x" : "") << den[i];
    return os.str();
}

void check_budget(const GridSpec& g, std::uint64_t budget) {
    std::uint64_t c = g.cells();
    if (c > budget)
        throw BudgetError("stage grid " + g.str() + " has " + std::to_string(c) + " cells, over the budget of " +
                          std::to_string(budget));
    if (c > 0xFFFFFFFFull) throw BudgetError("stage grid exceeds 32-bit cell indexing");
}

Rational Box::measure() const {
    Rational m(1);
    for (std::size_t i = 0; i < lo.size(); ++i) m *= hi[i] - lo[i];
    return m;
}

bool Box::contains(const std::vector<Rational>& x) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (x[i] < lo[i] || x[i] >= hi[i]) return false;
    return true;
}

Rational measure(const BoxUnion& u) {
    Rational m(0);
    for (const auto& b : u) m += b.measure();
    return m;
}

Box full_box(int d) {
    Box b;
    b.lo.assign(d, Rational(0));
    b.hi.assign(d, Rational(1));
    return b;
}

BoxUnion translate(const BoxUnion& u, int axis, const Rational& t) {
    BoxUnion out;
    for (const auto& b : u) {
        Box nb = b;
        Rational lo = b.lo[axis] + t;
        Rational shift = Rational(lo.floor());
        lo -= shift;
        Rational hi = b.hi[axis] + t - shift;
        if (hi <= 1) {
            nb.lo[axis] = lo;
            nb.hi[axis] = hi;
            out.push_back(nb);
        } else {
            nb.lo[axis] = lo;
            nb.hi[axis] = Rational(1);
            out.push_back(nb);
            Box w = b;
            w.lo[axis] = Rational(0);
            w.hi[axis] = hi - 1;
            out.push_back(w);
        }
    }
    return out;
}

Rational CellSet::measure() const { return Rational(static_cast<long>(cells.size())) * grid.cell_volume(); }

static std::uint64_t grid_coord(const Rational& x, std::uint64_t den) {
    Rational s = x * Rational(BigInt(static_cast<unsigned long>(den)));
    if (!s.is_integer()) throw std::invalid_argument("box endpoint " + x.str() + " is not on the grid");
    return to_u64(s.num());
}

CellSet to_cells(const BoxUnion& u, const GridSpec& g) {
    CellSet cs;
    cs.grid = g;
    for (const auto& b : u) {
        std::vector<std::uint64_t> lo(g.d), hi(g.d);
        bool empty = false;
        for (int i = 0; i < g.d; ++i) {
            lo[i] = grid_coord(b.lo[i], g.den[i]);
            hi[i] = grid_coord(b.hi[i], g.den[i]);
            if (hi[i] <= lo[i]) empty = true;
        }
        if (empty) continue;
        std::vector<std::uint64_t> c = lo;
        while (true) {
            cs.cells.push_back(static_cast<std::uint32_t>(g.index(c)));
            int k = 0;
            while (k < g.d) {
                if (++c[k] < hi[k]) break;
                c[k] = lo[k];
                ++k;
            }
            if (k == g.d) break;
        }
    }
    std::sort(cs.cells.begin(), cs.cells.end());
    cs.cells.erase(std::unique(cs.cells.begin(), cs.cells.end()), cs.cells.end());
    return cs;
}

CellSet set_union(const CellSet& a, const CellSet& b) {
    CellSet r{a.grid, {}};
    std::set_union(a.cells.begin(), a.cells.end(), b.cells.begin(), b.cells.end(), std::back_inserter(r.cells));
    return r;
}

CellSet set_intersection(const CellSet& a, const CellSet& b) {
    CellSet r{a.grid, {}};
    std::set_intersection(a.cells.begin(), a.cells.end(), b.cells.begin(), b.cells.end(),
                          std::back_inserter(r.cells));
    return r;
}

CellSet set_difference(const CellSet& a, const CellSet& b) {
    CellSet r{a.grid, {}};
    std::set_difference(a.cells.begin(), a.cells.end(), b.cells.begin(), b.cells.end(), std::back_inserter(r.cells));
    return r;
}

std::uint64_t intersection_count(const CellSet& a, const CellSet& b) {
    std::uint64_t n = 0;
    auto i = a.cells.begin();
    auto j = b.cells.begin();
    while (i != a.cells.end() && j != b.cells.end()) {
        if (*i < *j)
            ++i;
        else if (*j < *i)
            ++j;
        else {
            ++n;
            ++i;
            ++j;
        }
    }
    return n;
}

std::uint64_t symmetric_difference_count(const CellSet& a, const CellSet& b) {
    return a.cells.size() + b.cells.size() - 2 * intersection_count(a, b);
}

std::string box_csv_row(const Box& b) {
    std::ostringstream os;
    for (std::size_t i = 0; i < b.lo.size(); ++i) os << (i ? "," : "") << b.lo[i].str() << "," << b.hi[i].str();
    return os.str();
}

}  // namespace abc
