#include "abc/blockslide.hpp"

#include "abc/partitions.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <set>

namespace abc {

namespace {

BigInt big(std::uint64_t v) { return BigInt(static_cast<unsigned long>(v)); }

std::uint64_t ipow(std::uint64_t b, int e) {
    std::uint64_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

// Integer shift (in target-cell units) for each piece of s.
std::vector<std::uint64_t> cell_shifts(const StepFunction& s, std::uint64_t den_target) {
    std::vector<std::uint64_t> sh(s.pieces());
    for (std::uint64_t i = 0; i < s.pieces(); ++i) {
        Rational v = s.value(i) * Rational(big(den_target));
        if (!v.is_integer())
            throw std::invalid_argument("slide value " + s.value(i).str() + " is not a multiple of 1/" +
                                        std::to_string(den_target));
        sh[i] = to_u64(mod(v.num(), big(den_target)));
    }
    return sh;
}

}  // namespace

BlockSlideMap BlockSlideMap::inverse() const {
    BlockSlideMap r{d, {}};
    for (auto it = slides.rbegin(); it != slides.rend(); ++it) r.slides.push_back(it->inverse());
    return r;
}

BlockSlideMap BlockSlideMap::then(const BlockSlideMap& other) const {
    BlockSlideMap r = *this;
    r.slides.insert(r.slides.end(), other.slides.begin(), other.slides.end());
    return r;
}

BlockSlideMap BlockSlideMap::simplified() const {
    BlockSlideMap r{d, {}};
    for (const auto& s : slides) {
        if (!r.slides.empty() && r.slides.back().target == s.target && r.slides.back().source == s.source) {
            r.slides.back().s = r.slides.back().s + s.s;
            if (r.slides.back().s.is_zero()) r.slides.pop_back();
            continue;
        }
        if (!s.s.is_zero()) r.slides.push_back(Slide{s.target, s.source, s.s.coarsen()});
    }
    return r;
}

std::vector<Rational> BlockSlideMap::apply(std::vector<Rational> x) const {
    for (auto& v : x) v = mod1(v);
    for (const auto& s : slides) x[s.target] = mod1(x[s.target] + s.s(x[s.source]));
    return x;
}

BoxUnion BlockSlideMap::apply(const BoxUnion& u) const {
    BoxUnion cur = u;
    for (const auto& s : slides) {
        BoxUnion next;
        Rational n(big(s.s.pieces()));
        for (const auto& b : cur) {
            BigInt first = (b.lo[s.source] * n).floor();
            Rational lo = b.lo[s.source];
            for (BigInt i = first;; ++i) {
                Rational edge = Rational(i + 1) / n;
                Rational hi = edge < b.hi[s.source] ? edge : b.hi[s.source];
                if (hi > lo) {
                    Box piece = b;
                    piece.lo[s.source] = lo;
                    piece.hi[s.source] = hi;
                    auto moved = translate({piece}, s.target, s.s.value(to_u64(mod(i, big(s.s.pieces())))));
                    next.insert(next.end(), moved.begin(), moved.end());
                }
                lo = hi;
                if (hi >= b.hi[s.source]) break;
            }
        }
        cur = std::move(next);
    }
    return cur;
}

CellPermutation::CellPermutation(GridSpec g) : grid_(std::move(g)) {
    std::uint64_t n = grid_.cells();
    if (n > 0xFFFFFFFFull) throw BudgetError("grid exceeds 32-bit cell indexing");
    img_.resize(n);
    std::iota(img_.begin(), img_.end(), 0u);
}

CellPermutation::CellPermutation(GridSpec g, std::vector<std::uint32_t> img) : grid_(std::move(g)), img_(std::move(img)) {
    if (img_.size() != grid_.cells()) throw std::invalid_argument("permutation size does not match grid");
}

bool CellPermutation::is_bijection() const {
    std::vector<bool> seen(img_.size(), false);
    for (auto v : img_) {
        if (v >= img_.size() || seen[v]) return false;
        seen[v] = true;
    }
    return true;
}

bool CellPermutation::is_identity() const {
    for (std::uint32_t i = 0; i < img_.size(); ++i)
        if (img_[i] != i) return false;
    return true;
}

CellPermutation CellPermutation::inverse() const {
    std::vector<std::uint32_t> inv(img_.size());
    for (std::uint32_t i = 0; i < img_.size(); ++i) inv[img_[i]] = i;
    return CellPermutation(grid_, std::move(inv));
}

CellPermutation CellPermutation::then(const CellPermutation& other) const {
    if (!(grid_ == other.grid_)) throw std::invalid_argument("composing permutations on different grids");
    std::vector<std::uint32_t> r(img_.size());
    for (std::uint32_t i = 0; i < img_.size(); ++i) r[i] = other.img_[img_[i]];
    return CellPermutation(grid_, std::move(r));
}

CellPermutation CellPermutation::power(std::uint64_t k) const {
    CellPermutation result(grid_);
    CellPermutation base = *this;
    while (k) {
        if (k & 1) result = result.then(base);
        base = base.then(base);
        k >>= 1;
    }
    return result;
}

std::vector<std::uint64_t> CellPermutation::cycle_lengths() const {
    std::vector<std::uint64_t> len(img_.size(), 0);
    for (std::uint32_t i = 0; i < img_.size(); ++i) {
        if (len[i]) continue;
        std::uint64_t n = 0;
        std::uint32_t c = i;
        do {
            c = img_[c];
            ++n;
        } while (c != i);
        c = i;
        do {
            len[c] = n;
            c = img_[c];
        } while (c != i);
    }
    return len;
}

CellSet CellPermutation::apply(const CellSet& s) const {
    CellSet r{grid_, {}};
    r.cells.reserve(s.cells.size());
    for (auto c : s.cells) r.cells.push_back(img_[c]);
    std::sort(r.cells.begin(), r.cells.end());
    return r;
}

void CellPermutation::apply_slide_inplace(const Slide& s) {
    std::uint64_t dsrc = grid_.den[s.source], dtgt = grid_.den[s.target];
    if (dsrc % s.s.pieces() != 0)
        throw std::invalid_argument("grid does not refine the step function's pieces");
    auto sh = cell_shifts(s.s, dtgt);
    std::uint64_t per = dsrc / s.s.pieces();
    std::uint64_t ss = grid_.stride(s.source), st = grid_.stride(s.target);
    for (auto& p : img_) {
        std::uint64_t cs = (p / ss) % dsrc;
        std::uint64_t ct = (p / st) % dtgt;
        std::uint64_t nt = ct + sh[cs / per];
        if (nt >= dtgt) nt -= dtgt;
        p = static_cast<std::uint32_t>(p + (nt - ct) * st);
    }
}

void CellPermutation::apply_rotation_inplace(int axis, const Rational& t) {
    std::uint64_t den = grid_.den[axis];
    Rational v = t * Rational(big(den));
    if (!v.is_integer()) throw std::invalid_argument("rotation by " + t.str() + " is not a grid shift");
    std::uint64_t sh = to_u64(mod(v.num(), big(den)));
    std::uint64_t st = grid_.stride(axis);
    for (auto& p : img_) {
        std::uint64_t c = (p / st) % den;
        std::uint64_t nc = c + sh;
        if (nc >= den) nc -= den;
        p = static_cast<std::uint32_t>(p + (nc - c) * st);
    }
}

void CellPermutation::write_csv(std::ostream& os) const {
    os << "cell,image\n";
    for (std::uint32_t i = 0; i < img_.size(); ++i) os << i << "," << img_[i] << "\n";
}

void CellPermutation::write_cycles_binary(std::ostream& os) const {
    // u32 cycle count, then per cycle: u32 length followed by the cells.
    std::vector<bool> seen(img_.size(), false);
    std::vector<std::vector<std::uint32_t>> cycles;
    for (std::uint32_t i = 0; i < img_.size(); ++i) {
        if (seen[i]) continue;
        std::vector<std::uint32_t> cyc;
        std::uint32_t c = i;
        do {
            seen[c] = true;
            cyc.push_back(c);
            c = img_[c];
        } while (c != i);
        cycles.push_back(std::move(cyc));
    }
    auto put = [&](std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
        os.write(reinterpret_cast<const char*>(b), 4);
    };
    put(static_cast<std::uint32_t>(cycles.size()));
    for (const auto& c : cycles) {
        put(static_cast<std::uint32_t>(c.size()));
        for (auto v : c) put(v);
    }
}

CellPermutation to_permutation(const BlockSlideMap& m, const GridSpec& g) {
    CellPermutation p(g);
    for (const auto& s : m.slides) p.apply_slide_inplace(s);
    return p;
}

CellPermutation rotation_permutation(const GridSpec& g, const Rational& t) {
    CellPermutation p(g);
    p.apply_rotation_inplace(0, t);
    return p;
}

StepFunction build_psi(int kind, int i, std::uint64_t l, std::uint64_t q, int d, bool modified) {
    if (i < 2 || i > d) throw std::invalid_argument("psi: coordinate index must satisfy 2 <= i <= d");
    if (kind < 1 || kind > 3) throw std::invalid_argument("psi: kind must be 1, 2 or 3");
    if (modified && (kind != 2 || i < 3)) throw std::invalid_argument("modified psi^(2) needs 3 <= i <= d");
    if (l < 1 || q < 1) throw std::invalid_argument("psi: l, q >= 1 required");
    BigInt scale = pow(big(l), static_cast<unsigned long>(d + 2 - i)) * big(q);
    if (kind == 1 || kind == 3) {
        std::vector<Rational> v(l);
        for (std::uint64_t j = 0; j < l; ++j) {
            if (kind == 1)
                v[j] = j == 0 ? Rational(0) : Rational(big(l - j), scale);
            else
                v[j] = Rational(big(j), scale);
        }
        return StepFunction(std::move(v));
    }
    if (!modified) {
        std::uint64_t n = to_u64(scale);
        std::vector<Rational> v(n);
        for (std::uint64_t j = 0; j < n; ++j) v[j] = Rational(big(j % l), big(l));
        return StepFunction(std::move(v));
    }
    std::uint64_t n = 2 * ipow(l, d) * q * q;
    std::uint64_t lo = 2 * ipow(l, i - 2) * q, hi = 2 * ipow(l, i - 1) * q;
    std::vector<Rational> v(n);
    for (std::uint64_t j = 0; j < n; ++j) {
        std::int64_t num = static_cast<std::int64_t>(j / lo) - static_cast<std::int64_t>(j / hi * l);
        v[j] = Rational(BigInt(num), big(l));
    }
    return StepFunction(std::move(v));
}

BlockSlideMap build_g(int i, std::uint64_t l, std::uint64_t q, int d, bool modified) {
    BlockSlideMap m{d, {}};
    int xi = i - 1;
    m.slides.push_back(Slide{0, xi, build_psi(1, i, l, q, d)});
    m.slides.push_back(Slide{xi, 0, build_psi(2, i, l, q, d, modified && i >= 3)});
    m.slides.push_back(Slide{0, xi, -build_psi(3, i, l, q, d)});
    return m;
}

BlockSlideMap compose_g(std::uint64_t l, std::uint64_t q, int d, bool modified) {
    BlockSlideMap m{d, {}};
    for (int i = d; i >= 2; --i) m = m.then(build_g(i, l, q, d, modified));
    return m;
}

bool commutes_with_phi(const CellPermutation& m, std::uint64_t q) {
    const GridSpec& g = m.grid();
    if (g.den[0] % q != 0) throw std::invalid_argument("grid not compatible with 1/q shifts");
    std::uint64_t sh = g.den[0] / q, n0 = g.den[0];
    auto rot = [&](std::uint32_t c) {
        std::uint64_t x = c % n0;
        std::uint64_t nx = x + sh;
        if (nx >= n0) nx -= n0;
        return static_cast<std::uint32_t>(c - x + nx);
    };
    for (std::uint32_t c = 0; c < m.size(); ++c)
        if (m(rot(c)) != rot(m(c))) return false;
    return true;
}

PartitionMapReport maps_partition(const BlockSlideMap& m, const PartitionFamily& from, const PartitionFamily& to,
                                  const GridSpec& g) {
    PartitionMapReport rep;
    CellPermutation p = to_permutation(m, g);
    auto src = atoms(from);
    auto dst = atoms(to);
    rep.atoms = src.size();
    std::set<std::uint64_t> hit;
    for (const auto& at : src) {
        CellSet img = p.apply(to_cells(at, g));
        if (img.empty()) continue;
        auto c = g.coords(img.cells.front());
        std::vector<Rational> corner(g.d);
        for (int i = 0; i < g.d; ++i) corner[i] = Rational(big(c[i]), big(g.den[i]));
        std::uint64_t target = locate(corner, to);
        CellSet want = to_cells(dst[target], g);
        if (want.cells == img.cells && hit.insert(target).second) ++rep.matched;
    }
    rep.ok = rep.matched == rep.atoms && rep.atoms == to.atom_count();
    return rep;
}

}  // namespace abc
