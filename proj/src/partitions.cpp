#include "abc/partitions.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

namespace abc {

namespace {

std::uint64_t ipow(std::uint64_t b, int e) {
    unsigned __int128 r = 1;
    for (int i = 0; i < e; ++i) {
        r *= b;
        if (r > (static_cast<unsigned __int128>(1) << 62)) throw BudgetError("partition too fine");
    }
    return static_cast<std::uint64_t>(r);
}

Rational frac(std::uint64_t a, std::uint64_t b) {
    return Rational(BigInt(static_cast<unsigned long>(a)), BigInt(static_cast<unsigned long>(b)));
}

// Number of cells of each box-product family along every coordinate.
std::vector<std::uint64_t> product_divisions(const PartitionFamily& f) {
    std::vector<std::uint64_t> n(f.d, 1);
    switch (f.kind) {
        case PartitionKind::T_q: n[0] = f.q; break;
        case PartitionKind::G_lq:
            n[0] = f.l * f.q;
            for (int i = 1; i < f.d; ++i) n[i] = f.l;
            break;
        case PartitionKind::G_jlq:
            if (f.j == 0) {
                n[0] = ipow(f.l, f.d + 1) * f.q;
            } else {
                n[0] = ipow(f.l, f.d + 1 - f.j) * f.q;
                for (int i = 1; i < f.j; ++i) n[i] = f.l;
            }
            break;
        case PartitionKind::S_kql:
            n[0] = f.k * f.q;
            n[1] = f.l;
            break;
        case PartitionKind::R_akq: n[0] = f.k * f.q; break;
    }
    return n;
}

}  // namespace

PartitionFamily PartitionFamily::T(int d, std::uint64_t q) {
    if (q < 1 || d < 1) throw std::invalid_argument("T_q: q >= 1 required");
    PartitionFamily f;
    f.kind = PartitionKind::T_q;
    f.d = d;
    f.q = q;
    return f;
}

PartitionFamily PartitionFamily::G(int d, std::uint64_t l, std::uint64_t q) {
    if (l < 1 || q < 1 || d < 2) throw std::invalid_argument("G_lq: l, q >= 1 and d >= 2 required");
    PartitionFamily f;
    f.kind = PartitionKind::G_lq;
    f.d = d;
    f.l = l;
    f.q = q;
    return f;
}

PartitionFamily PartitionFamily::Gj(int d, int j, std::uint64_t l, std::uint64_t q) {
    if (j < 0 || j > d) throw std::invalid_argument("G_jlq: j must lie in [0, d], got " + std::to_string(j));
    if (l < 1 || q < 1 || d < 2) throw std::invalid_argument("G_jlq: l, q >= 1 and d >= 2 required");
    PartitionFamily f;
    f.kind = PartitionKind::G_jlq;
    f.d = d;
    f.j = j;
    f.l = l;
    f.q = q;
    return f;
}

PartitionFamily PartitionFamily::R(int d, std::vector<std::uint64_t> a, std::uint64_t k, std::uint64_t q) {
    if (k < 1 || q < 1) throw std::invalid_argument("R_akq: k, q >= 1 required");
    if (a.empty()) a.assign(k, 0);
    if (a.size() != k) throw std::invalid_argument("R_akq: a must have k entries");
    for (auto v : a)
        if (v >= q) throw std::invalid_argument("R_akq: a(i) must lie in [0, q)");
    PartitionFamily f;
    f.kind = PartitionKind::R_akq;
    f.d = d;
    f.a = std::move(a);
    f.k = k;
    f.q = q;
    return f;
}

PartitionFamily PartitionFamily::S(int d, std::uint64_t kq, std::uint64_t l) {
    if (kq < 1 || l < 1 || d < 2) throw std::invalid_argument("S_kql: kq, l >= 1 and d >= 2 required");
    PartitionFamily f;
    f.kind = PartitionKind::S_kql;
    f.d = d;
    f.k = kq;
    f.q = 1;
    f.l = l;
    return f;
}

std::string PartitionFamily::name() const {
    std::ostringstream os;
    switch (kind) {
        case PartitionKind::T_q: os << "T_" << q; break;
        case PartitionKind::G_lq: os << "G_{" << l << "," << q << "}"; break;
        case PartitionKind::G_jlq: os << "G_{" << j << "," << l << "," << q << "}"; break;
        case PartitionKind::R_akq: os << "R_{a," << k << "," << q << "}"; break;
        case PartitionKind::S_kql: os << "S_{" << k << "," << l << "}"; break;
    }
    return os.str();
}

std::uint64_t PartitionFamily::atom_count() const {
    if (kind == PartitionKind::R_akq) return q;
    auto n = product_divisions(*this);
    std::uint64_t c = 1;
    for (auto v : n) c *= v;
    return c;
}

GridSpec PartitionFamily::natural_grid() const { return GridSpec(d, product_divisions(*this)); }

std::vector<Atom> atoms(const PartitionFamily& f) {
    std::vector<Atom> out;
    if (f.kind == PartitionKind::R_akq) {
        std::uint64_t kq = f.k * f.q;
        for (std::uint64_t jj = 0; jj < f.q; ++jj) {
            Atom at;
            for (std::uint64_t i = 0; i < f.k; ++i) {
                std::uint64_t idx = (f.a[i] * f.k + i + jj * f.k) % kq;
                Box b = full_box(f.d);
                b.lo[0] = frac(idx, kq);
                b.hi[0] = frac(idx + 1, kq);
                at.push_back(b);
            }
            out.push_back(at);
        }
        return out;
    }
    GridSpec g = f.natural_grid();
    std::uint64_t n = g.cells();
    out.reserve(n);
    for (std::uint64_t idx = 0; idx < n; ++idx) {
        auto c = g.coords(idx);
        Box b;
        for (int i = 0; i < f.d; ++i) {
            b.lo.push_back(frac(c[i], g.den[i]));
            b.hi.push_back(frac(c[i] + 1, g.den[i]));
        }
        out.push_back({b});
    }
    return out;
}

std::uint64_t locate(const std::vector<Rational>& x, const PartitionFamily& f) {
    if (static_cast<int>(x.size()) != f.d) throw std::invalid_argument("locate: dimension mismatch");
    for (const auto& v : x)
        if (v < 0 || v >= 1) throw std::invalid_argument("locate: point outside [0,1)^d");
    GridSpec g = f.natural_grid();
    std::vector<std::uint64_t> c(f.d);
    for (int i = 0; i < f.d; ++i)
        c[i] = to_u64((x[i] * Rational(BigInt(static_cast<unsigned long>(g.den[i])))).floor());
    if (f.kind != PartitionKind::R_akq) return g.index(c);
    std::uint64_t i = c[0] % f.k;
    std::uint64_t block = c[0] / f.k;  // = a(i) + j mod q
    return (block + f.q - f.a[i]) % f.q;
}

std::vector<std::uint64_t> phi_action(const PartitionFamily& f, const Rational& alpha) {
    GridSpec g = f.natural_grid();
    Rational shift = alpha * Rational(BigInt(static_cast<unsigned long>(g.den[0])));
    if (!shift.is_integer())
        throw std::invalid_argument("phi_action: rotation by " + alpha.str() + " does not permute the atoms of " +
                                    f.name());
    std::uint64_t s = to_u64(mod(shift.num(), BigInt(static_cast<unsigned long>(g.den[0]))));
    std::uint64_t n = f.atom_count();
    std::vector<std::uint64_t> perm(n);
    if (f.kind != PartitionKind::R_akq) {
        for (std::uint64_t idx = 0; idx < n; ++idx) {
            auto c = g.coords(idx);
            c[0] = (c[0] + s) % g.den[0];
            perm[idx] = g.index(c);
        }
        return perm;
    }
    // R atoms: x1 cell union must land on another atom's union.
    std::map<std::vector<std::uint64_t>, std::uint64_t> key;
    std::vector<std::vector<std::uint64_t>> cellsets(n);
    std::uint64_t kq = f.k * f.q;
    for (std::uint64_t jj = 0; jj < n; ++jj) {
        std::vector<std::uint64_t> cs;
        for (std::uint64_t i = 0; i < f.k; ++i) cs.push_back((f.a[i] * f.k + i + jj * f.k) % kq);
        std::sort(cs.begin(), cs.end());
        key[cs] = jj;
        cellsets[jj] = cs;
    }
    for (std::uint64_t jj = 0; jj < n; ++jj) {
        std::vector<std::uint64_t> cs = cellsets[jj];
        for (auto& v : cs) v = (v + s) % kq;
        std::sort(cs.begin(), cs.end());
        auto it = key.find(cs);
        if (it == key.end())
            throw std::invalid_argument("phi_action: rotation by " + alpha.str() + " does not permute the atoms of " +
                                        f.name());
        perm[jj] = it->second;
    }
    return perm;
}

bool refines(const PartitionFamily& fine, const PartitionFamily& coarse) {
    for (const auto& at : atoms(fine)) {
        std::uint64_t target = 0;
        bool first = true;
        for (const auto& b : at) {
            // Every corner-adjacent interior point of the box must land in the same atom;
            // boxes are products, so checking lo and the last point before hi suffices on
            // a grid that both families live on.
            std::vector<Rational> lo = b.lo;
            std::uint64_t a0 = locate(lo, coarse);
            std::vector<Rational> hi(b.hi.size());
            GridSpec cg = coarse.natural_grid();
            for (std::size_t i = 0; i < hi.size(); ++i) {
                Rational eps = Rational(BigInt(1), BigInt(static_cast<unsigned long>(cg.den[i])) * 4 *
                                                       BigInt(static_cast<unsigned long>(
                                                           fine.natural_grid().den[i])));
                hi[i] = b.hi[i] - eps;
            }
            std::uint64_t a1 = locate(hi, coarse);
            if (a0 != a1) return false;
            if (first) {
                target = a0;
                first = false;
            } else if (target != a0) {
                return false;
            }
        }
    }
    return true;
}

std::string atoms_csv(const PartitionFamily& f) {
    std::ostringstream os;
    os << "atom,box";
    for (int i = 1; i <= f.d; ++i) os << ",lo" << i << ",hi" << i;
    os << "\n";
    auto at = atoms(f);
    for (std::size_t a = 0; a < at.size(); ++a)
        for (std::size_t b = 0; b < at[a].size(); ++b) os << a << "," << b << "," << box_csv_row(at[a][b]) << "\n";
    return os.str();
}

}  // namespace abc
