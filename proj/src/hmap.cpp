#include "abc/hmap.hpp"

#include <functional>

namespace abc {

namespace {

BigInt big(std::uint64_t v) { return BigInt(static_cast<unsigned long>(v)); }

std::uint64_t ipow(std::uint64_t b, int e) {
    unsigned __int128 r = 1;
    for (int i = 0; i < e; ++i) {
        r *= b;
        if (r > (static_cast<unsigned __int128>(1) << 40)) throw BudgetError("A-block grid too large");
    }
    return static_cast<std::uint64_t>(r);
}

}  // namespace

HLayout make_h_layout(std::uint64_t l, std::uint64_t p, std::uint64_t q, std::uint64_t r, int d) {
    if (d < 2) throw std::invalid_argument("h: d >= 2 required");
    if (q < 1 || l < 1) throw std::invalid_argument("h: l, q >= 1 required");
    if (l % (2 * q) != 0)
        throw std::invalid_argument("h: 2q must divide l (q=" + std::to_string(q) + ", l=" + std::to_string(l) + ")");
    if (r >= q) throw std::invalid_argument("h: r must lie in [0, q)");
    HLayout L;
    L.l = l;
    L.p = p;
    L.q = q;
    L.r = r;
    L.d = d;
    L.m = l / (2 * q);
    L.W = 2 * ipow(l, d) * q * q;
    L.uf = 1;
    L.ue = l;
    std::uint64_t u = l * 2 * q;
    L.ut.assign(d - 2, 0);
    for (int k = d - 3; k >= 0; --k) {
        L.ut[k] = u;
        u *= l;
    }
    L.uc = u;
    L.ub = u * L.m;
    L.ua = L.ub * 2 * q;
    return L;
}

std::uint64_t HLayout::x1_index(const ABlockIndex& A) const {
    std::uint64_t x = A.a * ua + A.b * ub + A.c * uc + A.e * ue + A.f * uf;
    for (int k = 0; k < d - 2; ++k) x += A.t[k] * ut[k];
    return x;
}

ABlockIndex HLayout::decode(std::uint64_t x, std::uint64_t row) const {
    ABlockIndex A;
    A.a = x / ua;
    A.b = (x / ub) % (2 * q);
    A.c = (x / uc) % m;
    A.t.resize(d - 2);
    for (int k = 0; k < d - 2; ++k) A.t[k] = (x / ut[k]) % l;
    A.e = (x / ue) % (2 * q);
    A.f = x % l;
    A.j = row;
    return A;
}

ABlockIndex HLayout::image(const ABlockIndex& A) const {
    ABlockIndex B = A;
    std::uint64_t rr = A.e < q ? r : (r + p) % q;
    B.a = (A.a + A.e * rr) % q;
    B.b = A.e;
    B.e = A.b;
    B.f = A.j;
    B.j = A.f;
    return B;
}

Box HLayout::box(const ABlockIndex& A) const {
    Box b = full_box(d);
    std::uint64_t x = x1_index(A);
    b.lo[0] = Rational(big(x), big(W));
    b.hi[0] = Rational(big(x + 1), big(W));
    b.lo[1] = Rational(big(A.j), big(l));
    b.hi[1] = Rational(big(A.j + 1), big(l));
    return b;
}

GridSpec HLayout::grid() const {
    std::vector<std::uint64_t> den(d, 1);
    den[0] = W;
    den[1] = l;
    return GridSpec(d, den);
}

CellPermutation apply_h_formula(const HLayout& L, const GridSpec& fine) {
    if (fine.d != L.d || fine.den[0] % L.W != 0 || fine.den[1] % L.l != 0)
        throw std::invalid_argument("grid does not refine the A-block grid");
    std::uint64_t K1 = fine.den[0] / L.W, K2 = fine.den[1] / L.l;
    std::uint64_t n0 = fine.den[0], n1 = fine.den[1], plane = n0 * n1;
    // The map acts on (x1, x2) only; tabulate it on one plane.
    std::vector<std::uint64_t> img_x1(L.W * L.l), img_row(L.W * L.l);
    for (std::uint64_t row = 0; row < L.l; ++row)
        for (std::uint64_t x = 0; x < L.W; ++x) {
            ABlockIndex B = L.image(L.decode(x, row));
            img_x1[row * L.W + x] = L.x1_index(B);
            img_row[row * L.W + x] = B.j;
        }
    std::uint64_t n = fine.cells();
    std::vector<std::uint32_t> img(n);
    for (std::uint64_t c = 0; c < n; ++c) {
        std::uint64_t i0 = c % n0, i1 = (c / n0) % n1, rest = c / plane;
        std::uint64_t blk = (i1 / K2) * L.W + i0 / K1;
        std::uint64_t ni0 = img_x1[blk] * K1 + i0 % K1;
        std::uint64_t ni1 = img_row[blk] * K2 + i1 % K2;
        img[c] = static_cast<std::uint32_t>(rest * plane + ni1 * n0 + ni0);
    }
    return CellPermutation(fine, std::move(img));
}

namespace {

struct WordBuilder {
    const HLayout& L;
    BlockSlideMap m;

    explicit WordBuilder(const HLayout& layout) : L(layout), m{layout.d, {}} {}

    StepFunction xdigit(std::uint64_t unit, std::uint64_t radix, const std::function<Rational(std::uint64_t)>& fn) {
        std::vector<Rational> v(L.W);
        for (std::uint64_t i = 0; i < L.W; ++i) v[i] = fn((i / unit) % radix);
        return StepFunction(std::move(v)).coarsen();
    }
    StepFunction ytop(std::uint64_t R, const std::function<Rational(std::uint64_t)>& fn) {
        std::vector<Rational> v(L.l);
        for (std::uint64_t j = 0; j < L.l; ++j) v[j] = fn(j * R / L.l);
        return StepFunction(std::move(v)).coarsen();
    }
    Rational xunits(std::int64_t k, std::uint64_t unit) { return Rational(BigInt(k) * big(unit), big(L.W)); }

    // Exchange of an x1 digit D (given unit, radix R) with the top radix-R
    // digit J of x2: (D, J) -> (-J, D), without net carry.
    BlockSlideMap transfer(std::uint64_t unit, std::uint64_t R) {
        BlockSlideMap t{L.d, {}};
        t.slides.push_back(Slide{0, 1, ytop(R, [&](std::uint64_t J) {
                                     return xunits(static_cast<std::int64_t>((R - J) % R), unit);
                                 })});
        t.slides.push_back(Slide{1, 0, xdigit(unit, R, [&](std::uint64_t D) { return Rational(big(D), big(R)); })});
        t.slides.push_back(
            Slide{0, 1, ytop(R, [&](std::uint64_t J) { return xunits(-static_cast<std::int64_t>(J), unit); })});
        return t;
    }

    void push(const BlockSlideMap& w) { m = m.then(w); }
};

}  // namespace

std::optional<BlockSlideMap> h_slide_word(const HLayout& L, std::string* why) {
    if (L.m != 1 && L.m != 2) {
        if (why) *why = "no slide word for l/(2q) = " + std::to_string(L.m) + " (supported: 1, 2)";
        return std::nullopt;
    }
    WordBuilder w(L);
    const std::uint64_t q = L.q, l = L.l;

    // Leading digit: a += e * r(e) mod q, through the full row index j.
    auto shift = [&](std::uint64_t e) { return (e * (e < q ? L.r : (L.r + L.p) % q)) % q; };
    BlockSlideMap lead{L.d, {}};
    lead.slides.push_back(
        Slide{0, 1, w.ytop(l, [&](std::uint64_t j) { return Rational(-BigInt(static_cast<long>(j)), big(q)); })});
    lead.slides.push_back(
        Slide{1, 0, w.xdigit(L.ue, 2 * q, [&](std::uint64_t e) { return Rational(big(shift(e)), big(l)); })});
    lead.slides.push_back(Slide{0, 1, w.ytop(l, [&](std::uint64_t j) { return Rational(big(j), big(q)); })});
    lead.slides.push_back(
        Slide{1, 0, w.xdigit(L.ue, 2 * q, [&](std::uint64_t e) { return -Rational(big(shift(e)), big(l)); })});
    w.push(lead);

    // (f, j) -> (-j, f) on the full radix-l digit.
    w.push(w.transfer(L.uf, l));

    // Radix-2q registers b, e, fh and the x2 top digit J:
    // (b, e, fh, J) -> (e, b, -fh, J).
    const std::uint64_t ufh = L.m;
    BlockSlideMap Tb = w.transfer(L.ub, 2 * q), Te = w.transfer(L.ue, 2 * q), Tf = w.transfer(ufh, 2 * q);
    w.push(Tb);
    w.push(Te.inverse());
    w.push(Tb);
    w.push(Tf);
    w.push(Tf);

    if (L.m == 2) {
        // f = 2 fh + flo; negating f also needs fh -= flo.
        BlockSlideMap Tlo = w.transfer(L.uf, 2);
        w.push(Tlo);
        auto wfun = [&](std::uint64_t J) { return J >= q ? 2 * q - 1 : 0; };
        BlockSlideMap local = Tf;
        local.slides.push_back(Slide{1, 0, w.xdigit(ufh, 2 * q, [&](std::uint64_t x) {
                                         return Rational(big(wfun((2 * q - x) % (2 * q))), big(2 * q));
                                     })});
        local = local.then(Tf.inverse());
        w.push(local);
        w.push(Tlo);
    }
    if (why) *why = "explicit slide word";
    return w.m.simplified();
}

HMap build_h_lpqr(std::uint64_t l, std::uint64_t p, std::uint64_t q, std::uint64_t r, int d) {
    HMap h;
    h.layout = make_h_layout(l, p, q, r, d);
    h.perm = apply_h_formula(h.layout, h.layout.grid());
    h.word = h_slide_word(h.layout, &h.word_note);
    return h;
}

CombiReport check_combi(const HMap& h, const Rational& shift1, const Rational& shift2) {
    const HLayout& L = h.layout;
    CombiReport rep;
    rep.bijection = h.perm.is_bijection();
    rep.commutes = commutes_with_phi(h.perm, L.q);
    const std::uint64_t q = L.q;
    const std::uint64_t W = L.W;

    // Image x1 index and row of a block, straight from the permutation.
    auto img = [&](const ABlockIndex& A) {
        std::uint32_t c = h.perm(static_cast<std::uint32_t>(A.j * W + L.x1_index(A)));
        return std::pair<std::uint64_t, std::uint64_t>{c % W, (c / W) % L.l};
    };
    auto cells = [&](const Rational& s) {
        Rational v = s * Rational(big(W));
        if (!v.is_integer()) throw std::invalid_argument("shift is not a multiple of the A-block width");
        return to_u64(mod(v.num(), big(W)));
    };
    std::uint64_t s1 = cells(shift1), s2 = cells(shift2);

    for (std::uint64_t x = 0; x < W; ++x) {
        for (std::uint64_t row = 0; row < L.l; ++row) {
            ABlockIndex A = L.decode(x, row);
            // Union over f: fix f = 0 and walk f.
            if (A.f == 0) {
                ++rep.columns;
                std::vector<bool> rows(L.l, false);
                std::uint64_t col = img(A).first;
                bool ok = true;
                for (std::uint64_t f = 0; f < L.l; ++f) {
                    ABlockIndex B = A;
                    B.f = f;
                    auto [ix, ir] = img(B);
                    if (ix != col || rows[ir]) ok = false;
                    if (ir < L.l) rows[ir] = true;
                }
                if (!ok) ++rep.column_failures;
            }
            if (A.e + 1 >= 2 * q) continue;
            ABlockIndex N = A;
            N.e = A.e + 1;
            auto [ix, ir] = img(A);
            auto [nx, nr] = img(N);
            bool low = A.e < q;
            std::uint64_t s = low ? s1 : s2;
            bool holds = (ix + s) % W == nx && ir == nr;
            bool in_range = low ? (A.b < q - 1 && A.e < q - 1) : (A.b >= q && A.b + 1 < 2 * q && A.e + 1 < 2 * q);
            if (!in_range) {
                if (low) ++rep.shift1_skipped; else ++rep.shift2_skipped;
                ++rep.boundary_checked;
                if (holds) ++rep.boundary_holds;
                continue;
            }
            if (low) {
                ++rep.shift1_checked;
                if (!holds) {
                    if (!rep.shift1_failures && !rep.shift2_failures) {
                        rep.first_failure_x1 = x;
                        rep.first_failure_row = row;
                    }
                    ++rep.shift1_failures;
                }
            } else {
                ++rep.shift2_checked;
                if (!holds) {
                    if (!rep.shift1_failures && !rep.shift2_failures) {
                        rep.first_failure_x1 = x;
                        rep.first_failure_row = row;
                    }
                    ++rep.shift2_failures;
                }
            }
        }
    }
    return rep;
}

CombiReport check_combi(const HMap& h) {
    const HLayout& L = h.layout;
    Rational half = Rational(BigInt(1), 2 * big(L.q) * big(L.q));
    return check_combi(h, Rational(big(L.r), big(L.q)) + half, Rational(big((L.r + L.p) % L.q), big(L.q)) + half);
}

ConjugacyReport verify_conjugacy_identity(const StageParams& s, std::uint64_t r_override) {
    ConjugacyReport rep;
    Rational a = s.alpha_next();
    rep.shift1 = mod1(Rational(s.m) * a);
    rep.shift2 = mod1(Rational(s.m + 1) * a - Rational(BigInt(1), s.q_next()));
    Rational half = Rational(BigInt(1), 2 * s.q * s.q);
    rep.shifts_match = rep.shift1 == mod1(Rational(s.r, s.q) + half) &&
                       rep.shift2 == mod1(Rational(s.r + s.p, s.q) + half);
    HMap h = build_h_lpqr(to_u64(s.l), to_u64(mod(s.p, s.q)), to_u64(s.q), r_override, s.d);
    rep.combi = check_combi(h, rep.shift1, rep.shift2);
    return rep;
}

ConjugacyReport verify_conjugacy_identity(const StageParams& s) { return verify_conjugacy_identity(s, to_u64(s.r)); }

}  // namespace abc
