#include "abc/towers.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace abc {

namespace {

Rational pow_r(const Rational& b, int e) {
    Rational r(1);
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

Rational W_of(const StageParams& s) { return Rational(2 * pow(s.l, s.d) * s.q * s.q); }

Rational delta_next(const StageParams& s) { return Rational(BigInt(1), BigInt(s.n + 1) * s.q_next()); }

// Cross-section boxes for coordinates 2..d in the tilde picture.
std::vector<Box> cross_section(const StageParams& s) {
    const int d = s.d;
    std::vector<Box> out;
    if (d < 2) return out;
    const Rational dl = s.delta;
    std::vector<std::uint64_t> counts(d - 1);
    counts[0] = to_u64(2 * s.l);
    for (int j = 1; j < d - 1; ++j) counts[j] = to_u64(s.l);
    std::vector<std::uint64_t> idx(d - 1, 0);
    for (;;) {
        Box b;
        for (int j = 0; j < d - 1; ++j) {
            Rational w = Rational(BigInt(1), BigInt(static_cast<unsigned long>(counts[j])));
            Rational i(static_cast<long>(idx[j]));
            b.lo.push_back((i + dl) * w);
            b.hi.push_back((i + 1 - dl) * w);
        }
        out.push_back(std::move(b));
        int j = 0;
        while (j < d - 1 && ++idx[j] == counts[j]) idx[j++] = 0;
        if (j == d - 1) break;
    }
    return out;
}

CellSet rotated_tilde_cells(const TowerBase& b, int d, const Rational& t, const GridSpec& g) {
    TowerBase r = b;
    r.x1 = b.x1.rotate(t);
    return to_cells(r.tilde(d), g);
}

const CellPermutation& need(const std::optional<CellPermutation>& p, const char* what) {
    if (!p) throw TowerError(std::string("towers need the exact ") + what + " of the stage");
    return *p;
}

// Every level gets a distinct owner; returns false on any overlap.
bool mark_disjoint(std::vector<std::int32_t>& owner, const std::vector<CellSet>& levels, std::int32_t first) {
    for (std::size_t i = 0; i < levels.size(); ++i)
        for (auto c : levels[i].cells) {
            if (owner[c] >= 0) return false;
            owner[c] = first + std::int32_t(i);
        }
    return true;
}

}  // namespace

// ---- intervals ----

void IntervalSet::normalize() {
    std::sort(iv_.begin(), iv_.end());
    std::vector<std::pair<Rational, Rational>> out;
    for (auto& p : iv_) {
        if (p.second <= p.first) continue;
        if (!out.empty() && p.first <= out.back().second) {
            if (p.second > out.back().second) out.back().second = p.second;
        } else {
            out.push_back(p);
        }
    }
    iv_ = std::move(out);
}

IntervalSet IntervalSet::from(const std::vector<std::pair<Rational, Rational>>& sw) {
    IntervalSet s;
    for (const auto& [a, w] : sw) {
        if (w.sign() < 0 || w > Rational(1)) throw ParameterError("interval width outside [0, 1]");
        if (w == Rational(1)) {
            s.iv_.push_back({Rational(0), Rational(1)});
            continue;
        }
        Rational lo = mod1(a), hi = lo + w;
        if (hi <= Rational(1)) {
            s.iv_.push_back({lo, hi});
        } else {
            s.iv_.push_back({lo, Rational(1)});
            s.iv_.push_back({Rational(0), hi - 1});
        }
    }
    s.normalize();
    return s;
}

IntervalSet IntervalSet::rotate(const Rational& t) const {
    std::vector<std::pair<Rational, Rational>> sw;
    for (const auto& [a, b] : iv_) sw.push_back({a + t, b - a});
    return from(sw);
}

Rational IntervalSet::measure() const {
    Rational m(0);
    for (const auto& [a, b] : iv_) m += b - a;
    return m;
}

IntervalSet IntervalSet::intersect(const IntervalSet& o) const {
    IntervalSet r;
    std::size_t i = 0, j = 0;
    while (i < iv_.size() && j < o.iv_.size()) {
        Rational lo = std::max(iv_[i].first, o.iv_[j].first);
        Rational hi = std::min(iv_[i].second, o.iv_[j].second);
        if (lo < hi) r.iv_.push_back({lo, hi});
        if (iv_[i].second < o.iv_[j].second) ++i; else ++j;
    }
    return r;
}

IntervalSet IntervalSet::unite(const IntervalSet& o) const {
    IntervalSet r = *this;
    r.iv_.insert(r.iv_.end(), o.iv_.begin(), o.iv_.end());
    r.normalize();
    return r;
}

Rational symmetric_difference_measure(const IntervalSet& a, const IntervalSet& b) {
    return a.measure() + b.measure() - 2 * a.intersect(b).measure();
}

// ---- bases ----

std::string to_string(TowerLabel l) {
    switch (l) {
        case TowerLabel::HTower: return "h";
        case TowerLabel::HPlusOneTower: return "h+1";
        case TowerLabel::Cyclic: return "cyclic";
    }
    return "?";
}

BoxUnion TowerBase::tilde(int d) const {
    BoxUnion out;
    for (const auto& [a, b] : x1.intervals()) {
        if (d == 1) {
            out.push_back(Box{{a}, {b}});
            continue;
        }
        for (const auto& c : cross) {
            Box bx;
            bx.lo.push_back(a);
            bx.hi.push_back(b);
            bx.lo.insert(bx.lo.end(), c.lo.begin(), c.lo.end());
            bx.hi.insert(bx.hi.end(), c.hi.begin(), c.hi.end());
            out.push_back(std::move(bx));
        }
    }
    return out;
}

TowerBase tilde_base(const StageParams& s, TowerLabel label) {
    TowerBase b;
    b.stage = s.n;
    b.label = label;
    b.cross = cross_section(s);
    b.cross_measure = pow_r(1 - 2 * s.delta, s.d - 1);
    const Rational q(s.q), qn(s.q_next()), r(s.r), p(s.p);
    b.offset = s.delta / W_of(s);
    std::vector<std::pair<Rational, Rational>> sw;
    if (label == TowerLabel::Cyclic) {
        b.stripe_width = Rational(1) / qn;
        sw.push_back({b.offset, b.stripe_width});
    } else {
        b.stripe_width = q / qn;
        const long nq = to_i64(s.q);
        for (long i1 = 0; i1 + 1 < nq; ++i1) {
            Rational i(i1);
            Rational start = label == TowerLabel::HTower
                                 ? i * r / q + i / (2 * q * q) + b.offset
                                 : i * (r + p) / q + Rational(1) / (2 * q) + i / (2 * q * q) + b.offset;
            sw.push_back({start, b.stripe_width});
        }
    }
    b.stripes = sw.size();
    b.x1 = IntervalSet::from(sw);
    return b;
}

// ---- exact towers ----

namespace {

Tower build_tower(const StageMap& T, TowerLabel label, std::uint64_t height, bool& conj_ok) {
    const CellPermutation& Tp = need(T.T, "map");
    const CellPermutation& Hinv = need(T.Hinv, "conjugacy");
    Tower tw;
    tw.base = tilde_base(T.params, label);
    tw.height = height;
    CellSet tilde_cells;
    try {
        tilde_cells = to_cells(tw.base.tilde(T.params.d), T.grid);
    } catch (const std::exception& e) {
        throw TowerError(std::string("tower base is off the stage grid (build with tower_grid): ") + e.what());
    }
    tw.base.pulled = Hinv.apply(tilde_cells);
    tw.levels.reserve(height);
    tw.levels.push_back(*tw.base.pulled);
    const Rational an = T.params.alpha_next();
    // level i + 1 is T applied to level i; compare against H^{-1} of the rotated tilde base
    for (std::uint64_t i = 1; i < height; ++i) {
        tw.levels.push_back(Tp.apply(tw.levels.back()));
        if (conj_ok) {
            CellSet viaH = Hinv.apply(rotated_tilde_cells(tw.base, T.params.d, an * Rational(long(i)), T.grid));
            if (viaH.cells != tw.levels.back().cells) conj_ok = false;
        }
    }
    return tw;
}

}  // namespace

TowerPair build_hh1_towers(const StageMap& T) {
    const StageParams& s = T.params;
    const std::uint64_t m = to_u64(s.q_next() / (2 * s.q * s.q));
    TowerPair P;
    P.conjugacy_ok = true;
    P.B1 = build_tower(T, TowerLabel::HTower, m, P.conjugacy_ok);
    P.B2 = build_tower(T, TowerLabel::HPlusOneTower, m + 1, P.conjugacy_ok);

    {
        std::vector<std::int32_t> owner(T.grid.cells(), -1);
        P.disjoint1 = mark_disjoint(owner, P.B1.levels, 0);
        if (!P.disjoint1) throw TowerError("h tower levels collide at stage " + std::to_string(s.n));
        for (const auto& c : P.B2.levels)
            for (auto x : c.cells)
                if (owner[x] >= 0) throw TowerError("h and h+1 towers collide at stage " + std::to_string(s.n));
        std::fill(owner.begin(), owner.end(), -1);
        P.disjoint2 = mark_disjoint(owner, P.B2.levels, 0);
        std::vector<std::uint8_t> hit(T.grid.cells(), 0);
        std::uint64_t total = 0, uni = 0;
        for (const auto* tw : {&P.B1, &P.B2})
            for (const auto& c : tw->levels)
                for (auto x : c.cells) {
                    ++total;
                    if (!hit[x]) { hit[x] = 1; ++uni; }
                }
        P.overlap = Rational(long(total - uni)) * T.grid.cell_volume();
        P.disjoint = total == uni;
    }

    P.mu_B1 = Rational(0);
    for (const auto& c : P.B1.levels) P.mu_B1 += c.measure();
    P.mu_B2 = Rational(0);
    for (const auto& c : P.B2.levels) P.mu_B2 += c.measure();
    const Rational q(s.q), qn(s.q_next());
    const Rational cm = pow_r(1 - 2 * s.delta, s.d - 1);
    P.mu_B1_formula = (1 - Rational(1) / q) * cm / 2;
    P.mu_B2_formula = (1 + 2 * q * q / qn) * P.mu_B1_formula;
    P.substantial_r = Rational(2, 5) * cm;
    P.substantial1 = P.mu_B1 > P.substantial_r;
    P.substantial2 = P.mu_B2 > P.substantial_r;
    return P;
}

Tower build_cyclic_tower(const StageMap& T) {
    bool ok = false;  // the conjugacy comparison costs a to_cells per level; skipped here
    Tower C = build_tower(T, TowerLabel::Cyclic, to_u64(T.params.q_next()), ok);
    std::vector<std::int32_t> owner(T.grid.cells(), -1);
    if (!mark_disjoint(owner, C.levels, 0)) throw TowerError("cyclic tower levels overlap");
    return C;
}

CyclicReport cyclic_report(const StageMap& T, const Tower& C) {
    CyclicReport r;
    r.levels = C.levels.size();
    std::vector<std::int32_t> owner(T.grid.cells(), -1);
    r.disjoint = mark_disjoint(owner, C.levels, 0);
    r.returns = need(T.T, "map").apply(C.levels.back()).cells == C.levels.front().cells;
    r.level_measure = C.levels.front().measure();
    r.level_bound = pow_r(1 - 2 * T.params.delta, T.params.d - 1) / Rational(T.params.q_next());
    return r;
}

// ---- weak distance ----

Rational weak_distance(const std::vector<CellSet>& xi, const CellPermutation& T, const std::vector<std::size_t>& sigma) {
    if (sigma.size() != xi.size()) throw ParameterError("sigma and partition sizes differ");
    std::uint64_t cnt = 0;
    for (std::size_t i = 0; i < xi.size(); ++i) {
        if (sigma[i] >= xi.size()) throw ParameterError("sigma index out of range");
        cnt += symmetric_difference_count(T.apply(xi[i]), xi[sigma[i]]);
    }
    return Rational(long(cnt)) * T.grid().cell_volume();
}

SampledDistance weak_distance_sampled(const std::vector<std::function<bool(const VecD&)>>& xi,
                                      const std::function<VecD(const VecD&)>& Tinv,
                                      const std::vector<std::size_t>& sigma, int d, std::uint64_t samples,
                                      std::uint64_t seed) {
    if (sigma.size() != xi.size()) throw ParameterError("sigma and partition sizes differ");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    double sum = 0, sum2 = 0;
    for (std::uint64_t s = 0; s < samples; ++s) {
        VecD x(d);
        for (int i = 0; i < d; ++i) x[i] = U(rng);
        VecD y = Tinv(x);
        // x in T(c_i) iff T^{-1} x in c_i
        double v = 0;
        for (std::size_t i = 0; i < xi.size(); ++i)
            if (xi[i](y) != xi[sigma[i]](x)) v += 1;
        sum += v;
        sum2 += v * v;
    }
    SampledDistance r;
    r.samples = samples;
    double n = double(samples);
    r.value = sum / n;
    double var = std::max(0.0, sum2 / n - r.value * r.value);
    r.stderr_ = std::sqrt(var / n);
    return r;
}

// ---- accounting ----

namespace {

void fill_closed_forms(const StageParams& s, TowerAccounting& a) {
    const Rational q(s.q), qn(s.q_next());
    const Rational cm = pow_r(1 - 2 * s.delta, s.d - 1);
    a.base_formula = (1 - Rational(1) / q) * cm * q * q / qn;
    a.closed_form = (6 * q - 4) * cm / qn;
    a.paper_bound = 3 * q / qn;
}

}  // namespace

TowerAccounting tower_accounting(const StageMap& T, const TowerPair& P) {
    const CellPermutation& Tp = need(T.T, "map");
    TowerAccounting a;
    fill_closed_forms(T.params, a);
    a.base_measure = P.B1.levels.front().measure();
    // xi_n: levels of both towers; sigma_n is T_n off the tops and sends tops to the bases
    std::vector<CellSet> xi;
    std::vector<std::size_t> sigma;
    const std::size_t h1 = P.B1.levels.size(), h2 = P.B2.levels.size();
    for (std::size_t i = 0; i < h1; ++i) {
        xi.push_back(P.B1.levels[i]);
        sigma.push_back(i + 1 < h1 ? i + 1 : 0);
    }
    for (std::size_t i = 0; i < h2; ++i) {
        xi.push_back(P.B2.levels[i]);
        sigma.push_back(h1 + (i + 1 < h2 ? i + 1 : 0));
    }
    a.total = weak_distance(xi, Tp, sigma);
    const Rational v = T.grid.cell_volume();
    a.top1 = Rational(long(symmetric_difference_count(Tp.apply(P.B1.levels.back()), P.B1.levels.front()))) * v;
    a.top2 = Rational(long(symmetric_difference_count(Tp.apply(P.B2.levels.back()), P.B2.levels.front()))) * v;
    return a;
}

TowerAccounting tower_accounting_intervals(const StageParams& s) {
    TowerAccounting a;
    fill_closed_forms(s, a);
    const Rational an = s.alpha_next();
    const BigInt m = s.q_next() / (2 * s.q * s.q);
    TowerBase b1 = tilde_base(s, TowerLabel::HTower), b2 = tilde_base(s, TowerLabel::HPlusOneTower);
    a.base_measure = b1.measure();
    // levels are rotations of the base; only the tops can disagree with sigma_n
    a.top1 = symmetric_difference_measure(b1.x1.rotate(an * Rational(m)), b1.x1) * b1.cross_measure;
    a.top2 = symmetric_difference_measure(b2.x1.rotate(an * Rational(BigInt(m + 1))), b2.x1) * b2.cross_measure;
    a.total = a.top1 + a.top2;
    return a;
}

SpeedReport speed_report(const StageParams& s, std::uint64_t max_stripes) {
    SpeedReport r;
    r.n = s.n;
    r.d = s.d;
    TowerAccounting a;
    if (s.q - 1 <= BigInt(static_cast<unsigned long>(max_stripes))) {
        a = tower_accounting_intervals(s);
    } else {
        fill_closed_forms(s, a);
        a.total = a.closed_form;
        r.finite_exact = false;
    }
    const Rational q(s.q), qn(s.q_next()), dn = delta_next(s);
    r.finite = a.total;
    r.paper_bound = a.paper_bound;
    r.tail = 40 * Rational(s.d) * dn;
    r.m = Rational(s.m);
    r.ratio_finite = (r.finite + r.tail) * r.m;
    r.ratio_bound = (r.paper_bound + r.tail) * r.m;
    r.ratio_closed = Rational(3) / (2 * q) + Rational(20 * s.d) / (Rational(s.n + 1) * q * q);
    r.cyclic_finite = Rational(0);  // T_n^{q_{n+1}} = id, so the cyclic tower closes up
    r.cyclic_tail = 20 * Rational(s.d) * dn;
    r.cyclic_ratio = r.cyclic_tail * qn;
    r.cyclic_closed = Rational(20 * s.d) / Rational(s.n + 1);
    return r;
}

bool speed_monotone(const std::vector<SpeedReport>& r) {
    for (std::size_t i = 1; i < r.size(); ++i)
        if (!(r[i].ratio_bound < r[i - 1].ratio_bound) || !(r[i].cyclic_ratio < r[i - 1].cyclic_ratio)) return false;
    return true;
}

RefinementStats partition_refinement_stats(const StageParams& s) {
    RefinementStats st;
    const Rational q(s.q), qn(s.q_next()), one_m(1 - 2 * s.delta);
    const BigInt m = s.q_next() / (2 * s.q * s.q);
    const Rational cm = pow_r(one_m, s.d - 1);
    const Rational drift_max = Rational(1) / (2 * q * q);
    // j is good when the left edge, shifted by j / q_{n+1}, stays in the delta
    // inset of its x1 block of width 1/W.  The block offsets j W / q_{n+1} mod 1
    // are t / P with P = q_{n+1} / gcd(W, q_{n+1}), so goodness is periodic in j
    // with period P and delta + t/P is inside iff t/P <= 1 - 2 delta.
    const BigInt Wi = 2 * pow(s.l, s.d) * s.q * s.q;
    const BigInt g = gcd(Wi, s.q_next()), P = s.q_next() / g, step = Wi / g;
    if (P > BigInt(10000000)) throw BudgetError("refinement period " + P.get_str() + " too long");
    const BigInt tmax = (one_m * Rational(P)).floor();
    auto good_below = [&](const BigInt& N) {
        const std::uint64_t p64 = to_u64(P);
        BigInt per = 0;
        std::vector<std::uint8_t> ok(p64);
        for (std::uint64_t j = 0; j < p64; ++j) {
            BigInt t = mod(step * BigInt(static_cast<unsigned long>(j)), P);
            ok[j] = t <= tmax;
            per += ok[j];
        }
        BigInt full = N / P, rem = N - full * P, cnt = full * per;
        for (std::uint64_t j = 0; j < to_u64(rem); ++j) cnt += ok[j];
        return cnt;
    };
    // (h, h+1) towers: by the 1/q equivariance level i sits i / q_{n+1} off
    // its base stripe up to a multiple of 1/q, and i < m_n keeps the drift
    // below 1/(2 q_n^2)
    if (!(Rational(m - 1) / qn <= drift_max)) throw ParameterError("drift bound fails");
    st.xi_levels = 2 * m;
    st.xi_good = 2 * good_below(m);
    const Rational c0 = (1 - Rational(1) / q) * cm * q * q / qn;
    st.xi_bound = 2 * one_m * Rational(m);
    st.xi_covered = Rational(st.xi_good) * c0;
    st.xi_target = (1 - Rational(1) / q) * pow_r(one_m, s.d);
    st.gamma_levels = s.q_next();
    st.gamma_good = good_below(s.q_next());
    st.gamma_bound = one_m * qn;
    st.gamma_covered = Rational(st.gamma_good) * cm / qn;
    st.gamma_target = pow_r(one_m, s.d);
    return st;
}

std::string tower_csv(const TowerBase& b, int d) {
    std::ostringstream os;
    os << "label,stage";
    for (int i = 0; i < d; ++i) os << ",lo" << i + 1 << ",hi" << i + 1;
    os << "\n";
    for (const auto& bx : b.tilde(d)) os << to_string(b.label) << "," << b.stage << "," << box_csv_row(bx) << "\n";
    return os.str();
}

}  // namespace abc
