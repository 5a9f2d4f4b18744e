#include "abc/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace abc {

namespace {

const double kPi = 3.14159265358979323846;

void same_grid(const Observable& f, const Observable& g) {
    if (!(f.grid == g.grid) || f.values.size() != g.values.size())
        throw SpectralError("observables live on different grids");
}

std::uint32_t cell_of(const GridSpec& g, const VecD& x) {
    std::vector<std::uint64_t> c(g.d);
    for (int i = 0; i < g.d; ++i) {
        double v = x[i] - std::floor(x[i]);
        auto k = std::uint64_t(v * double(g.den[i]));
        c[i] = std::min<std::uint64_t>(k, g.den[i] - 1);
    }
    return std::uint32_t(g.index(c));
}

}  // namespace

Observable Observable::zeros(const GridSpec& g) {
    Observable o;
    o.grid = g;
    o.values.assign(g.cells(), 0.0);
    return o;
}

Observable Observable::indicator(const CellSet& s) {
    Observable o = zeros(s.grid);
    for (auto c : s.cells) o.values[c] = 1.0;
    return o;
}

Observable Observable::random(const GridSpec& g, std::uint64_t seed, int range) {
    Observable o = zeros(g);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> U(-range, range);
    for (auto& v : o.values) v = U(rng);
    return o;
}

double Observable::mean() const {
    long double s = 0;
    for (double v : values) s += v;
    return double(s / (long double)(values.size()));
}

double Observable::norm() const { return std::sqrt(inner(*this, *this)); }

Observable Observable::centered() const {
    Observable o = *this;
    const double m = mean();
    for (auto& v : o.values) v -= m;
    o.mean_zero = true;
    return o;
}

Observable& Observable::operator+=(const Observable& o) {
    same_grid(*this, o);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    mean_zero = mean_zero && o.mean_zero;
    approximate = approximate || o.approximate;
    return *this;
}

Observable Observable::operator*(double a) const {
    Observable o = *this;
    for (auto& v : o.values) v *= a;
    return o;
}

double inner(const Observable& f, const Observable& g) {
    same_grid(f, g);
    long double s = 0;
    for (std::size_t i = 0; i < f.values.size(); ++i) s += (long double)f.values[i] * g.values[i];
    return double(s / (long double)(f.values.size()));
}

double inner_canonical(const Observable& f, const Observable& g) {
    same_grid(f, g);
    std::vector<double> p(f.values.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = f.values[i] * g.values[i];
    std::sort(p.begin(), p.end());
    long double s = 0;
    for (double v : p) s += v;
    return double(s / (long double)(p.size()));
}

Observable koopman_apply(const CellPermutation& T, const Observable& f, std::int64_t k) {
    if (!(T.grid() == f.grid)) throw SpectralError("observable and map grids differ");
    CellPermutation P = k >= 0 ? T.power(std::uint64_t(k)) : T.inverse().power(std::uint64_t(-k));
    Observable o = f;
    for (std::uint32_t c = 0; c < P.size(); ++c) o.values[c] = f.values[P(c)];
    return o;
}

Observable koopman_apply(const StageMap& T, const Observable& f, std::int64_t k) {
    if (T.T) return koopman_apply(*T.T, f, k);
    // analytic transport: f o T^k sampled at cell centres
    Observable o = f;
    o.approximate = true;
    const GridSpec& g = f.grid;
    for (std::uint32_t c = 0; c < g.cells(); ++c) {
        auto co = g.coords(c);
        VecD x(g.d);
        for (int i = 0; i < g.d; ++i) x[i] = (double(co[i]) + 0.5) / double(g.den[i]);
        for (std::int64_t j = 0; j < std::llabs(k); ++j) x = k > 0 ? T.T_an.apply(x) : T.T_an.apply_inverse(x);
        o.values[c] = f.values[cell_of(g, x)];
    }
    return o;
}

KoopmanCorrelations correlations(const CellPermutation& T, const Observable& f, const Observable& g,
                                 std::size_t K) {
    if (!(T.grid() == f.grid)) throw SpectralError("observable and map grids differ");
    same_grid(f, g);
    // spectral statements live on L2_0
    for (const Observable* o : {&f, &g}) {
        double mx = 0;
        for (double v : o->values) mx = std::max(mx, std::abs(v));
        if (std::abs(o->mean()) > 1e-12 * std::max(mx, 1.0))
            throw SpectralError("observable is not mean-zero; center it first");
    }
    KoopmanCorrelations out;
    out.norm_f = f.norm();
    out.norm_g = g.norm();
    Observable u = f;
    const double cs = out.norm_f * out.norm_g;
    for (std::size_t k = 0; k < K; ++k) {
        double v = inner(u, g);
        out.c.push_back(v);
        if (std::abs(v) > cs * (1 + 1e-12) + 1e-300) out.cauchy_schwarz = false;
        Observable next = u;
        for (std::uint32_t c = 0; c < T.size(); ++c) next.values[c] = u.values[T(c)];
        u = std::move(next);
    }
    return out;
}

WeakLimitFit fit_weak_limit(const std::vector<WeakLimitPair>& pairs) {
    WeakLimitFit fit;
    fit.pairs = pairs.size();
    // a - c = r (b - c), least squares in r
    double num = 0, den = 0, ac2 = 0;
    for (const auto& p : pairs) {
        num += (p.a - p.c) * (p.b - p.c);
        den += (p.b - p.c) * (p.b - p.c);
        ac2 += (p.a - p.c) * (p.a - p.c);
    }
    double scale = 0;
    for (const auto& p : pairs) scale = std::max({scale, std::abs(p.a), std::abs(p.b), std::abs(p.c)});
    if (pairs.empty() || den <= 1e-24 * std::max(scale * scale, 1e-300)) {
        fit.ill_conditioned = true;
        fit.warning = "degenerate pairs: <Uf,g> and <f,g> coincide";
        fit.r = 0;
    } else {
        fit.r = num / den;
    }
    double res = 0;
    for (const auto& p : pairs) {
        double e = p.a - fit.r * p.b - (1 - fit.r) * p.c;
        res += e * e;
    }
    fit.residual = std::sqrt(res);
    fit.relative_residual = ac2 > 0 ? fit.residual / std::sqrt(ac2) : 0.0;
    return fit;
}

WeakLimitFit fit_weak_limit(const CellPermutation& T, std::uint64_t h,
                            const std::vector<std::pair<Observable, Observable>>& pairs) {
    std::vector<WeakLimitPair> v;
    // U^{h+1} f and U f once per distinct f would be cheaper; pairs are few
    for (const auto& [f, g] : pairs) {
        Observable u1 = koopman_apply(T, f, 1);
        Observable uh = koopman_apply(T, f, std::int64_t(h + 1));
        v.push_back({inner(uh, g), inner(u1, g), inner(f, g)});
    }
    return fit_weak_limit(v);
}

std::vector<WeakLimitPair> tilde_level_pairs(const StageParams& s, std::uint64_t h,
                                             const std::vector<std::pair<std::size_t, std::size_t>>& ij) {
    const TowerBase b1 = tilde_base(s, TowerLabel::HTower), b2 = tilde_base(s, TowerLabel::HPlusOneTower);
    const IntervalSet base = b1.x1.unite(b2.x1);
    const Rational an = s.alpha_next(), cm = b1.cross_measure;
    const std::size_t m = to_u64(s.m);
    auto level = [&](std::size_t i) { return base.rotate(an * Rational(long(i))); };
    // the mean-zero shift cancels in a - c and b - c but is kept for fidelity
    auto ip = [&](std::size_t i, std::size_t j, std::uint64_t k) {
        const IntervalSet Li = level(i), Lj = level(j);
        Rational v = Li.rotate(-an * Rational(long(k))).intersect(Lj).measure() * cm;
        v -= Li.measure() * Lj.measure() * cm * cm;
        return v.to_double();
    };
    std::vector<WeakLimitPair> out;
    for (auto [i, j] : ij) {
        if (i >= m || j >= m) throw SpectralError("level index beyond m_n");
        out.push_back({ip(i, j, h + 1), ip(i, j, 1), ip(i, j, 0)});
    }
    return out;
}

std::vector<Observable> tower_level_observables(const TowerPair& P, const GridSpec& g) {
    std::vector<Observable> out;
    const std::size_t m = P.B1.levels.size();
    for (std::size_t i = 0; i < m; ++i) {
        CellSet u = set_union(P.B1.levels[i], P.B2.levels[i]);
        if (!(u.grid == g)) throw SpectralError("tower levels are not on the observable grid");
        out.push_back(Observable::indicator(u).centered());
    }
    return out;
}

KappaEstimate kappa_statistic(const CellPermutation& T, std::uint64_t k,
                              const std::vector<std::pair<CellSet, CellSet>>& sets) {
    KappaEstimate est;
    CellPermutation Tk = T.power(k);
    double lo = 1e300, hi = -1e300, sum = 0;
    for (const auto& [A, B] : sets) {
        Rational mA = A.measure(), mB = B.measure(), mAB = set_intersection(A, B).measure();
        Rational mAT = set_intersection(A, Tk.apply(B)).measure();
        Rational den = mA * mB - mAB;
        if (den.sign() == 0) {
            ++est.excluded;
            continue;
        }
        double kap = ((mAT - mAB) / den).to_double();
        est.per_pair.push_back(kap);
        lo = std::min(lo, kap);
        hi = std::max(hi, kap);
        sum += kap;
    }
    if (est.excluded) est.notice = std::to_string(est.excluded) + " degenerate pair(s) excluded";
    if (!est.per_pair.empty()) {
        est.kappa = sum / double(est.per_pair.size());
        est.spread = hi - lo;
    }
    return est;
}

SpectralDensity spectral_measure_estimate(const KoopmanCorrelations& corr, std::size_t points) {
    SpectralDensity out;
    const std::size_t K = corr.c.size();
    if (K == 0) throw SpectralError("empty correlation window");
    if (K < 8) out.warning = "window shorter than 8 lags, resolution is coarse";
    std::size_t N = points ? points : 1;
    while (N < 4 * K) N <<= 1;
    if (N < 2 * K - 1) throw SpectralError("too few evaluation points for the window");
    // F(theta) = sum_{|k|<K} (1 - |k|/K) c_k e^{-i k theta}, c_{-k} = c_k
    std::vector<std::complex<double>> w(N, 0.0), F;
    for (std::size_t k = 0; k < K; ++k) {
        double v = (1.0 - double(k) / double(K)) * corr.c[k];
        w[k] += v;
        if (k) w[N - k] += v;
    }
    Eigen::FFT<double> fft;
    fft.fwd(F, w);
    out.theta.resize(N);
    out.density.resize(N);
    long double s = 0;
    for (std::size_t j = 0; j < N; ++j) {
        out.theta[j] = 2 * kPi * double(j) / double(N);
        out.density[j] = F[j].real();
        s += F[j].real();
    }
    out.mass = double(s / (long double)N);
    return out;
}

std::string correlations_csv(const KoopmanCorrelations& c) {
    std::ostringstream os;
    os.precision(17);
    os << "k,c\n";
    for (std::size_t k = 0; k < c.c.size(); ++k) os << k << "," << c.c[k] << "\n";
    return os.str();
}

std::string density_csv(const SpectralDensity& s) {
    std::ostringstream os;
    os.precision(17);
    os << "theta,density\n";
    for (std::size_t j = 0; j < s.theta.size(); ++j) os << s.theta[j] << "," << s.density[j] << "\n";
    return os.str();
}

}  // namespace abc
