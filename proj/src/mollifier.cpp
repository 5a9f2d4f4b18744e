#include "abc/mollifier.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace abc {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kReach = 10.0;     // erf terms further than 10 widths are below 1e-23
constexpr double kExpLimit = 650.0;  // keep exponents well inside double range

double gauss_q(double u) { return 0.5 * std::erfc(u / std::numbers::sqrt2); }
double gauss_phi(double u) { return std::exp(-0.5 * u * u) / std::sqrt(2 * kPi); }

// Log of the harmonic-j bound TV/(2 pi j) exp(-2 pi^2 sa^2 j^2 + 2 pi j y).
double log_term(double tv, double sa, double y, double j) {
    return std::log(tv / (2 * kPi * j)) - 2 * kPi * kPi * sa * sa * j * j + 2 * kPi * j * y;
}

// Harmonic count needed so the tail on |Im a| <= y is below tol; 0 if none
// fits below max_j.
std::size_t harmonics_needed(double tv, double sa, double y, double tol, std::size_t max_j) {
    if (tv == 0) return 0;
    double A = 2 * kPi * kPi * sa * sa, Bq = 2 * kPi * y, C = std::log(tv / (2 * kPi)) - std::log(tol);
    double disc = Bq * Bq + 4 * A * std::max(C, 0.0);
    double jq = (Bq + std::sqrt(disc)) / (2 * A);
    double start = std::max({1.0, std::ceil(y / (kPi * sa * sa)), std::ceil(jq) - 1});
    if (!(start <= double(max_j))) return 0;
    double lt = std::log(tol);
    std::size_t j0 = std::size_t(start);
    for (std::size_t j = j0; j <= max_j && j < j0 + 100000; ++j) {
        double lb = log_term(tv, sa, y, double(j));
        // ratio of consecutive bounds past the peak
        double lr = -A * (2.0 * double(j) + 1) + Bq;
        if (lr < 0) {
            double geo = -std::log1p(-std::exp(lr));
            if (lb + geo < lt) return j;
        }
    }
    return 0;
}

bool strip_ok(double tv, double sa, double y, double tol, std::size_t max_j) {
    if (tv == 0) return true;
    if (y * y / (2 * sa * sa) + std::log(std::max(1.0, tv)) > kExpLimit) return false;
    return harmonics_needed(tv, sa, y, tol, max_j) > 0;
}

}  // namespace

double gaussian_tail_bound(double sa, double t, double w, double jmax) {
    if (jmax == 0) return 0;
    double sum = 0;
    const std::uint64_t cap = 1000000;
    std::uint64_t k = 0;
    for (; k < cap; ++k) {
        double term = gauss_q((t + double(k) * w) / sa);
        sum += term;
        if (term == 0 || term < sum * 1e-17) break;
    }
    if (k == cap) {
        double z = (t + double(cap - 1) * w) / sa;
        sum += (sa / w) * (gauss_phi(z) - z * gauss_q(z));
    }
    return 2 * jmax * sum;
}

MollifiedStep mollify_step(const StepFunction& s, std::uint64_t N, double eps, double delta,
                           const MollifyOptions& opt) {
    if (N == 0) throw std::invalid_argument("mollify_step: N must be positive");
    if (!(eps > 0 && eps < 1) || !(delta > 0 && delta < 1))
        throw std::invalid_argument("mollify_step: eps and delta must lie in (0,1)");
    if (!s.is_periodic(N)) throw std::invalid_argument("mollify_step: step function is not 1/N periodic");

    MollifiedStep m;
    m.base_ = s;
    m.N_ = N;
    m.eps_ = eps;
    m.delta_ = delta;
    StepFunction c = s.coarsen();
    m.Np_ = c.period();
    m.L_ = c.pieces() / m.Np_;
    const std::uint64_t L = m.L_;
    m.vals_.resize(L);
    double tot = 0;
    for (std::uint64_t i = 0; i < L; ++i) {
        m.vals_[i] = c.value(i).to_double();
        tot += m.vals_[i];
    }
    m.mean_ = tot / double(L);
    double tv = 0, jmax = 0;
    for (std::uint64_t i = 0; i < L; ++i) {
        double jv = m.vals_[i] - m.vals_[(i + L - 1) % L];
        // exact zero test to avoid phantom jumps from rounding
        if (c.value(i) != c.value((i + L - 1) % L)) {
            m.jumps_.push_back({i, jv});
            tv += std::abs(jv);
            jmax = std::max(jmax, std::abs(jv));
        }
    }

    if (m.jumps_.empty()) {
        m.sa_ = 1;
        m.sx_ = 1.0 / double(m.Np_);
        m.cap_ = std::numeric_limits<double>::infinity();
        return m;
    }

    const double w = 1.0 / double(L);
    m.t_ = delta / (2.0 * double(L));
    const double target = 0.5 * eps;
    const double np = double(m.Np_);
    auto B = [&](double sa, double t) { return gaussian_tail_bound(sa, t, w, jmax); };

    // narrowest kernel the Fourier side can still represent on the real line
    double sa_min = 1.0;
    {
        double lo = 1e-15, hi = 1.0;
        if (!strip_ok(tv, lo, 0, opt.tail, opt.max_harmonics)) {
            for (int it = 0; it < 200; ++it) {
                double mid = std::sqrt(lo * hi);
                (strip_ok(tv, mid, 0, opt.tail, opt.max_harmonics) ? hi : lo) = mid;
            }
            sa_min = hi;
        } else {
            sa_min = lo;
        }
    }
    auto achievable_delta = [&](double sa, double e) {
        if (B(sa, 0.5 / double(L)) > 0.5 * e) return 1.0;
        double lo = 0, hi = 1;
        for (int it = 0; it < 100; ++it) {
            double mid = 0.5 * (lo + hi);
            (B(sa, mid / (2.0 * double(L))) <= 0.5 * e ? hi : lo) = mid;
        }
        return hi;
    };

    if (opt.sigma > 0) {
        m.sa_ = opt.sigma * np;
    } else {
        double lo = 1e-300, hi = 1.0;
        if (B(hi, m.t_) <= target) {
            m.sa_ = hi;
        } else {
            for (int it = 0; it < 200; ++it) {
                double mid = std::sqrt(lo * hi);
                (B(mid, m.t_) <= target ? lo : hi) = mid;
            }
            m.sa_ = lo;
        }
        if (m.sa_ < sa_min) {
            throw MollifyError("mollify_step: required sharpness is beyond numeric range", 2 * B(sa_min, m.t_),
                               achievable_delta(sa_min, eps));
        }
    }
    m.sx_ = m.sa_ / np;
    m.bound_ = B(m.sa_, m.t_);

    // strip capacity, in the reduced coordinate first
    double want = opt.strip * np;
    double cap = want;
    if (!strip_ok(tv, m.sa_, want, opt.tail, opt.max_harmonics)) {
        if (opt.require_strip) {
            // widest kernel meeting the strip, and what it buys
            double lo = m.sa_, hi = 1.0;
            for (int it = 0; it < 200; ++it) {
                double mid = std::sqrt(lo * hi);
                (strip_ok(tv, mid, want, opt.tail, opt.max_harmonics) ? hi : lo) = mid;
            }
            throw MollifyError("mollify_step: strip requirement exceeds numeric range", 2 * B(hi, m.t_),
                               achievable_delta(hi, eps));
        }
        double lo = 0, hi = want;
        for (int it = 0; it < 100; ++it) {
            double mid = 0.5 * (lo + hi);
            (strip_ok(tv, m.sa_, mid, opt.tail, opt.max_harmonics) ? lo : hi) = mid;
        }
        cap = lo;
        m.overflow_ = true;
    }
    m.cap_ = cap / np;
    std::size_t J = harmonics_needed(tv, m.sa_, cap, opt.tail, opt.max_harmonics);
    if (J == 0)
        throw MollifyError("mollify_step: harmonic budget exhausted", 2 * B(sa_min, m.t_),
                           achievable_delta(sa_min, eps));

    // D_j = sum_i J_i exp(-2 pi i j i / L), periodic in j with period L
    std::vector<std::complex<double>> spec;
    if (L <= 64) {
        spec.resize(L);
        for (std::uint64_t j = 0; j < L; ++j) {
            std::complex<double> acc = 0;
            for (auto& [i, jv] : m.jumps_) acc += jv * std::polar(1.0, -2 * kPi * double((j * i) % L) / double(L));
            spec[j] = acc;
        }
    } else {
        std::vector<std::complex<double>> in(L, 0.0);
        for (auto& [i, jv] : m.jumps_) in[i] = jv;
        Eigen::FFT<double> fft;
        fft.fwd(spec, in);
    }
    m.coef_.resize(J);
    for (std::size_t j = 1; j <= J; ++j) {
        double g = std::exp(-2 * kPi * kPi * m.sa_ * m.sa_ * double(j) * double(j));
        m.coef_[j - 1] = spec[j % L] / std::complex<double>(0, 2 * kPi * double(j)) * g;
    }
    return m;
}

double MollifiedStep::reduce(double x) const {
    double a = x * double(Np_);
    return a - std::floor(a);
}

double MollifiedStep::bad_measure() const { return std::min(1.0, 2 * t_ * double(jumps_.size())); }

bool MollifiedStep::in_bad_set(double x) const {
    if (jumps_.empty()) return false;
    double a = reduce(x);
    double pos = a * double(L_);
    // nearest jumps on either side, cyclically
    auto it = std::lower_bound(jumps_.begin(), jumps_.end(), pos,
                               [](const auto& p, double v) { return double(p.first) < v; });
    auto dist = [&](std::uint64_t i) {
        double d = std::abs(a - double(i) / double(L_));
        return std::min(d, 1 - d);
    };
    double best = dist(it == jumps_.end() ? jumps_.front().first : it->first);
    best = std::min(best, dist(it == jumps_.begin() ? jumps_.back().first : std::prev(it)->first));
    return best < t_;
}

double MollifiedStep::erf_route(double x) const {
    if (jumps_.empty()) return mean_;
    double R = kReach * sa_;
    if (R >= 0.5) return fourier_route(x);
    double a = reduce(x);
    std::uint64_t piece = std::min<std::uint64_t>(L_ - 1, std::uint64_t(a * double(L_)));
    double v = vals_[piece];
    for (int img = -1; img <= 1; ++img) {
        double lo = (a - R - img) * double(L_), hi = (a + R - img) * double(L_);
        if (hi < 0 || lo > double(L_)) continue;
        auto it = std::lower_bound(jumps_.begin(), jumps_.end(), lo,
                                   [](const auto& p, double val) { return double(p.first) < val; });
        for (; it != jumps_.end() && double(it->first) <= hi; ++it) {
            double u = (a - (double(it->first) / double(L_) + img)) / sa_;
            // Phi(u) - H(u)
            double c = u < 0 ? gauss_q(-u) : -gauss_q(u);
            v += it->second * c;
        }
    }
    return v;
}

double MollifiedStep::operator()(double x) const { return erf_route(x); }

double MollifiedStep::derivative(double x) const {
    if (jumps_.empty()) return 0;
    double R = kReach * sa_;
    if (R >= 0.5) return derivative(cplx(x, 0)).real();
    double a = reduce(x);
    double v = 0;
    for (int img = -1; img <= 1; ++img) {
        double lo = (a - R - img) * double(L_), hi = (a + R - img) * double(L_);
        if (hi < 0 || lo > double(L_)) continue;
        auto it = std::lower_bound(jumps_.begin(), jumps_.end(), lo,
                                   [](const auto& p, double val) { return double(p.first) < val; });
        for (; it != jumps_.end() && double(it->first) <= hi; ++it) {
            double u = (a - (double(it->first) / double(L_) + img)) / sa_;
            v += it->second * gauss_phi(u) / sa_;
        }
    }
    return v * double(Np_);
}

MollifiedStep::cplx MollifiedStep::fourier_sum(cplx a, bool deriv) const {
    const double inf = std::numeric_limits<double>::infinity();
    double ya = std::abs(a.imag());
    if (ya > cap_ * double(Np_) * (1 + 1e-12)) return cplx(inf, inf);
    double re = a.real() - std::floor(a.real());
    cplx acc = 0;
    const std::size_t J = coef_.size();
    if (2 * kPi * ya * double(J) < 600) {
        // plain recurrence, powers stay in range
        cplx E = std::exp(cplx(0, 2 * kPi) * cplx(re, a.imag()));
        cplx Ei = 1.0 / E;
        cplx p = 1, pi = 1;
        for (std::size_t j = 1; j <= J; ++j) {
            p *= E;
            pi *= Ei;
            cplx c = coef_[j - 1];
            if (deriv)
                acc += cplx(0, 2 * kPi * double(j)) * (c * p - std::conj(c) * pi);
            else
                acc += c * p + std::conj(c) * pi;
        }
    } else {
        for (std::size_t j = 1; j <= J; ++j) {
            cplx c = coef_[j - 1];
            if (c == cplx(0)) continue;
            double lc = std::log(std::abs(c)), ph = std::arg(c);
            double th = 2 * kPi * double(j) * re;
            double ey = 2 * kPi * double(j) * a.imag();
            cplx t1 = std::polar(std::exp(lc - ey), ph + th);
            cplx t2 = std::polar(std::exp(lc + ey), -ph - th);
            if (deriv)
                acc += cplx(0, 2 * kPi * double(j)) * (t1 - t2);
            else
                acc += t1 + t2;
        }
    }
    if (!std::isfinite(acc.real()) || !std::isfinite(acc.imag())) return cplx(inf, inf);
    return acc;
}

namespace {

// e^w - 1 for complex w
std::complex<double> expm1c(std::complex<double> w) {
    double x = w.real(), y = w.imag();
    double sh = std::sin(0.5 * y);
    return {std::expm1(x) * std::cos(y) - 2 * sh * sh, std::exp(x) * std::sin(y)};
}

}  // namespace

MollifiedStep::cplx MollifiedStep::fourier_diff(cplx a, cplx da) const {
    const double inf = std::numeric_limits<double>::infinity();
    double ya = std::max(std::abs(a.imag()), std::abs((a + da).imag()));
    if (ya > cap_ * double(Np_) * (1 + 1e-12)) return cplx(inf, inf);
    cplx w(a.real() - std::floor(a.real()), a.imag());
    const std::size_t J = coef_.size();
    cplx g1 = expm1c(cplx(0, 2 * kPi) * da), h1 = expm1c(cplx(0, -2 * kPi) * da);
    cplx g = 0, h = 0, acc = 0;
    bool recur = 2 * kPi * std::abs(a.imag()) * double(J) < 600;
    cplx E = std::exp(cplx(0, 2 * kPi) * w), Ei = 1.0 / E, p = 1, pi = 1;
    for (std::size_t j = 1; j <= J; ++j) {
        g = g + g1 * (1.0 + g);
        h = h + h1 * (1.0 + h);
        cplx c = coef_[j - 1];
        cplx t1, t2;
        if (recur) {
            p *= E;
            pi *= Ei;
            t1 = c * p;
            t2 = std::conj(c) * pi;
        } else {
            if (c == cplx(0)) continue;
            double lc = std::log(std::abs(c)), ph = std::arg(c);
            double th = 2 * kPi * double(j) * w.real(), ey = 2 * kPi * double(j) * w.imag();
            t1 = std::polar(std::exp(lc - ey), ph + th);
            t2 = std::polar(std::exp(lc + ey), -ph - th);
        }
        acc += t1 * g + t2 * h;
    }
    if (!std::isfinite(acc.real()) || !std::isfinite(acc.imag())) return cplx(inf, inf);
    return acc;
}

MollifiedStep::cplx MollifiedStep::difference(cplx z, cplx dz) const {
    if (jumps_.empty()) return 0;
    return fourier_diff(z * double(Np_), dz * double(Np_));
}

MollifiedStep::cplx MollifiedStep::fourier(cplx z) const {
    if (jumps_.empty()) return mean_;
    return mean_ + fourier_sum(z * double(Np_), false);
}

MollifiedStep::cplx MollifiedStep::derivative(cplx z) const {
    if (jumps_.empty()) return 0;
    return fourier_sum(z * double(Np_), true) * double(Np_);
}

}  // namespace abc
