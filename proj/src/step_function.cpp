#include "abc/step_function.hpp"

#include <cmath>
#include <numeric>

namespace abc {

StepFunction::StepFunction(std::vector<Rational> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("step function needs at least one piece");
}

std::vector<Rational> StepFunction::breakpoints() const {
    std::vector<Rational> b;
    b.reserve(values_.size());
    BigInt n(static_cast<unsigned long>(values_.size()));
    for (std::uint64_t i = 0; i < values_.size(); ++i) b.emplace_back(BigInt(static_cast<unsigned long>(i)), n);
    return b;
}

Rational StepFunction::operator()(const Rational& x) const {
    Rational f = mod1(x);
    std::uint64_t i = to_u64((f * Rational(BigInt(static_cast<unsigned long>(values_.size())))).floor());
    return values_[i];
}

double StepFunction::operator()(double x) const {
    double f = x - std::floor(x);
    auto i = static_cast<std::uint64_t>(f * static_cast<double>(values_.size()));
    if (i >= values_.size()) i = values_.size() - 1;
    return values_[i].to_double();
}

bool StepFunction::is_periodic(std::uint64_t P) const {
    std::uint64_t n = values_.size();
    if (P == 0 || n % P != 0) return false;
    std::uint64_t shift = n / P;
    for (std::uint64_t i = 0; i + shift < n; ++i)
        if (values_[i] != values_[i + shift]) return false;
    return true;
}

std::uint64_t StepFunction::period() const {
    std::uint64_t n = values_.size();
    for (std::uint64_t s = 1; s <= n; ++s)
        if (n % s == 0 && is_periodic(n / s)) return n / s;
    return 1;
}

StepFunction StepFunction::refine(std::uint64_t N) const {
    std::uint64_t n = values_.size();
    if (N % n != 0) throw std::invalid_argument("refine: target piece count must be a multiple");
    std::vector<Rational> v(N);
    std::uint64_t f = N / n;
    for (std::uint64_t i = 0; i < N; ++i) v[i] = values_[i / f];
    return StepFunction(std::move(v));
}

StepFunction StepFunction::coarsen() const {
    std::uint64_t n = values_.size();
    for (std::uint64_t m = 1; m < n; ++m) {
        if (n % m != 0) continue;
        std::uint64_t f = n / m;
        bool ok = true;
        for (std::uint64_t i = 0; i < n && ok; ++i) ok = values_[i] == values_[(i / f) * f];
        if (ok) {
            std::vector<Rational> v(m);
            for (std::uint64_t i = 0; i < m; ++i) v[i] = values_[i * f];
            return StepFunction(std::move(v));
        }
    }
    return *this;
}

std::vector<std::pair<std::uint64_t, Rational>> StepFunction::jumps() const {
    std::vector<std::pair<std::uint64_t, Rational>> j;
    std::uint64_t n = values_.size();
    for (std::uint64_t i = 0; i < n; ++i) {
        Rational dv = values_[i] - values_[(i + n - 1) % n];
        if (dv != 0) j.emplace_back(i, dv);
    }
    return j;
}

bool StepFunction::is_zero() const {
    for (const auto& v : values_)
        if (v != 0) return false;
    return true;
}

Rational StepFunction::mean() const {
    Rational s(0);
    for (const auto& v : values_) s += v;
    return s / Rational(BigInt(static_cast<unsigned long>(values_.size())));
}

Rational StepFunction::max_abs() const {
    Rational m(0);
    for (const auto& v : values_) {
        Rational a = v.sign() < 0 ? -v : v;
        if (a > m) m = a;
    }
    return m;
}

StepFunction operator+(const StepFunction& a, const StepFunction& b) {
    std::uint64_t n = std::lcm(a.pieces(), b.pieces());
    StepFunction ra = a.refine(n), rb = b.refine(n);
    std::vector<Rational> v(n);
    for (std::uint64_t i = 0; i < n; ++i) v[i] = ra.value(i) + rb.value(i);
    return StepFunction(std::move(v)).coarsen();
}

StepFunction operator-(const StepFunction& a) {
    std::vector<Rational> v = a.values();
    for (auto& x : v) x = -x;
    return StepFunction(std::move(v));
}

bool StepFunction::operator==(const StepFunction& o) const {
    std::uint64_t n = std::lcm(pieces(), o.pieces());
    return refine(n).values_ == o.refine(n).values_;
}

}  // namespace abc
