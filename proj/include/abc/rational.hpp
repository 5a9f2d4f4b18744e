#pragma once
// Exact arithmetic used by the combinatorial layer.  Rational wraps
// mpq_class so that every value is kept in lowest terms and division by
// zero raises instead of trapping.

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace abc {

using BigInt = mpz_class;

struct ArithmeticError : std::domain_error {
    using std::domain_error::domain_error;
};

class Rational {
public:
    Rational() = default;
    Rational(long v) : v_(v) {}
    Rational(int v) : v_(v) {}
    template <class U>
    Rational(const __gmp_expr<mpz_t, U>& v) : v_(BigInt(v)) {}
    Rational(const BigInt& num, const BigInt& den);
    Rational(long num, long den) : Rational(BigInt(num), BigInt(den)) {}

    static Rational parse(const std::string& s);

    const BigInt num() const { return v_.get_num(); }
    const BigInt den() const { return v_.get_den(); }
    const mpq_class& raw() const { return v_; }

    BigInt floor() const;
    Rational frac() const { return *this - Rational(floor()); }
    double to_double() const { return v_.get_d(); }
    std::string str() const { return v_.get_str(); }
    int sign() const { return sgn(v_); }
    bool is_integer() const { return v_.get_den() == 1; }

    Rational& operator+=(const Rational& o) { v_ += o.v_; return *this; }
    Rational& operator-=(const Rational& o) { v_ -= o.v_; return *this; }
    Rational& operator*=(const Rational& o) { v_ *= o.v_; return *this; }
    Rational& operator/=(const Rational& o);

    friend Rational operator+(Rational a, const Rational& b) { return a += b; }
    friend Rational operator-(Rational a, const Rational& b) { return a -= b; }
    friend Rational operator*(Rational a, const Rational& b) { return a *= b; }
    friend Rational operator/(Rational a, const Rational& b) { return a /= b; }
    friend Rational operator-(const Rational& a) { Rational r; r.v_ = -a.v_; return r; }

    friend bool operator==(const Rational& a, const Rational& b) { return a.v_ == b.v_; }
    friend bool operator!=(const Rational& a, const Rational& b) { return a.v_ != b.v_; }
    friend bool operator<(const Rational& a, const Rational& b) { return a.v_ < b.v_; }
    friend bool operator<=(const Rational& a, const Rational& b) { return a.v_ <= b.v_; }
    friend bool operator>(const Rational& a, const Rational& b) { return a.v_ > b.v_; }
    friend bool operator>=(const Rational& a, const Rational& b) { return a.v_ >= b.v_; }

private:
    explicit Rational(const mpq_class& q) : v_(q) { v_.canonicalize(); }
    mpq_class v_;
};

inline Rational mod1(const Rational& x) { return x.frac(); }

BigInt gcd(const BigInt& a, const BigInt& b);
BigInt lcm(const BigInt& a, const BigInt& b);
BigInt pow(const BigInt& b, unsigned long e);
BigInt floor_div(const BigInt& a, const BigInt& b);
BigInt mod(const BigInt& a, const BigInt& b);  // result in [0, |b|)

// Conversions that refuse silently truncating.
std::uint64_t to_u64(const BigInt& v);
std::int64_t to_i64(const BigInt& v);
BigInt parse_bigint(const std::string& s);

}  // namespace abc
