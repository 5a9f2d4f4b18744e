#include "abc/rational.hpp"

#include <limits>

namespace abc {

Rational::Rational(const BigInt& num, const BigInt& den) {
    if (den == 0) throw ArithmeticError("rational with zero denominator");
    v_ = mpq_class(num, den);
    v_.canonicalize();
}

Rational Rational::parse(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(parse_bigint(s));
    return Rational(parse_bigint(s.substr(0, slash)), parse_bigint(s.substr(slash + 1)));
}

Rational& Rational::operator/=(const Rational& o) {
    if (o.v_ == 0) throw ArithmeticError("division by zero");
    v_ /= o.v_;
    return *this;
}

BigInt Rational::floor() const { return floor_div(v_.get_num(), v_.get_den()); }

BigInt gcd(const BigInt& a, const BigInt& b) {
    BigInt r;
    mpz_gcd(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

BigInt lcm(const BigInt& a, const BigInt& b) {
    BigInt r;
    mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

BigInt pow(const BigInt& b, unsigned long e) {
    BigInt r;
    mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), e);
    return r;
}

BigInt floor_div(const BigInt& a, const BigInt& b) {
    if (b == 0) throw ArithmeticError("division by zero");
    BigInt r;
    mpz_fdiv_q(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

BigInt mod(const BigInt& a, const BigInt& b) {
    if (b == 0) throw ArithmeticError("modulo by zero");
    BigInt r;
    mpz_mod(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

static_assert(sizeof(unsigned long) == 8, "64-bit long expected");

std::uint64_t to_u64(const BigInt& v) {
    if (v < 0 || !mpz_fits_ulong_p(v.get_mpz_t()))
        throw ArithmeticError("integer does not fit in 64 bits: " + v.get_str());
    return mpz_get_ui(v.get_mpz_t());
}

std::int64_t to_i64(const BigInt& v) {
    if (!mpz_fits_slong_p(v.get_mpz_t()))
        throw ArithmeticError("integer does not fit in 64 bits: " + v.get_str());
    return mpz_get_si(v.get_mpz_t());
}

BigInt parse_bigint(const std::string& s) {
    BigInt r;
    if (s.empty() || r.set_str(s, 10) != 0) throw std::invalid_argument("not an integer: '" + s + "'");
    return r;
}

}  // namespace abc
