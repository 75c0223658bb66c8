#pragma once

#include <string>
#include <stdexcept>

#include "ellipstab/bigint.hpp"

namespace ellipstab {

// Exact rational, always normalized: den > 0, gcd(num, den) = 1, 0 = 0/1.
class Rational {
  public:
    Rational() : num_(0), den_(1) {}
    Rational(long long v) : num_(v), den_(1) {}
    Rational(BigInt num, BigInt den) : num_(std::move(num)), den_(std::move(den)) { normalize(); }
    Rational(long long num, long long den) : num_(num), den_(den) { normalize(); }

    // Parses "p", "p/q", or a plain decimal like "-1.25".
    static Rational parse(const std::string& s);

    const BigInt& num() const { return num_; }
    const BigInt& den() const { return den_; }
    bool is_zero() const { return num_.is_zero(); }
    bool is_integer() const { return den_.is_one(); }
    int sign() const { return num_.sign(); }

    friend Rational operator+(const Rational& a, const Rational& b);
    friend Rational operator-(const Rational& a, const Rational& b);
    friend Rational operator*(const Rational& a, const Rational& b);
    friend Rational operator/(const Rational& a, const Rational& b);
    Rational operator-() const {
        Rational r = *this;
        r.num_.negate();
        return r;
    }
    Rational& operator+=(const Rational& o) { return *this = *this + o; }
    Rational& operator-=(const Rational& o) { return *this = *this - o; }
    Rational& operator*=(const Rational& o) { return *this = *this * o; }
    Rational& operator/=(const Rational& o) { return *this = *this / o; }

    Rational inverse() const;
    Rational abs() const { return num_.is_negative() ? -*this : *this; }
    static Rational pow(const Rational& base, int exp);

    bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
    std::strong_ordering operator<=>(const Rational& o) const {
        return (num_ * o.den_) <=> (o.num_ * den_);
    }

    double to_double() const;
    std::string to_string() const;

  private:
    BigInt num_, den_;
    void normalize();
};

inline void Rational::normalize() {
    if (den_.is_zero()) throw std::domain_error("Rational: zero denominator");
    if (den_.is_negative()) {
        num_.negate();
        den_.negate();
    }
    if (num_.is_zero()) {
        den_ = BigInt(1);
        return;
    }
    if (!den_.is_one()) {
        BigInt g = BigInt::gcd(num_, den_);
        if (!g.is_one()) {
            num_ = num_ / g;
            den_ = den_ / g;
        }
    }
}

inline Rational operator+(const Rational& a, const Rational& b) {
    if (a.den_ == b.den_) return Rational(a.num_ + b.num_, a.den_);
    return Rational(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

inline Rational operator-(const Rational& a, const Rational& b) {
    if (a.den_ == b.den_) return Rational(a.num_ - b.num_, a.den_);
    return Rational(a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_);
}

inline Rational operator*(const Rational& a, const Rational& b) {
    // Cross-reduce before multiplying to keep gcd operands small.
    BigInt g1 = BigInt::gcd(a.num_, b.den_);
    BigInt g2 = BigInt::gcd(b.num_, a.den_);
    Rational r;
    r.num_ = (g1.is_one() ? a.num_ : a.num_ / g1) * (g2.is_one() ? b.num_ : b.num_ / g2);
    r.den_ = (g2.is_one() ? a.den_ : a.den_ / g2) * (g1.is_one() ? b.den_ : b.den_ / g1);
    if (r.den_.is_negative()) {
        r.num_.negate();
        r.den_.negate();
    }
    if (r.num_.is_zero()) r.den_ = BigInt(1);
    return r;
}

inline Rational operator/(const Rational& a, const Rational& b) {
    if (b.is_zero()) throw std::domain_error("Rational: division by zero");
    return Rational(a.num_ * b.den_, a.den_ * b.num_);
}

inline Rational Rational::inverse() const {
    if (is_zero()) throw std::domain_error("Rational: inverse of zero");
    return Rational(den_, num_);
}

inline Rational Rational::pow(const Rational& base, int exp) {
    if (exp < 0) return pow(base, -exp).inverse();
    return Rational(BigInt::pow(base.num_, static_cast<unsigned>(exp)),
                    BigInt::pow(base.den_, static_cast<unsigned>(exp)));
}

inline double Rational::to_double() const {
    if (is_integer()) return num_.to_double();
    if (num_.fits_int64() && den_.fits_int64())
        return static_cast<double>(num_.to_int64()) / static_cast<double>(den_.to_int64());
    // Scale so the quotient keeps full double precision even for huge operands.
    BigInt q, r;
    BigInt::divmod(num_, den_, q, r);
    const BigInt scale = BigInt::pow(BigInt(2), 64);
    BigInt q2, r2;
    BigInt::divmod(r * scale, den_, q2, r2);
    return q.to_double() + q2.to_double() / 18446744073709551616.0;
}

inline Rational Rational::parse(const std::string& s) {
    auto slash = s.find('/');
    if (slash != std::string::npos)
        return Rational(BigInt(s.substr(0, slash)), BigInt(s.substr(slash + 1)));
    auto dot = s.find('.');
    if (dot != std::string::npos) {
        std::string intpart = s.substr(0, dot), frac = s.substr(dot + 1);
        if (frac.find_first_not_of("0123456789") != std::string::npos)
            throw std::invalid_argument("Rational: bad decimal \"" + s + "\"");
        BigInt den = BigInt::pow(BigInt(10), static_cast<unsigned>(frac.size()));
        bool neg = !intpart.empty() && intpart[0] == '-';
        if (intpart.empty() || intpart == "-" || intpart == "+") intpart += "0";
        BigInt whole(intpart);
        BigInt num = whole.abs() * den + (frac.empty() ? BigInt(0) : BigInt(frac));
        if (neg) num.negate();
        return Rational(num, den);
    }
    return Rational(BigInt(s), BigInt(1));
}

inline std::string Rational::to_string() const {
    if (is_integer()) return num_.to_string();
    return num_.to_string() + "/" + den_.to_string();
}

}  // namespace ellipstab
