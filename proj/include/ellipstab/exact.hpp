#pragma once

#include <cmath>
#include <complex>
#include <string>

#include "ellipstab/rational.hpp"

namespace ellipstab {

// Element of Q(i, sqrt2): (re + i*im) + (re2 + i*im2)*sqrt(2).
// Closed under +,-,*,/ which is what exact complexification needs: the
// canonical change z = S(xi) introduces 1/sqrt(2) factors per variable.
class ExactComplex {
  public:
    Rational re, im, re2, im2;

    ExactComplex() = default;
    ExactComplex(Rational r) : re(std::move(r)) {}
    ExactComplex(long long r) : re(r) {}
    ExactComplex(Rational r, Rational i) : re(std::move(r)), im(std::move(i)) {}
    ExactComplex(Rational r, Rational i, Rational r2, Rational i2)
        : re(std::move(r)), im(std::move(i)), re2(std::move(r2)), im2(std::move(i2)) {}

    static ExactComplex i_unit() { return ExactComplex(Rational(0), Rational(1)); }
    static ExactComplex sqrt2() { return ExactComplex(Rational(0), Rational(0), Rational(1), Rational(0)); }
    // 1/sqrt(2) = sqrt(2)/2.
    static ExactComplex inv_sqrt2() {
        return ExactComplex(Rational(0), Rational(0), Rational(1, 2), Rational(0));
    }

    bool is_zero() const { return re.is_zero() && im.is_zero() && re2.is_zero() && im2.is_zero(); }
    bool is_rational() const { return im.is_zero() && re2.is_zero() && im2.is_zero(); }
    // True when the value lies in Q(i) * 2^(k/2) for a single parity k,
    // i.e. it is expressible by one (re, im, log2half) term in serialized form.
    bool single_component() const {
        return (re2.is_zero() && im2.is_zero()) || (re.is_zero() && im.is_zero());
    }

    friend ExactComplex operator+(const ExactComplex& a, const ExactComplex& b) {
        return {a.re + b.re, a.im + b.im, a.re2 + b.re2, a.im2 + b.im2};
    }
    friend ExactComplex operator-(const ExactComplex& a, const ExactComplex& b) {
        return {a.re - b.re, a.im - b.im, a.re2 - b.re2, a.im2 - b.im2};
    }
    ExactComplex operator-() const { return {-re, -im, -re2, -im2}; }

    friend ExactComplex operator*(const ExactComplex& a, const ExactComplex& b) {
        // (u1 + v1 s)(u2 + v2 s) with s^2 = 2, u/v Gaussian rationals.
        if (a.re2.is_zero() && a.im2.is_zero() && b.re2.is_zero() && b.im2.is_zero()) {
            return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
        }
        // u1*u2:
        Rational r = a.re * b.re - a.im * b.im;
        Rational i = a.re * b.im + a.im * b.re;
        // + 2 v1*v2:
        r += (a.re2 * b.re2 - a.im2 * b.im2) * Rational(2);
        i += (a.re2 * b.im2 + a.im2 * b.re2) * Rational(2);
        // ( u1*v2 + v1*u2 ) s:
        Rational r2 = a.re * b.re2 - a.im * b.im2 + a.re2 * b.re - a.im2 * b.im;
        Rational i2 = a.re * b.im2 + a.im * b.re2 + a.re2 * b.im + a.im2 * b.re;
        return {std::move(r), std::move(i), std::move(r2), std::move(i2)};
    }

    ExactComplex& operator+=(const ExactComplex& o) {
        re += o.re;
        im += o.im;
        re2 += o.re2;
        im2 += o.im2;
        return *this;
    }
    ExactComplex& operator-=(const ExactComplex& o) {
        re -= o.re;
        im -= o.im;
        re2 -= o.re2;
        im2 -= o.im2;
        return *this;
    }
    ExactComplex& operator*=(const ExactComplex& o) { return *this = *this * o; }

    ExactComplex conj() const { return {re, -im, re2, -im2}; }

    ExactComplex inverse() const {
        if (is_zero()) throw std::domain_error("ExactComplex: inverse of zero");
        // 1/(u + v s) = (u - v s) / (u^2 - 2 v^2), the denominator Gaussian rational.
        ExactComplex u(re, im), v(re2, im2);
        ExactComplex den = u * u - ExactComplex(Rational(2)) * (v * v);
        // Gaussian inverse of den = p + qi: (p - qi)/(p^2 + q^2).
        Rational mod2 = den.re * den.re + den.im * den.im;
        if (mod2.is_zero()) throw std::domain_error("ExactComplex: inverse of zero");
        ExactComplex deninv(den.re / mod2, -(den.im / mod2));
        ExactComplex num(re, im, -re2, -im2);
        return num * deninv;
    }

    friend ExactComplex operator/(const ExactComplex& a, const ExactComplex& b) {
        return a * b.inverse();
    }

    bool operator==(const ExactComplex& o) const {
        return re == o.re && im == o.im && re2 == o.re2 && im2 == o.im2;
    }

    // |c|^2 = x + y*sqrt(2) with rational x, y (always real and >= 0).
    void abs_squared(Rational& x, Rational& y) const {
        x = re * re + im * im + (re2 * re2 + im2 * im2) * Rational(2);
        y = (re * re2 + im * im2) * Rational(2);
    }
    double abs() const {
        Rational x, y;
        abs_squared(x, y);
        double xd = x.to_double(), yd = y.to_double();
        double t = xd + yd * 1.4142135623730951;
        // x and y sqrt2 may cancel almost completely; redo the sum against a
        // 50-digit rational sqrt2 when double rounding could flip the sign.
        if (t < 1e-8 * (std::abs(xd) + std::abs(yd)) && !y.is_zero()) {
            static const Rational s2 = Rational::parse(
                "1.41421356237309504880168872420969807856967187537694");
            t = (x + y * s2).to_double();
        }
        return std::sqrt(std::max(0.0, t));
    }

    std::complex<double> to_complex() const {
        constexpr double s = 1.4142135623730951;
        return {re.to_double() + re2.to_double() * s, im.to_double() + im2.to_double() * s};
    }

    std::string to_string() const;
};

inline std::string ExactComplex::to_string() const {
    std::string s = "(" + re.to_string();
    if (!im.is_zero()) s += (im.sign() > 0 ? "+" : "") + im.to_string() + "i";
    if (!re2.is_zero() || !im2.is_zero()) {
        s += "+(" + re2.to_string();
        if (!im2.is_zero()) s += (im2.sign() > 0 ? "+" : "") + im2.to_string() + "i";
        s += ")sqrt2";
    }
    return s + ")";
}

// Element a + b*sqrt(d) of a real quadratic field, d a non-square positive
// integer (d == 0 marks a plain rational). Signs and comparisons are exact.
class QuadIrr {
  public:
    QuadIrr() : d_(0) {}
    QuadIrr(Rational a) : a_(std::move(a)), d_(0) {}
    QuadIrr(long long a) : a_(a), d_(0) {}
    QuadIrr(Rational a, Rational b, long long d) : a_(std::move(a)), b_(std::move(b)), d_(d) {
        normalize();
    }

    const Rational& rat() const { return a_; }
    const Rational& coef() const { return b_; }
    long long d() const { return d_; }
    bool is_rational() const { return b_.is_zero(); }
    bool is_zero() const { return a_.is_zero() && b_.is_zero(); }

    friend QuadIrr operator+(const QuadIrr& x, const QuadIrr& y) {
        return QuadIrr(x.a_ + y.a_, x.b_ + y.b_, merge_d(x, y));
    }
    friend QuadIrr operator-(const QuadIrr& x, const QuadIrr& y) {
        return QuadIrr(x.a_ - y.a_, x.b_ - y.b_, merge_d(x, y));
    }
    friend QuadIrr operator*(const QuadIrr& x, const QuadIrr& y) {
        long long d = merge_d(x, y);
        return QuadIrr(x.a_ * y.a_ + x.b_ * y.b_ * Rational(d), x.a_ * y.b_ + x.b_ * y.a_, d);
    }
    QuadIrr operator-() const { return QuadIrr(-a_, -b_, d_); }
    QuadIrr inverse() const {
        if (is_zero()) throw std::domain_error("QuadIrr: inverse of zero");
        Rational den = a_ * a_ - b_ * b_ * Rational(d_);
        return QuadIrr(a_ / den, -b_ / den, d_);
    }
    friend QuadIrr operator/(const QuadIrr& x, const QuadIrr& y) { return x * y.inverse(); }
    QuadIrr& operator+=(const QuadIrr& o) { return *this = *this + o; }
    QuadIrr& operator-=(const QuadIrr& o) { return *this = *this - o; }

    int sign() const {
        if (b_.is_zero()) return a_.sign();
        if (a_.is_zero()) return b_.sign();
        int sa = a_.sign(), sb = b_.sign();
        if (sa == sb) return sa;
        // Mixed signs: compare a^2 with b^2 d.
        Rational diff = a_ * a_ - b_ * b_ * Rational(d_);
        if (diff.is_zero()) return 0;  // unreachable for non-square d
        return diff.sign() > 0 ? sa : sb;
    }
    QuadIrr abs() const { return sign() < 0 ? -*this : *this; }
    bool operator==(const QuadIrr& o) const { return a_ == o.a_ && b_ == o.b_ && (b_.is_zero() || o.b_.is_zero() || d_ == o.d_); }
    bool operator<(const QuadIrr& o) const { return (*this - o).sign() < 0; }
    bool operator<=(const QuadIrr& o) const { return (*this - o).sign() <= 0; }

    double to_double() const { return a_.to_double() + b_.to_double() * std::sqrt(static_cast<double>(d_)); }

    // Exact floor, needed by the continued-fraction expansion.
    BigInt floor() const;

    std::string to_string() const {
        if (b_.is_zero()) return a_.to_string();
        return a_.to_string() + (b_.sign() >= 0 ? "+" : "") + b_.to_string() + "*sqrt(" +
               std::to_string(d_) + ")";
    }

  private:
    Rational a_, b_;
    long long d_;

    void normalize() {
        if (b_.is_zero()) {
            d_ = 0;
            return;
        }
        if (d_ <= 0) throw std::domain_error("QuadIrr: radicand must be positive");
        long long s = static_cast<long long>(std::llround(std::sqrt(static_cast<double>(d_))));
        for (long long t = std::max(0LL, s - 1); t <= s + 1; ++t) {
            if (t * t == d_) {
                a_ += b_ * Rational(t);
                b_ = Rational(0);
                d_ = 0;
                return;
            }
        }
    }
    static long long merge_d(const QuadIrr& x, const QuadIrr& y) {
        if (x.b_.is_zero()) return y.d_;
        if (y.b_.is_zero()) return x.d_;
        if (x.d_ != y.d_) throw std::domain_error("QuadIrr: mixed radicands");
        return x.d_;
    }
};

inline BigInt QuadIrr::floor() const {
    if (b_.is_zero()) {
        BigInt q, r;
        BigInt::divmod(a_.num(), a_.den(), q, r);
        if (!r.is_zero() && a_.sign() < 0) q -= BigInt(1);
        return q;
    }
    long long guess = static_cast<long long>(std::floor(to_double()));
    QuadIrr m{Rational(guess)};
    // Fix up against rounding error in the double estimate.
    while ((*this - m).sign() < 0) m = m - QuadIrr(Rational(1));
    while ((*this - (m + QuadIrr(Rational(1)))).sign() >= 0) m = m + QuadIrr(Rational(1));
    BigInt q, r;
    BigInt::divmod(m.rat().num(), m.rat().den(), q, r);
    return q;
}

}  // namespace ellipstab
