#include <doctest.h>

#include <random>

#include "ellipstab/bigint.hpp"
#include "ellipstab/exact.hpp"
#include "ellipstab/rational.hpp"

using namespace ellipstab;

TEST_CASE("BigInt arithmetic agrees with int64 on random operands") {
    std::mt19937_64 rng(12345);
    std::uniform_int_distribution<long long> dist(-1000000000LL, 1000000000LL);
    for (int it = 0; it < 2000; ++it) {
        long long a = dist(rng), b = dist(rng);
        BigInt A(a), B(b);
        CHECK((A + B).to_int64() == a + b);
        CHECK((A - B).to_int64() == a - b);
        CHECK((A * B).to_int64() == a * b);
        if (b != 0) {
            CHECK((A / B).to_int64() == a / b);
            CHECK((A % B).to_int64() == a % b);
        }
    }
}

TEST_CASE("BigInt multi-limb division round-trips") {
    std::mt19937_64 rng(999);
    for (int it = 0; it < 500; ++it) {
        BigInt a = BigInt::from_uint64(rng()) * BigInt::from_uint64(rng()) + BigInt::from_uint64(rng());
        BigInt b = BigInt::from_uint64(rng() % 1000000 + 1) * BigInt::from_uint64(rng() % 65536 + 1);
        if (it % 3 == 0) b = BigInt::from_uint64(rng() | 1);
        if (it % 2 == 0) a.negate();
        BigInt q, r;
        BigInt::divmod(a, b, q, r);
        CHECK(q * b + r == a);
        CHECK(BigInt::cmp_abs(r, b) < 0);
    }
}

TEST_CASE("BigInt decimal strings round-trip") {
    const char* samples[] = {"0", "-1", "123456789012345678901234567890",
                             "-999999999999999999999999999999999999"};
    for (auto s : samples) CHECK(BigInt(s).to_string() == s);
}

TEST_CASE("BigInt gcd and pow") {
    CHECK(BigInt::gcd(BigInt(12), BigInt(18)).to_int64() == 6);
    CHECK(BigInt::gcd(BigInt(-12), BigInt(18)).to_int64() == 6);
    CHECK(BigInt::gcd(BigInt(0), BigInt(5)).to_int64() == 5);
    CHECK(BigInt::pow(BigInt(3), 20).to_string() == "3486784401");
}

TEST_CASE("Rational normalization and field ops") {
    Rational a(6, -4);
    CHECK(a.to_string() == "-3/2");
    Rational b(1, 3);
    CHECK((a + b).to_string() == "-7/6");
    CHECK((a * b).to_string() == "-1/2");
    CHECK((a / b).to_string() == "-9/2");
    CHECK((a - a).is_zero());
    CHECK(Rational::parse("22/7") == Rational(22, 7));
    CHECK(Rational::parse("-1.25") == Rational(-5, 4));
    CHECK(Rational(1, 3).to_double() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK((Rational(1, 2) < Rational(2, 3)));
}

TEST_CASE("ExactComplex is a field containing i and sqrt2") {
    ExactComplex i = ExactComplex::i_unit();
    CHECK((i * i) == ExactComplex(Rational(-1)));
    ExactComplex s = ExactComplex::sqrt2();
    CHECK((s * s) == ExactComplex(Rational(2)));
    CHECK((ExactComplex::inv_sqrt2() * s) == ExactComplex(Rational(1)));

    std::mt19937_64 rng(7);
    std::uniform_int_distribution<long long> d(-6, 6);
    for (int it = 0; it < 300; ++it) {
        ExactComplex c(Rational(d(rng), 3), Rational(d(rng), 2), Rational(d(rng), 5),
                       Rational(d(rng), 7));
        if (c.is_zero()) continue;
        CHECK((c * c.inverse()) == ExactComplex(Rational(1)));
        Rational x, y;
        (c * c.conj()).abs_squared(x, y);  // |c|^4 stays real
        ExactComplex sq = c * c.conj();
        CHECK(sq.im.is_zero());
        CHECK(sq.im2.is_zero());
    }
}

TEST_CASE("ExactComplex modulus") {
    ExactComplex c(Rational(3), Rational(4));
    CHECK(c.abs() == doctest::Approx(5.0).epsilon(1e-15));
    ExactComplex r2 = ExactComplex::sqrt2();
    CHECK(r2.abs() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("QuadIrr exact sign and comparisons") {
    QuadIrr golden(Rational(1, 2), Rational(1, 2), 5);  // (1+sqrt5)/2
    CHECK(golden.sign() == 1);
    CHECK(golden.to_double() == doctest::Approx(1.618033988749895).epsilon(1e-15));

    QuadIrr x(Rational(-3), Rational(2), 2);  // 2 sqrt2 - 3 < 0
    CHECK(x.sign() == -1);
    QuadIrr y(Rational(-1), Rational(1), 2);  // sqrt2 - 1 > 0
    CHECK(y.sign() == 1);
    CHECK((y < QuadIrr(Rational(0), Rational(1), 2)));

    QuadIrr diff = golden - golden;
    CHECK(diff.is_zero());

    // Perfect-square radicand folds into the rational part.
    QuadIrr nine(Rational(1), Rational(2), 9);
    CHECK(nine.is_rational());
    CHECK(nine.rat() == Rational(7));
}

TEST_CASE("QuadIrr floor is exact near integers") {
    QuadIrr s2(Rational(0), Rational(1), 2);
    CHECK(s2.floor().to_int64() == 1);
    CHECK((-s2).floor().to_int64() == -2);
    CHECK((s2 * s2).floor().to_int64() == 2);
    QuadIrr golden(Rational(1, 2), Rational(1, 2), 5);
    QuadIrr g13 = golden;
    for (int k = 1; k < 13; ++k) g13 = g13 * golden;
    // golden^13 = (521 + 233 sqrt5)/2 = 521.0019...
    CHECK(g13.floor().to_int64() == 521);
    CHECK(QuadIrr(Rational(-7, 2)).floor().to_int64() == -4);
}

TEST_CASE("QuadIrr inverse") {
    QuadIrr y(Rational(-1), Rational(1), 2);
    QuadIrr inv = y.inverse();  // 1/(sqrt2-1) = sqrt2+1
    CHECK(inv == QuadIrr(Rational(1), Rational(1), 2));
}
