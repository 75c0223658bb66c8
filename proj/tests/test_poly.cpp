#include <doctest.h>

#include <random>

#include "ellipstab/poly_json.hpp"
#include "ellipstab/polynomial.hpp"
#include "test_util.hpp"

using namespace ellipstab;
using namespace ellipstab::testutil;

namespace {
const ExactComplex kOne(Rational(1));
const ExactComplex kI = ExactComplex::i_unit();
}  // namespace

TEST_CASE("canonical pair bracket: {xi1, xi2} = 1") {
    PolyEx xi1 = PolyEx::variable(2, 0, kOne);
    PolyEx xi2 = PolyEx::variable(2, 1, kOne);
    PolyEx b = poisson_bracket(xi1, xi2);
    CHECK(b == PolyEx::constant(2, kOne));
}

TEST_CASE("bracket antisymmetry: {P,P} = 0 for random P") {
    std::mt19937_64 rng(42);
    for (int it = 0; it < 20; ++it) {
        PolyEx p = random_exact_poly(rng, 4, 5, 12);
        CHECK(poisson_bracket(p, p).is_zero());
    }
}

TEST_CASE("homological eigenvalue identity: {i a xi1 xi2, xi1^a xi2^b}") {
    // {i alpha xi1 xi2, xi^(a,b)} = i alpha (b-a) xi^(a,b); this is the oracle
    // the normal-form solve divides by.
    for (long long num = -3; num <= 3; ++num) {
        if (!num) continue;
        Rational alpha(num, 2);
        PolyEx h2 = monomial_poly(2, {1, 1}, kI * ExactComplex(alpha));
        for (int a = 0; a <= 3; ++a) {
            for (int b = 0; b <= 3; ++b) {
                PolyEx mono = monomial_poly(2, {a, b}, kOne);
                PolyEx got = poisson_bracket(h2, mono);
                PolyEx want = mono.scaled(kI * ExactComplex(alpha * Rational(b - a)));
                CHECK(got == want);
            }
        }
    }
}

TEST_CASE("poly_norm examples") {
    PolyEx p(2);
    p.add_term([] { Monomial m; m.e[0] = 1; return m; }(), ExactComplex(Rational(2)));
    p.add_term([] { Monomial m; m.e[1] = 1; return m; }(), ExactComplex(Rational(3)));
    CHECK(p.norm(1) == doctest::Approx(5.0));
    CHECK(PolyEx(2).norm(3) == 0.0);

    PolyEx s = PolyEx::variable(2, 0, kOne) + PolyEx::variable(2, 1, kOne);
    CHECK((s * s).norm(2) == doctest::Approx(4.0));
}

TEST_CASE("complexify: quadratic actions, linear, quartic, round-trip") {
    // (x^2+y^2)/2 -> i xi1 xi2
    PolyEx h(2);
    h.add_term([] { Monomial m; m.e[0] = 2; return m; }(), ExactComplex(Rational(1, 2)));
    h.add_term([] { Monomial m; m.e[1] = 2; return m; }(), ExactComplex(Rational(1, 2)));
    CHECK(complexify(h) == monomial_poly(2, {1, 1}, kI));

    // x -> (xi1 + i xi2)/sqrt2
    PolyEx x = PolyEx::variable(2, 0, kOne);
    PolyEx cx = complexify(x);
    PolyEx want(2);
    want.add_term([] { Monomial m; m.e[0] = 1; return m; }(), ExactComplex::inv_sqrt2());
    want.add_term([] { Monomial m; m.e[1] = 1; return m; }(), kI * ExactComplex::inv_sqrt2());
    CHECK(cx == want);

    // x^4 -> (xi1 + i xi2)^4 / 4
    PolyEx x4 = x * x * x * x;
    PolyEx lin(2);
    lin.add_term([] { Monomial m; m.e[0] = 1; return m; }(), kOne);
    lin.add_term([] { Monomial m; m.e[1] = 1; return m; }(), kI);
    PolyEx expected = (lin * lin * lin * lin).scaled(ExactComplex(Rational(1, 4)));
    CHECK(complexify(x4) == expected);

    // Round-trip identity on random real polynomials, exactly.
    std::mt19937_64 rng(7);
    for (int it = 0; it < 15; ++it) {
        PolyEx p = random_exact_poly(rng, 4, 6, 10);
        CHECK(complexify_inverse(complexify(p)) == p);
        CHECK(complexify(complexify_inverse(p)) == p);
    }
}

TEST_CASE("substitute_actions examples") {
    PolyEx q1 = PolyEx::variable(1, 0, kOne);  // Q = I1
    CHECK(substitute_actions(q1, ActionCoords::complexified) == monomial_poly(2, {1, 1}, kI));

    PolyEx q2 = q1 * q1;  // I1^2, real coords
    PolyEx half_r2(2);
    half_r2.add_term([] { Monomial m; m.e[0] = 2; return m; }(), ExactComplex(Rational(1, 2)));
    half_r2.add_term([] { Monomial m; m.e[1] = 2; return m; }(), ExactComplex(Rational(1, 2)));
    CHECK(substitute_actions(q2, ActionCoords::real) == half_r2 * half_r2);

    // Q = I1 I2 (n=2, complex): i*i = -1
    PolyEx q3 = PolyEx::variable(2, 0, kOne) * PolyEx::variable(2, 1, kOne);
    CHECK(substitute_actions(q3, ActionCoords::complexified) ==
          monomial_poly(4, {1, 1, 1, 1}, -kOne));

    // Degree doubles.
    CHECK(substitute_actions(q2, ActionCoords::real).max_degree() == 4);
}

TEST_CASE("sup_norm_bound examples and random-point domination") {
    PolyEx xi1 = PolyEx::variable(2, 0, kOne);
    CHECK(xi1.sup_norm_bound(2.0) == doctest::Approx(2.0));

    PolyEx p2 = monomial_poly(2, {2, 0}, kOne) + monomial_poly(2, {0, 2}, kOne);
    CHECK(p2.sup_norm_bound(1.0) == doctest::Approx(2.0));

    PolyEx p3 = monomial_poly(2, {1, 0}, ExactComplex(Rational(3))) + monomial_poly(2, {1, 1}, kOne);
    CHECK(p3.sup_norm_bound(0.5) == doctest::Approx(1.75));

    CHECK_THROWS_AS(p3.sup_norm_bound(0.0), DomainError);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int it = 0; it < 5; ++it) {
        PolyEx p = random_exact_poly(rng, 3, 5, 10);
        double rho = 0.8;
        double bound = p.sup_norm_bound(rho);
        for (int pt = 0; pt < 100; ++pt) {
            std::vector<std::complex<double>> z(3);
            double norm2 = 0.0;
            for (auto& zi : z) {
                zi = u(rng);
                norm2 += std::norm(zi);
            }
            double scale = rho / std::max(1e-12, std::sqrt(norm2)) * std::abs(u(rng));
            for (auto& zi : z) zi *= scale;
            CHECK(std::abs(p.eval(z)) <= bound * (1 + 1e-12) + 1e-12);
        }
    }
}

TEST_CASE("Jacobi identity holds exactly") {
    std::mt19937_64 rng(1234);
    for (int it = 0; it < 10; ++it) {
        PolyEx p = random_exact_poly(rng, 4, 5, 8);
        PolyEx q = random_exact_poly(rng, 4, 5, 8);
        PolyEx r = random_exact_poly(rng, 4, 5, 8);
        PolyEx s = poisson_bracket(p, poisson_bracket(q, r)) +
                   poisson_bracket(q, poisson_bracket(r, p)) +
                   poisson_bracket(r, poisson_bracket(p, q));
        CHECK(s.is_zero());
    }
}

TEST_CASE("Leibniz rule holds exactly") {
    std::mt19937_64 rng(555);
    for (int it = 0; it < 10; ++it) {
        PolyEx p = random_exact_poly(rng, 4, 4, 8);
        PolyEx q = random_exact_poly(rng, 4, 4, 8);
        PolyEx r = random_exact_poly(rng, 4, 4, 8);
        PolyEx lhs = poisson_bracket(p, q * r);
        PolyEx rhs = poisson_bracket(p, q) * r + q * poisson_bracket(p, r);
        CHECK(lhs == rhs);
    }
}

TEST_CASE("norm subadditivity and homogeneous submultiplicativity") {
    std::mt19937_64 rng(77);
    for (int it = 0; it < 20; ++it) {
        PolyEx p = random_homogeneous(rng, 3, 3, 6);
        PolyEx q = random_homogeneous(rng, 3, 4, 6);
        double tol = 1e-9;
        CHECK((p + q).norm(3) <= p.norm(3) + q.norm(3) + tol);
        CHECK((p * q).norm(7) <= p.norm(3) * q.norm(4) + tol);
    }
}

TEST_CASE("truncation is enforced on products") {
    PolyEx x = PolyEx::variable(2, 0, kOne);
    PolyEx p = x * x;
    p.set_truncation(3);
    PolyEx q = p * p;  // degree 4 exceeds the carried truncation
    CHECK(q.is_zero());
    CHECK(q.truncation().value() == 3);
}

TEST_CASE("mismatched nvars raise a dimension error") {
    PolyEx a(2), b(4);
    CHECK_THROWS_AS(poisson_bracket(a, b), DimensionError);
    CHECK_THROWS_AS(complexify(PolyEx(3)), DimensionError);
}

TEST_CASE("canonical JSON round-trip is bit exact") {
    std::mt19937_64 rng(99);
    for (int it = 0; it < 10; ++it) {
        PolyEx p = complexify(random_exact_poly(rng, 4, 5, 9));
        json j = to_json(p);
        PolyEx back = exact_poly_from_json(j);
        CHECK(back == p);
        CHECK(to_json(back).dump() == j.dump());
    }

    PolyF f(2);
    f.add_term([] { Monomial m; m.e[0] = 2; return m; }(), {0.5, -1.25});
    json jf = to_json(f);
    PolyF fb = float_poly_from_json(jf);
    CHECK(to_json(fb).dump() == jf.dump());
}

TEST_CASE("float mode prunes relative to same-degree scale") {
    PolyF p(2);
    p.add_term([] { Monomial m; m.e[0] = 2; return m; }(), {1.0, 0.0});
    p.add_term([] { Monomial m; m.e[1] = 2; return m; }(), {1e-20, 0.0});
    p.prune();
    CHECK(p.term_count() == 1);
}
