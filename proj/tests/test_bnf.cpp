#include <doctest.h>

#include <algorithm>
#include <random>

#include "angle_average_oracle.hpp"
#include "ellipstab/bnf.hpp"
#include "test_util.hpp"

using namespace ellipstab;
using namespace ellipstab::bnf;
using namespace ellipstab::testutil;

namespace {

const ExactComplex kOne(Rational(1));

dio::FrequencyVector alpha1() { return dio::FrequencyVector::rational({Rational(1)}); }

// n = 1 oscillator (x^2+y^2)/2 + V, complexified.
PolyEx oscillator_plus(const PolyEx& V_real) {
    PolyEx h2(2);
    h2.add_term([] { Monomial m; m.e[0] = 2; return m; }(), ExactComplex(Rational(1, 2)));
    h2.add_term([] { Monomial m; m.e[1] = 2; return m; }(), ExactComplex(Rational(1, 2)));
    return complexify(h2 + V_real);
}

PolyEx x_power(int p) {
    PolyEx x = PolyEx::variable(2, 0, kOne);
    PolyEx r = PolyEx::constant(2, kOne);
    for (int i = 0; i < p; ++i) r = r * x;
    return r;
}

Rational action_coeff(const PolyEx& hm, int j) {
    Monomial m;
    m.e[0] = static_cast<std::uint8_t>(j);
    const ExactComplex* c = hm.coeff(m);
    if (!c) return Rational(0);
    REQUIRE(c->im.is_zero());
    REQUIRE(c->re2.is_zero());
    REQUIRE(c->im2.is_zero());
    return c->re;
}

}  // namespace

TEST_CASE("quartic oscillator: hm = (3/2) I^2 at K=4, exact") {
    auto res = birkhoff_normal_form(oscillator_plus(x_power(4)), alpha1(), 4);
    CHECK(action_coeff(res.hm, 2) == Rational(3, 2));
    CHECK(res.defect_norm == 0.0);
    // Angle-averaging oracle: <x^4> over the circle.
    FourierAction g = FourierAction::x_var() * FourierAction::x_var() * FourierAction::x_var() *
                      FourierAction::x_var();
    PolyEx avg = g.average().as_action_poly();
    CHECK(action_coeff(avg, 2) == Rational(3, 2));
}

TEST_CASE("quartic oscillator at K=6 matches the second-order averaging oracle exactly") {
    auto res = birkhoff_normal_form(oscillator_plus(x_power(4)), alpha1(), 6);
    FourierAction x = FourierAction::x_var();
    PolyEx oracle = second_order_average_oracle(x * x * x * x);
    CHECK(action_coeff(res.hm, 2) == action_coeff(oracle, 2));
    CHECK(action_coeff(res.hm, 3) == action_coeff(oracle, 3));
    CHECK(action_coeff(res.hm, 2) == Rational(3, 2));
}

TEST_CASE("cubic perturbation: two independent routes agree exactly at K=4") {
    auto res = birkhoff_normal_form(oscillator_plus(x_power(3)), alpha1(), 4);
    FourierAction x = FourierAction::x_var();
    PolyEx oracle = second_order_average_oracle(x * x * x);
    CHECK(action_coeff(res.hm, 2) == action_coeff(oracle, 2));
    CHECK(action_coeff(res.hm, 2) == Rational(-15, 4));
}

TEST_CASE("already integrable input passes through with zero generators") {
    // H = alpha.I + I1^2 in complexified coordinates.
    dio::FrequencyVector a = alpha1();
    PolyEx I1 = substitute_actions(PolyEx::variable(1, 0, kOne), ActionCoords::complexified);
    PolyEx H = linear_actions<ExactComplex>(a) + I1 * I1;
    auto res = birkhoff_normal_form(H, a, 4);
    CHECK(action_coeff(res.hm, 2) == Rational(1));
    for (const auto& [l, chi] : res.generators) CHECK(chi.is_zero());
    CHECK(res.defect_norm == 0.0);
}

TEST_CASE("float mode reproduces the exact coefficients to 1e-12") {
    PolyF H = to_float(oscillator_plus(x_power(4)));
    auto a = dio::FrequencyVector::floating({1.0});
    auto res = birkhoff_normal_form(H, a, 6);
    Monomial m2, m3;
    m2.e[0] = 2;
    m3.e[0] = 3;
    CHECK(res.hm.coeff(m2)->real() == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(res.hm.coeff(m3)->real() == doctest::Approx(-4.25).epsilon(1e-12));
}

TEST_CASE("defect is identically zero for random exact jets") {
    std::mt19937_64 rng(31);
    dio::FrequencyVector a2 = dio::FrequencyVector::rational({Rational(1), Rational(8, 13)});
    for (int it = 0; it < 6; ++it) {
        PolyEx pert = random_exact_poly(rng, 4, 6, 8).degree_range(3, 6);
        PolyEx H = linear_actions<ExactComplex>(a2) + complexify(pert);
        auto res = birkhoff_normal_form(H, a2, 6, 6);
        CHECK(res.defect_norm == 0.0);
        // Transformed jet minus model is exactly zero through K.
        PolyEx model = linear_actions<ExactComplex>(a2) + hm_as_phase(res);
        CHECK((res.transformed.degree_range(0, 6) - model.degree_range(0, 6)).is_zero());
    }
}

TEST_CASE("uniqueness: hm does not depend on term insertion order") {
    std::mt19937_64 rng(77);
    dio::FrequencyVector a2 = dio::FrequencyVector::rational({Rational(1), Rational(8, 13)});
    PolyEx pert = random_exact_poly(rng, 4, 6, 10).degree_range(3, 6);
    // Rebuild the same polynomial with shuffled insertion order.
    std::vector<std::pair<Monomial, ExactComplex>> terms(pert.terms().begin(), pert.terms().end());
    std::shuffle(terms.begin(), terms.end(), rng);
    PolyEx pert2(4);
    for (auto& [m, c] : terms) pert2.add_term(m, c);
    REQUIRE(pert2 == pert);
    auto r1 = birkhoff_normal_form(linear_actions<ExactComplex>(a2) + complexify(pert), a2, 6, 6);
    auto r2 = birkhoff_normal_form(linear_actions<ExactComplex>(a2) + complexify(pert2), a2, 6, 6);
    CHECK(r1.hm == r2.hm);
}

TEST_CASE("bnf_map: zero map, normal-form fixed point, triangular difference") {
    dio::FrequencyVector a2 = dio::FrequencyVector::rational({Rational(1), Rational(8, 13)});
    CHECK(bnf_map(PolyEx(4), a2, 6).is_zero());

    // Q already a function of actions: BNF returns Q itself (uniqueness).
    std::mt19937_64 rng(5);
    PolyEx Q(2);
    Q.add_term([] { Monomial m; m.e[0] = 2; return m; }(), ExactComplex(Rational(2, 3)));
    Q.add_term([] { Monomial m; m.e[0] = 1; m.e[1] = 1; return m; }(), ExactComplex(Rational(-1, 2)));
    Q.add_term([] { Monomial m; m.e[1] = 3; return m; }(), ExactComplex(Rational(1, 5)));
    PolyEx Qt = substitute_actions(Q, ActionCoords::real);
    CHECK(bnf_map(Qt, a2, 6) == Q);

    // Triangular structure: adding homogeneous Q_j shifts degree j by exactly
    // Q_j and leaves lower degrees unchanged.
    for (int j : {2, 3}) {
        PolyEx Ht = random_exact_poly(rng, 4, 6, 10).degree_range(3, 6);
        PolyEx Qj(2);
        if (j == 2) {
            Qj.add_term([] { Monomial m; m.e[0] = 1; m.e[1] = 1; return m; }(),
                        ExactComplex(Rational(3, 4)));
            Qj.add_term([] { Monomial m; m.e[1] = 2; return m; }(), ExactComplex(Rational(-2, 5)));
        } else {
            Qj.add_term([] { Monomial m; m.e[0] = 2; m.e[1] = 1; return m; }(),
                        ExactComplex(Rational(1, 3)));
            Qj.add_term([] { Monomial m; m.e[1] = 3; return m; }(), ExactComplex(Rational(5, 7)));
        }
        PolyEx sum = Ht + substitute_actions(Qj, ActionCoords::real);
        PolyEx diff = bnf_map(sum, a2, 6) - bnf_map(Ht, a2, 6);
        CHECK(diff.homogeneous_part(j) == Qj);
        for (int lower = 0; lower < j; ++lower) CHECK(diff.homogeneous_part(lower).is_zero());
    }
}

TEST_CASE("algebraic structure: hm coefficients are polynomial in a scale parameter") {
    // H_s = oscillator + s x^4: the I^2 coefficient is linear in s and the
    // I^3 coefficient quadratic. Interpolate from s = 1,2,3 and predict s = 5.
    auto hm_at = [&](long long s) {
        PolyEx V = x_power(4).scaled(ExactComplex(Rational(s)));
        return birkhoff_normal_form(oscillator_plus(V), alpha1(), 6).hm;
    };
    Rational c2[4], c3[4];
    long long ss[4] = {1, 2, 3, 5};
    for (int i = 0; i < 4; ++i) {
        PolyEx hm = hm_at(ss[i]);
        c2[i] = action_coeff(hm, 2);
        c3[i] = action_coeff(hm, 3);
    }
    // Lagrange through s=1,2,3 evaluated at 5, exactly.
    auto lagrange3 = [&](const Rational* y, long long at) {
        Rational s(at);
        Rational x1(1), x2(2), x3(3);
        Rational l1 = (s - x2) * (s - x3) / ((x1 - x2) * (x1 - x3));
        Rational l2 = (s - x1) * (s - x3) / ((x2 - x1) * (x2 - x3));
        Rational l3 = (s - x1) * (s - x2) / ((x3 - x1) * (x3 - x2));
        return y[0] * l1 + y[1] * l2 + y[2] * l3;
    };
    CHECK(lagrange3(c2, 5) == c2[3]);
    CHECK(lagrange3(c3, 5) == c3[3]);
}

TEST_CASE("resonant and malformed inputs are rejected") {
    dio::FrequencyVector res = dio::FrequencyVector::rational({Rational(1), Rational(1, 2)});
    PolyEx H = linear_actions<ExactComplex>(res);
    CHECK_THROWS_AS(birkhoff_normal_form(H, res, 4), ResonanceError);

    CHECK_THROWS_AS(birkhoff_normal_form(oscillator_plus(x_power(4)), alpha1(), 3), DomainError);

    PolyEx bad = oscillator_plus(x_power(4)).scaled(ExactComplex(Rational(2)));
    CHECK_THROWS_AS(birkhoff_normal_form(bad, alpha1(), 4), NormalizationError);
}

TEST_CASE("bnf_constants: formula instantiations") {
    const double e = std::exp(1.0);
    auto a = alpha1();
    // n=1, R=1/2, normH=1: c = 3e, d = 9 e^2.
    BNFConstants c1 = bnf_constants(1, 0.5, 1.0, a, 4, 2, 0);
    CHECK(c1.c == doctest::Approx(3 * e).epsilon(1e-15));
    CHECK(c1.d == doctest::Approx(9 * e * e).epsilon(1e-15));

    // rho_K for K=4, alpha=(1,sqrt2): formula composition with Psi(4).
    auto s2 = dio::FrequencyVector::quadratic(
        {QuadIrr(Rational(1)), QuadIrr(Rational(0), Rational(1), 2)});
    BNFConstants c2 = bnf_constants(2, 0.5, 1.0, s2, 4, 2, 0);
    double psi4 = dio::psi(s2, 4).value;
    CHECK(c2.rhoK == doctest::Approx(1.0 / (548.0 * 2 * c2.c * c2.d * 4 * psi4)).epsilon(1e-12));

    // beta(2) = 6^{-1} (6cd)^2 2! psi^3.
    CHECK(c2.beta_p ==
          doctest::Approx(std::pow(6 * c2.c * c2.d, 2) * 2.0 * c2.psi_powers[3] / 6.0)
              .epsilon(1e-12));

    CHECK_THROWS_AS(bnf_constants(1, 0.5, 1.0, a, 4, 3, 0), DomainError);  // 2p > K
    CHECK_THROWS_AS(bnf_constants(1, 0.5, 1.0, a, 4, 2, 1), DomainError);  // q > K-4
}

TEST_CASE("per-degree coefficient bounds hold on the quartic oscillator") {
    auto a = alpha1();
    for (int K : {4, 6, 8}) {
        PolyEx H = oscillator_plus(x_power(4));
        auto res = birkhoff_normal_form(H, a, K);
        double R = 0.5;
        double normH = H.sup_norm_bound(R);
        BNFConstants consts = bnf_constants(1, R, normH, a, K, 2, 0);
        DGReport rep = verify_dg_bounds(res, consts);
        REQUIRE(rep.applicable);
        CHECK(rep.all_ok);
        for (const auto& entry : rep.entries) CHECK(entry.margin >= 1.0);
    }
}

TEST_CASE("per-degree coefficient bounds on a random n=2 instance with alpha=(1,sqrt2)") {
    auto s2 = dio::FrequencyVector::quadratic(
        {QuadIrr(Rational(1)), QuadIrr(Rational(0), Rational(1), 2)});
    std::mt19937_64 rng(13);
    PolyEx pert = random_exact_poly(rng, 4, 6, 6, 1)
                      .degree_range(3, 6)
                      .scaled(ExactComplex(Rational(1, 100)));
    PolyEx H = linear_actions<ExactComplex>(s2) + complexify(pert);
    auto res = birkhoff_normal_form(H, s2, 6);
    double R = 0.25;
    double normH = H.sup_norm_bound(R);
    BNFConstants consts = bnf_constants(2, R, normH, s2, 6, 2, 0);
    DGReport rep = verify_dg_bounds(res, consts);
    REQUIRE(rep.applicable);
    CHECK(rep.all_ok);
}

TEST_CASE("inapplicable inputs are flagged, not silently checked") {
    auto a = alpha1();
    PolyEx H = oscillator_plus(x_power(4));
    auto res = birkhoff_normal_form(H, a, 4);
    // Deliberately undersized normH makes the analyticity precondition fail.
    BNFConstants consts = bnf_constants(1, 0.5, 1e-9, a, 4, 2, 0);
    DGReport rep = verify_dg_bounds(res, consts);
    CHECK(!rep.applicable);
    CHECK(!rep.reason.empty());
}
