#include <doctest.h>

#include <cmath>
#include <random>

#include "ellipstab/steepness.hpp"

using namespace ellipstab;
using namespace ellipstab::steep;

namespace {

PolyF action_poly(int n, std::initializer_list<std::pair<std::vector<int>, double>> terms) {
    PolyF p(n);
    for (const auto& [exps, c] : terms) {
        Monomial m;
        for (std::size_t v = 0; v < exps.size(); ++v) m.e[v] = static_cast<std::uint8_t>(exps[v]);
        p.add_term(m, {c, 0.0});
    }
    return p;
}

PolyF sum_of_squares(int n) {
    PolyF p(n);
    for (int v = 0; v < n; ++v) {
        Monomial m;
        m.e[v] = 2;
        p.add_term(m, {1.0, 0.0});
    }
    return p;
}

SubspaceSample line(double x, double y) {
    SubspaceSample s;
    s.n = 2;
    s.l = 1;
    double nr = std::sqrt(x * x + y * y);
    s.basis = {x / nr, y / nr};
    return s;
}

GridSpec coarse_grid() { return {1e-3, 0.5, 64}; }

}  // namespace

TEST_CASE("margin curves: closed forms") {
    std::vector<double> grid = log_grid(coarse_grid());

    // Isotropic convex: margin = 2 xi on any line.
    PolyF iso = sum_of_squares(2);
    MarginCurve c1 = margin_curve(iso, line(0.3, -0.9), grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(c1.margin[i] == doctest::Approx(2 * grid[i]).epsilon(1e-10));

    // Null direction of the saddle: margin identically zero.
    PolyF saddle = action_poly(2, {{{2, 0}, 1.0}, {{0, 2}, -1.0}});
    MarginCurve c2 = margin_curve(saddle, line(1, 1), grid);
    for (double v : c2.margin) CHECK(v == doctest::Approx(0.0).epsilon(1e-14));

    // P = I1^2 + I2^3 on span(0,1): 3 xi^2, increasing inner min.
    PolyF mixed = action_poly(2, {{{2, 0}, 1.0}, {{0, 3}, 1.0}});
    MarginCurve c3 = margin_curve(mixed, line(0, 1), grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(c3.margin[i] == doctest::Approx(3 * grid[i] * grid[i]).epsilon(1e-10));
}

TEST_CASE("margin curve is non-decreasing and scales linearly") {
    std::vector<double> grid = log_grid(coarse_grid());
    PolyF mixed = action_poly(2, {{{2, 0}, 1.0}, {{1, 1}, 0.5}, {{0, 3}, 1.0}});
    MarginCurve c = margin_curve(mixed, line(0.6, 0.8), grid);
    for (std::size_t i = 1; i < c.margin.size(); ++i) CHECK(c.margin[i] >= c.margin[i - 1]);

    PolyF scaled = mixed.scaled({3.0, 0.0});
    MarginCurve cs = margin_curve(scaled, line(0.6, 0.8), grid);
    for (std::size_t i = 0; i < c.margin.size(); ++i)
        CHECK(cs.margin[i] == doctest::Approx(3 * c.margin[i]).epsilon(1e-12));
}

TEST_CASE("rotation invariance of margin curves") {
    std::vector<double> grid = log_grid({1e-2, 0.5, 32});
    PolyF P = action_poly(2, {{{2, 0}, 1.0}, {{0, 2}, 2.0}, {{1, 2}, 0.7}});
    double th = 0.61;
    double ct = std::cos(th), st = std::sin(th);
    // P o U with U = rotation by th.
    std::vector<PolyF> images;
    {
        PolyF u1(2), u2(2);
        Monomial m1, m2;
        m1.e[0] = 1;
        m2.e[1] = 1;
        u1.add_term(m1, {ct, 0.0});
        u1.add_term(m2, {-st, 0.0});
        u2.add_term(m1, {st, 0.0});
        u2.add_term(m2, {ct, 0.0});
        images = {u1, u2};
    }
    PolyF PU = P.substitute(images);
    // Lambda' = U^T Lambda for Lambda = span(a).
    double a1 = 0.28, a2 = 0.96;
    SubspaceSample lam = line(a1, a2);
    SubspaceSample lamU = line(ct * a1 + st * a2, -st * a1 + ct * a2);
    MarginCurve c1 = margin_curve(P, lam, grid);
    MarginCurve c2 = margin_curve(PU, lamU, grid);
    for (std::size_t i = 0; i < c1.margin.size(); ++i)
        CHECK(c2.margin[i] == doctest::Approx(c1.margin[i]).epsilon(1e-8));
}

TEST_CASE("domain errors") {
    PolyF p = sum_of_squares(2);
    SubspaceSample bad;
    bad.n = 2;
    bad.l = 2;  // l must be <= n-1
    bad.basis = {1, 0, 0, 1};
    CHECK_THROWS_AS(margin_curve(p, bad, log_grid(coarse_grid())), DomainError);

    PolyF affine(2);
    affine.add_term(Monomial{}, {1.0, 0.0});
    CHECK_THROWS_AS(margin_curve(affine, line(1, 0), log_grid(coarse_grid())), DomainError);
}

TEST_CASE("certify_steep: convex sums of squares at p = 1, C in [1,2]") {
    for (int n : {2, 3}) {
        SteepnessCertificate cert = certify_steep(sum_of_squares(n), coarse_grid(), 4, 7, 2);
        REQUIRE(cert.verdict == Verdict::certified);
        for (int pl : cert.p) CHECK(pl == 1);
        CHECK(cert.C >= 1.0);
        CHECK(cert.C <= 2.0);
    }
}

TEST_CASE("certify_steep refutes the saddle with a diagonal witness") {
    PolyF saddle = action_poly(2, {{{2, 0}, 1.0}, {{0, 2}, -1.0}});
    SteepnessCertificate cert = certify_steep(saddle, coarse_grid(), 6, 11, 2);
    REQUIRE(cert.verdict == Verdict::refuted);
    REQUIRE(cert.witness.has_value());
    double b1 = cert.witness->basis[0], b2 = cert.witness->basis[1];
    double ang1 = std::acos(std::min(1.0, std::abs((b1 + b2) / std::sqrt(2.0))));
    double ang2 = std::acos(std::min(1.0, std::abs((b1 - b2) / std::sqrt(2.0))));
    CHECK(std::min(ang1, ang2) <= 1e-3);
    // Stored witness reproduces the degenerate margin.
    MarginCurve wcurve = margin_curve(saddle, *cert.witness, log_grid(coarse_grid()));
    for (double v : wcurve.margin) CHECK(v <= 1e-10);
}

TEST_CASE("certify_steep fits the coordinate index p = 2 for I1^2 + I2^3") {
    PolyF mixed = action_poly(2, {{{2, 0}, 1.0}, {{0, 3}, 1.0}});
    SteepnessCertificate cert = certify_steep(mixed, coarse_grid(), 4, 3, 2);
    REQUIRE(cert.verdict == Verdict::certified);
    CHECK(cert.p[0] == 2);
    // The span(0,1) evidence curve matches 3 xi^2 to 1%.
    bool found = false;
    for (const auto& ev : cert.evidence) {
        if (ev.sample.l != 1) continue;
        if (std::abs(ev.sample.basis[0]) < 1e-12 && std::abs(std::abs(ev.sample.basis[1]) - 1) < 1e-12) {
            found = true;
            for (std::size_t i = 0; i < ev.curve.xi.size(); ++i) {
                double want = 3 * ev.curve.xi[i] * ev.curve.xi[i];
                CHECK(std::abs(ev.curve.margin[i] - want) <= 0.01 * want);
            }
        }
    }
    CHECK(found);
}

TEST_CASE("positive-definite quadratic forms: C within [lambda_min, 2 lambda_max]") {
    std::mt19937_64 rng(99);
    // A = R D R^T with eigenvalues 0.5 and 2.0, rotated.
    double th = 0.8, c = std::cos(th), s = std::sin(th);
    double lmin = 0.5, lmax = 2.0;
    double a11 = lmin * c * c + lmax * s * s;
    double a22 = lmin * s * s + lmax * c * c;
    double a12 = (lmax - lmin) * s * c;
    PolyF quad = action_poly(2, {{{2, 0}, a11}, {{0, 2}, a22}, {{1, 1}, 2 * a12}});
    SteepnessCertificate cert = certify_steep(quad, coarse_grid(), 6, 5, 2);
    REQUIRE(cert.verdict == Verdict::certified);
    CHECK(cert.p[0] == 1);
    CHECK(cert.C >= lmin);
    CHECK(cert.C <= 2 * lmax);
}

TEST_CASE("certify_stably_steep: convex plus small cubic at exponent m-1 = 2") {
    PolyF p = sum_of_squares(2);
    // small cubic tail
    Monomial m3;
    m3.e[0] = 3;
    p.add_term(m3, {0.05, 0.0});
    SteepnessCertificate cert = certify_stably_steep(p, 1e-3, 4, coarse_grid(), 3, 13, 2);
    REQUIRE(cert.verdict == Verdict::certified);
    for (int pl : cert.p) CHECK(pl == 2);  // exponent fixed at m-1
    CHECK(cert.C > 0.0);
    CHECK(cert.stable_radius == doctest::Approx(1e-3));
}

TEST_CASE("certify_stably_steep refutes saddles and the harmonic product") {
    PolyF saddle = action_poly(2, {{{2, 0}, 1.0}, {{0, 2}, -1.0}});
    CHECK(certify_stably_steep(saddle, 1e-6, 2, coarse_grid(), 3, 17, 2).verdict ==
          Verdict::refuted);

    // P = I1 I2: identically zero on span(1,0); caught by the coordinate scan.
    PolyF prod = action_poly(2, {{{1, 1}, 1.0}});
    SteepnessCertificate cert = certify_stably_steep(prod, 1e-6, 0, coarse_grid(), 2, 19, 2);
    CHECK(cert.verdict == Verdict::refuted);
}

TEST_CASE("certify_stably_expanding closed forms") {
    // Q = y1^2 + y2^2: C near 2.
    SteepnessCertificate a =
        certify_stably_expanding(sum_of_squares(2), 1e-4, 3, coarse_grid(), 23);
    REQUIRE(a.verdict == Verdict::certified);
    CHECK(a.C == doctest::Approx(2.0).epsilon(0.05));

    // Q = y1^2 - y2^2: ||grad|| = 2 eta on the sphere; expanding though not
    // steep as a restriction target.
    PolyF saddle = action_poly(2, {{{2, 0}, 1.0}, {{0, 2}, -1.0}});
    SteepnessCertificate b = certify_stably_expanding(saddle, 1e-4, 3, coarse_grid(), 29);
    REQUIRE(b.verdict == Verdict::certified);
    CHECK(b.C == doctest::Approx(2.0).epsilon(0.05));

    // Q = y1 y2: ||grad|| = eta, C near 1.
    PolyF prod = action_poly(2, {{{1, 1}, 1.0}});
    SteepnessCertificate c = certify_stably_expanding(prod, 1e-4, 3, coarse_grid(), 31);
    REQUIRE(c.verdict == Verdict::certified);
    CHECK(c.C == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("taylor transfer constants") {
    SteepnessCertificate base;
    base.verdict = Verdict::certified;
    base.C = 0.8;
    base.delta = 0.25;
    base.stable_radius = 0.01;
    // varpi = 1, M = 1, p = 3: kappa = 1/2, C = C0/2, delta* = C0/4.
    TaylorConstants t = taylor_steepness_constants(1.0, 1.0, 3, base, 1.0);
    CHECK(t.kappa == doctest::Approx(0.5));
    CHECK(t.C == doctest::Approx(0.4));
    CHECK(t.delta_star == doctest::Approx(0.2));
    CHECK(t.mu_star == doctest::Approx(0.01));

    SteepnessCertificate doubled = base;
    doubled.C = 1.6;
    TaylorConstants t2 = taylor_steepness_constants(1.0, 1.0, 3, doubled, 1.0);
    CHECK(t2.C == doctest::Approx(2 * t.C));
    CHECK(t2.delta_star == doctest::Approx(2 * t.delta_star));

    SteepnessCertificate bad;
    bad.verdict = Verdict::refuted;
    CHECK_THROWS_AS(taylor_steepness_constants(1.0, 1.0, 3, bad, 1.0), DomainError);
}

TEST_CASE("certificate JSON round-trip") {
    SteepnessCertificate cert = certify_steep(sum_of_squares(2), {1e-2, 0.5, 16}, 2, 3, 1);
    json j = cert.to_json();
    SteepnessCertificate back = SteepnessCertificate::from_json(j);
    CHECK(back.verdict == cert.verdict);
    CHECK(back.C == doctest::Approx(cert.C));
    CHECK(back.p == cert.p);
    CHECK(j.contains("caveat"));
}
