#include <doctest.h>

#include <cmath>
#include <random>

#include "ellipstab/diophantine.hpp"

using namespace ellipstab;
using namespace ellipstab::dio;

namespace {

FrequencyVector golden_alpha() {
    return FrequencyVector::quadratic(
        {QuadIrr(Rational(1)), QuadIrr(Rational(1, 2), Rational(1, 2), 5)});
}
FrequencyVector sqrt2_alpha() {
    return FrequencyVector::quadratic({QuadIrr(Rational(1)), QuadIrr(Rational(0), Rational(1), 2)});
}
FrequencyVector golden_float() {
    return FrequencyVector::floating({1.0, (1.0 + std::sqrt(5.0)) / 2.0});
}

// Independent oracle: one exhaustive shell scan of min |k.alpha|, then the
// definition of Delta applied directly. No continued fractions involved.
long long delta_scan_oracle(const FrequencyVector& a, double x, int Kmax) {
    long long best = 0;
    double minabs = 1e300;
    for (int K = 1; K <= Kmax; ++K) {
        for_each_shell_rep(a.n(), K, [&](const std::vector<long long>& k) {
            double v = a.is_exact() ? a.dot_exact(k).abs().to_double()
                                    : std::abs(a.dot_double(k));
            minabs = std::min(minabs, v);
        });
        if (K / minabs <= x) best = K;
    }
    return best;
}

}  // namespace

TEST_CASE("psi examples") {
    CHECK(psi(golden_alpha(), 1).value == doctest::Approx(1.0).epsilon(1e-14));

    PsiResult r = psi(sqrt2_alpha(), 2);
    CHECK(r.value == doctest::Approx(std::sqrt(2.0) + 1.0).epsilon(1e-14));
    CHECK(r.minimizer == std::vector<long long>{1, -1});

    FrequencyVector res = FrequencyVector::rational({Rational(1), Rational(1, 2)});
    CHECK_THROWS_AS(psi(res, 3), ResonanceError);
    try {
        psi(res, 3);
    } catch (const ResonanceError& e) {
        CHECK(e.witness == std::vector<long long>{1, -2});
    }
}

TEST_CASE("psi is non-decreasing in K") {
    auto a = sqrt2_alpha();
    double prev = 0.0;
    for (int K = 1; K <= 15; ++K) {
        double v = psi(a, K).value;
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("psi float mode tracks exact mode to 1e-9 relative for K <= 20") {
    auto exact = golden_alpha();
    auto fl = golden_float();
    for (int K = 1; K <= 20; ++K) {
        double a = psi(exact, K).value, b = psi(fl, K).value;
        CHECK(std::abs(a - b) <= 1e-9 * a);
    }
}

TEST_CASE("delta examples and conventions") {
    auto a = sqrt2_alpha();
    double x1 = 1 * psi(a, 1).value;
    CHECK(delta(a, x1 * (1 + 1e-12)).value >= 1);
    CHECK(delta(a, 1e-12).value == 0);  // empty-set convention

    auto g = golden_alpha();
    CHECK(delta(g, 20.0).value == delta_scan_oracle(g, 20.0, 50));
}

TEST_CASE("continued-fraction fast path agrees with the brute-force scan") {
    auto g = golden_alpha();
    auto s = sqrt2_alpha();
    for (double x : {1.0, 2.5, 7.0, 20.0, 55.0, 200.0, 1234.5}) {
        CHECK(delta(g, x).value == delta_scan_oracle(g, x, 400));
        CHECK(delta(s, x).value == delta_scan_oracle(s, x, 400));
    }
}

TEST_CASE("fast path at large x satisfies the defining inequality") {
    // Brute force is infeasible here; check K Psi(K) <= x < (K+1) Psi(K+1)
    // with the float-mode psi as an independent evaluator.
    auto g = golden_alpha();
    auto gf = golden_float();
    double x = 2.0e7;
    long long K = delta(g, x).value;
    CHECK(K > 1000);
    double pk = psi(gf, static_cast<int>(K)).value;
    double pk1 = psi(gf, static_cast<int>(K) + 1).value;
    CHECK(static_cast<double>(K) * pk <= x * (1 + 1e-6));
    CHECK(static_cast<double>(K + 1) * pk1 > x * (1 - 1e-6));
}

TEST_CASE("delta at the exact threshold: Delta(K Psi(K)) >= K") {
    // The threshold is boundary-tight; evaluate just above it so double
    // rounding of x itself cannot flip the comparison.
    for (auto a : {golden_alpha(), sqrt2_alpha()}) {
        for (int K = 1; K <= 20; ++K) {
            double x = K * psi(a, K).value * (1 + 1e-12);
            CHECK(delta(a, x).value >= K);
        }
    }
}

TEST_CASE("delta is non-decreasing in x") {
    auto g = golden_alpha();
    long long prev = 0;
    for (double x = 0.5; x < 300.0; x *= 1.7) {
        long long v = delta(g, x).value;
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("delta reports resonance truncation") {
    FrequencyVector res = FrequencyVector::rational({Rational(1), Rational(1, 2)});
    DeltaResult r = delta(res, 100.0);
    CHECK(r.resonance_truncated);
    CHECK(r.resonance_witness == std::vector<long long>{1, -2});
}

TEST_CASE("diophantine_fit: golden stability, sqrt2 scan oracle, resonance") {
    auto g = golden_alpha();
    double g20 = diophantine_fit(g, 1.0, 20).gamma;
    double g30 = diophantine_fit(g, 1.0, 30).gamma;
    CHECK(g20 > 0.0);
    CHECK(std::abs(g30 - g20) <= 0.1 * g20);

    auto s = sqrt2_alpha();
    FitResult f = diophantine_fit(s, 1.0, 20);
    double best = 1e300;
    for (int K = 1; K <= 20; ++K) {
        for_each_shell_rep(2, K, [&](const std::vector<long long>& k) {
            double v = std::abs(k[0] * 1.0 + k[1] * std::sqrt(2.0)) * std::pow(K, 1.0);
            best = std::min(best, v);
        });
    }
    CHECK(f.gamma == doctest::Approx(best).epsilon(1e-9));

    FrequencyVector r12 = FrequencyVector::rational({Rational(1), Rational(2)});
    CHECK_THROWS_AS(diophantine_fit(r12, 1.0, 5), ResonanceError);
    try {
        diophantine_fit(r12, 1.0, 5);
    } catch (const ResonanceError& e) {
        CHECK(e.witness == std::vector<long long>{2, -1});
    }
}

TEST_CASE("deltadioph direction: Delta(x) >= (gamma x)^(1/(1+tau)) on samples") {
    auto g = golden_alpha();
    double gamma = diophantine_fit(g, 1.0, 30).gamma;
    for (double x : {5.0, 20.0, 100.0, 1000.0, 1e6}) {
        double lower = std::pow(gamma * x, 0.5);
        CHECK(static_cast<double>(delta(g, x).value) >= lower - 1.0);
    }
}

TEST_CASE("find_resonance examples") {
    FrequencyVector a = FrequencyVector::rational({Rational(1), Rational(1, 2)});
    auto w = find_resonance(a, 3);
    REQUIRE(w.has_value());
    CHECK(*w == std::vector<long long>{1, -2});

    CHECK(!find_resonance(sqrt2_alpha(), 10).has_value());

    // (2,3,5): the smallest resonance 2+3-5 has |k|_1 = 3, so K=2 finds none.
    FrequencyVector b = FrequencyVector::rational({Rational(2), Rational(3), Rational(5)});
    CHECK(!find_resonance(b, 2).has_value());
    auto w3 = find_resonance(b, 3);
    REQUIRE(w3.has_value());
    CHECK(*w3 == std::vector<long long>{1, 1, -1});
}

TEST_CASE("dirichlet_approx hand examples") {
    // v = (1, 1/2), Q = 2: q = 1, half rounds toward zero -> p = 0.
    PeriodicVector pv =
        dirichlet_approx(std::vector<Rational>{Rational(1), Rational(1, 2)}, Rational(2));
    CHECK(pv.omega_exact[0] == Rational(1));
    CHECK(pv.omega_exact[1] == Rational(0));
    CHECK(pv.T_exact == Rational(1));
    CHECK(pv.achieved == doctest::Approx(0.5));
    CHECK(pv.bound == doctest::Approx(0.5));

    // Already periodic: v = (3,0,0).
    PeriodicVector pw =
        dirichlet_approx(std::vector<Rational>{Rational(3), Rational(0), Rational(0)}, Rational(7));
    CHECK(pw.omega_exact[0] == Rational(3));
    CHECK(pw.omega_exact[1].is_zero());
    CHECK(pw.T_exact == Rational(1, 3));

    CHECK_THROWS_AS(dirichlet_approx(std::vector<Rational>{Rational(0), Rational(0)}, Rational(2)),
                    DomainError);
}

TEST_CASE("dirichlet_approx satisfies both Lemma 4 bounds on random inputs") {
    // The exact overload already asserts the bounds internally; this re-checks
    // them from the outside and exercises the float overload too.
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<long long> num(-50, 50);
    std::uniform_int_distribution<int> den(1, 20);
    std::uniform_int_distribution<int> dims(2, 4);
    std::uniform_real_distribution<double> qd(1.0, 5.0);
    for (int it = 0; it < 200; ++it) {
        int n = dims(rng);
        std::vector<Rational> v(n);
        bool nz = false;
        for (auto& c : v) {
            c = Rational(num(rng), den(rng));
            nz = nz || !c.is_zero();
        }
        if (!nz) v[0] = Rational(1);
        Rational Q(std::abs(num(rng)) % 7 + 2, 2);  // in [1, 4]
        PeriodicVector pv = dirichlet_approx(v, Q);

        double vn = 0.0;
        for (auto& c : v) vn += c.to_double() * c.to_double();
        vn = std::sqrt(vn);
        CHECK(pv.achieved <= pv.bound * (1 + 1e-12));
        CHECK(pv.T >= 1.0 / vn * (1 - 1e-12));
        CHECK(pv.T <=
              std::sqrt(static_cast<double>(n)) / vn * std::pow(Q.to_double(), n - 1) * (1 + 1e-12));

        // T omega integral, exactly; T minimal via gcd reduction.
        for (int j = 0; j < n; ++j) CHECK((pv.T_exact * pv.omega_exact[j]).is_integer());

        std::vector<double> vf(n);
        for (int j = 0; j < n; ++j) vf[j] = v[j].to_double();
        PeriodicVector pf = dirichlet_approx(vf, qd(rng));
        CHECK(pf.achieved <= pf.bound * (1 + 1e-9));
    }
}

TEST_CASE("frequency vector JSON round-trip and validation") {
    auto g = golden_alpha();
    FrequencyVector back = FrequencyVector::from_json(g.to_json());
    CHECK(back.n() == 2);
    CHECK(back.component(1) == doctest::Approx(g.component(1)));

    CHECK_THROWS_AS(FrequencyVector::rational({Rational(1), Rational(1)}), DomainError);
}
