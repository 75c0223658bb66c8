#include <doctest.h>

#include <random>

#include "ellipstab/kernels.hpp"

using namespace ellipstab;
using namespace ellipstab::kernels;

namespace {

PolyF random_real_poly(std::mt19937_64& rng, int nvars, int max_degree, int terms) {
    std::uniform_real_distribution<double> cd(-2.0, 2.0);
    std::uniform_int_distribution<int> deg(0, max_degree);
    std::uniform_int_distribution<int> var(0, nvars - 1);
    PolyF p(nvars);
    for (int t = 0; t < terms; ++t) {
        Monomial m;
        int d = deg(rng);
        for (int k = 0; k < d; ++k) m.e[var(rng)] += 1;
        p.add_term(m, {cd(rng), 0.0});
    }
    return p;
}

}  // namespace

TEST_CASE("compiled evaluation matches the polynomial evaluator") {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> xd(-1.5, 1.5);
    for (int it = 0; it < 10; ++it) {
        int nvars = 2 + static_cast<int>(rng() % 4);
        PolyF p = random_real_poly(rng, nvars, 6, 12);
        CompiledPoly cp = CompiledPoly::from_poly(p);
        for (int pt = 0; pt < 20; ++pt) {
            std::vector<double> x(nvars);
            std::vector<std::complex<double>> z(nvars);
            for (int v = 0; v < nvars; ++v) {
                x[v] = xd(rng);
                z[v] = x[v];
            }
            double ref = p.eval(z).real();
            CHECK(cp.eval(x.data()) == doctest::Approx(ref).epsilon(1e-12));
        }
    }
}

TEST_CASE("scalar and dispatched batch kernels agree on random batches") {
    std::mt19937_64 rng(405);
    std::uniform_real_distribution<double> xd(-1.2, 1.2);
    for (int it = 0; it < 8; ++it) {
        int nvars = 2 + static_cast<int>(rng() % 3);
        PolyF p = random_real_poly(rng, nvars, 7, 15);
        CompiledPoly cp = CompiledPoly::from_poly(p);
        CompiledGradient cg = CompiledGradient::from_poly(p);
        std::size_t count = 257;  // odd tail exercises the remainder loop
        std::vector<double> xs(nvars * count);
        for (auto& v : xs) v = xd(rng);

        std::vector<double> ref(count), got(count);
        eval_batch_scalar(cp, xs.data(), count, ref.data());
        force_isa(Isa::avx2);
        eval_batch(cp, xs.data(), count, got.data());
        for (std::size_t i = 0; i < count; ++i) {
            CHECK(got[i] == doctest::Approx(ref[i]).epsilon(1e-12));
        }

        std::vector<double> gref(count), ggot(count);
        grad_norm2_batch_scalar(cg, xs.data(), count, gref.data());
        grad_norm2_batch(cg, xs.data(), count, ggot.data());
        for (std::size_t i = 0; i < count; ++i) {
            CHECK(ggot[i] == doctest::Approx(gref[i]).epsilon(1e-11));
        }
        force_isa(Isa::scalar);
        eval_batch(cp, xs.data(), count, got.data());
        for (std::size_t i = 0; i < count; ++i) CHECK(got[i] == ref[i]);
    }
}

TEST_CASE("gradient components are the analytic partial derivatives") {
    PolyF p(2);
    // p = 3 x^2 y + y^3
    p.add_term([] { Monomial m; m.e[0] = 2; m.e[1] = 1; return m; }(), {3.0, 0.0});
    p.add_term([] { Monomial m; m.e[1] = 3; return m; }(), {1.0, 0.0});
    CompiledGradient g = CompiledGradient::from_poly(p);
    double x[2] = {0.7, -1.3};
    double out[2];
    g.eval(x, out);
    CHECK(out[0] == doctest::Approx(6 * 0.7 * -1.3).epsilon(1e-14));
    CHECK(out[1] == doctest::Approx(3 * 0.7 * 0.7 + 3 * 1.3 * 1.3).epsilon(1e-14));
}

TEST_CASE("complex coefficients are rejected") {
    PolyF p(2);
    p.add_term([] { Monomial m; m.e[0] = 1; return m; }(), {1.0, 0.5});
    CHECK_THROWS_AS(CompiledPoly::from_poly(p), DomainError);
}

TEST_CASE("runtime dispatch reports a usable instruction set") {
    Isa isa = detected_isa();
    CHECK((isa == Isa::scalar || isa == Isa::avx2));
    CHECK(!isa_name(isa).empty());
}
