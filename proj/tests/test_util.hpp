#pragma once

#include <random>

#include "ellipstab/polynomial.hpp"

namespace ellipstab::testutil {

inline PolyEx random_exact_poly(std::mt19937_64& rng, int nvars, int max_degree, int nterms,
                                long long coeff_range = 5) {
    std::uniform_int_distribution<long long> cd(-coeff_range, coeff_range);
    std::uniform_int_distribution<int> den(1, 3);
    std::uniform_int_distribution<int> deg(0, max_degree);
    PolyEx p(nvars);
    for (int t = 0; t < nterms; ++t) {
        Monomial m;
        int d = deg(rng);
        for (int k = 0; k < d; ++k) {
            std::uniform_int_distribution<int> var(0, nvars - 1);
            m.e[var(rng)] += 1;
        }
        p.add_term(m, ExactComplex(Rational(cd(rng), den(rng)), Rational(cd(rng), den(rng))));
    }
    return p;
}

// Homogeneous random polynomial of exact degree d.
inline PolyEx random_homogeneous(std::mt19937_64& rng, int nvars, int d, int nterms,
                                 long long coeff_range = 5) {
    std::uniform_int_distribution<long long> cd(-coeff_range, coeff_range);
    std::uniform_int_distribution<int> var(0, nvars - 1);
    PolyEx p(nvars);
    for (int t = 0; t < nterms; ++t) {
        Monomial m;
        for (int k = 0; k < d; ++k) m.e[var(rng)] += 1;
        p.add_term(m, ExactComplex(Rational(cd(rng), 2), Rational(cd(rng), 2)));
    }
    return p;
}

inline PolyEx monomial_poly(int nvars, std::initializer_list<int> exps, ExactComplex c) {
    PolyEx p(nvars);
    Monomial m;
    int v = 0;
    for (int e : exps) m.e[v++] = static_cast<std::uint8_t>(e);
    p.add_term(m, c);
    return p;
}

}  // namespace ellipstab::testutil
