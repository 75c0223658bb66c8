#pragma once

#include <map>
#include <vector>

#include "ellipstab/diophantine.hpp"
#include "ellipstab/polynomial.hpp"

namespace ellipstab::bnf {

// Embeds a frequency component into the coefficient type. Exact mode hosts
// rationals and Q(sqrt2) values; anything else needs float mode.
template <class C>
C embed_frequency(const dio::FrequencyVector& alpha, int j);

template <>
inline ExactComplex embed_frequency<ExactComplex>(const dio::FrequencyVector& alpha, int j) {
    if (!alpha.is_exact())
        throw DomainError("exact normal form needs an exact frequency vector");
    const QuadIrr& q = alpha.exact_component(j);
    if (q.is_rational()) return ExactComplex(q.rat());
    if (q.d() == 2) return ExactComplex(q.rat(), Rational(0), q.coef(), Rational(0));
    throw DomainError("exact normal form hosts frequencies in Q(sqrt2); use float mode for "
                      "radicand " + std::to_string(q.d()));
}

template <>
inline std::complex<double> embed_frequency<std::complex<double>>(const dio::FrequencyVector& alpha,
                                                                  int j) {
    return {alpha.component(j), 0.0};
}

// alpha . I in complexified coordinates: sum_j i alpha_j xi_j xi_{n+j}.
template <class C>
Poly<C> linear_actions(const dio::FrequencyVector& alpha) {
    const int n = alpha.n();
    Poly<C> h2(2 * n);
    for (int j = 0; j < n; ++j) {
        Monomial m;
        m.e[j] = 1;
        m.e[n + j] = 1;
        h2.add_term(m, coeff_traits<C>::i() * embed_frequency<C>(alpha, j));
    }
    return h2;
}

// exp(ad_chi) with ad_chi(P) = {chi, P}, truncated at `trunc`. Terminates
// because chi has no terms below degree 3, so each bracket raises the degree.
template <class C>
Poly<C> lie_transform(const Poly<C>& p, const Poly<C>& chi, int trunc) {
    Poly<C> result = p.truncated(trunc);
    Poly<C> term = result;
    for (long long k = 1; k <= trunc; ++k) {
        term = poisson_bracket(chi, term).truncated(trunc)
                   .scaled(coeff_traits<C>::from_rational(Rational(1, k)));
        if (term.is_zero()) break;
        result += term;
    }
    return result;
}

template <class C>
struct BNFResult {
    int n = 0;
    int K = 0;
    int working_degree = 0;
    Poly<C> hm;                         // action polynomial in n variables
    std::map<int, Poly<C>> generators;  // degree l -> chi_l, l = 3..K
    Poly<C> transformed;                // full transformed jet, degrees 2..working
    std::vector<int> remainder_degrees;
    std::map<int, double> input_norms;  // per-degree norms of the input jet
    double defect_norm = 0.0;           // max |coeff| of the defect at degrees <= K
};

// Degree-by-degree Birkhoff normalization of a jet in complexified
// coordinates whose quadratic part is alpha . I. The generator coefficient on
// xi^(a,b) is coeff/(i alpha.(b-a)) and the transform is exp(ad_chi).
template <class C>
BNFResult<C> birkhoff_normal_form(const Poly<C>& H, const dio::FrequencyVector& alpha, int K,
                                  int working_degree = -1);

// BNF_K as a map P_3(2n,K) -> P_2(n, K/2) on real-coordinate jets: prepends
// alpha . I, complexifies, normalizes, returns the action polynomial.
template <class C>
Poly<C> bnf_map(const Poly<C>& Hk_real, const dio::FrequencyVector& alpha, int K);

// Quantitative ledger of the normal-form estimates: c, d, rho_K, the psi
// products, and the derived beta / btilde constants.
struct BNFConstants {
    int n = 0;
    double R = 0.0;
    double normH = 0.0;
    int K = 0;
    double c = 0.0;
    double d = 0.0;
    double rhoK = 0.0;
    double psiK = 0.0;                  // Psi_alpha(K)
    std::vector<double> psi_values;     // Psi_alpha(i), index i (0,0 unused up to 2)
    std::vector<double> psi_powers;     // psi_alpha^j = prod_{i=3..j} Psi(i); psi^2 = 1
    int p = 0, q = 0;
    double beta_p = 0.0;
    double btilde_q = 0.0;
    double log_btilde_q = 0.0;          // natural log, safe for large q
};

BNFConstants bnf_constants(int n, double R, double normH, const dio::FrequencyVector& alpha, int K,
                           int p, int q);

// Margin report for the per-degree normal-form bounds ||h_k|| and ||f_k||.
struct DGReport {
    bool applicable = true;
    std::string reason;
    struct Entry {
        int k = 0;
        bool is_remainder = false;
        double actual = 0.0;
        double bound = 0.0;
        double margin = 0.0;  // bound / actual; infinity when actual == 0
    };
    std::vector<Entry> entries;
    bool all_ok = true;
};

template <class C>
DGReport verify_dg_bounds(const BNFResult<C>& result, const BNFConstants& consts);

// The action polynomial of the transformed jet, lifted back to phase space.
template <class C>
Poly<C> hm_as_phase(const BNFResult<C>& result) {
    return substitute_actions(result.hm, ActionCoords::complexified);
}

extern template BNFResult<ExactComplex> birkhoff_normal_form(const Poly<ExactComplex>&,
                                                             const dio::FrequencyVector&, int, int);
extern template BNFResult<std::complex<double>> birkhoff_normal_form(
    const Poly<std::complex<double>>&, const dio::FrequencyVector&, int, int);
extern template Poly<ExactComplex> bnf_map(const Poly<ExactComplex>&, const dio::FrequencyVector&,
                                           int);
extern template Poly<std::complex<double>> bnf_map(const Poly<std::complex<double>>&,
                                                   const dio::FrequencyVector&, int);
extern template DGReport verify_dg_bounds(const BNFResult<ExactComplex>&, const BNFConstants&);
extern template DGReport verify_dg_bounds(const BNFResult<std::complex<double>>&,
                                          const BNFConstants&);

}  // namespace ellipstab::bnf
