#include "ellipstab/bnf.hpp"

#include <cmath>
#include <limits>

namespace ellipstab::bnf {

namespace {

// Splits a 2n-variable exponent into (a, b) and reports whether a == b.
bool is_resonant_monomial(const Monomial& m, int n) {
    for (int j = 0; j < n; ++j)
        if (m.e[j] != m.e[n + j]) return false;
    return true;
}

template <class C>
C homological_divisor(const Monomial& m, const dio::FrequencyVector& alpha) {
    // i alpha.(b - a)
    const int n = alpha.n();
    C s = coeff_traits<C>::zero();
    for (int j = 0; j < n; ++j) {
        long long diff = static_cast<long long>(m.e[n + j]) - m.e[j];
        if (diff) s += coeff_traits<C>::mul_int(embed_frequency<C>(alpha, j), diff);
    }
    return coeff_traits<C>::i() * s;
}

template <class C>
void check_quadratic_part(const Poly<C>& H, const dio::FrequencyVector& alpha) {
    const Poly<C> h2 = H.degree_range(0, 2);
    const Poly<C> want = linear_actions<C>(alpha);
    if constexpr (coeff_traits<C>::mode == Mode::exact) {
        if (!(h2 == want))
            throw NormalizationError(
                "quadratic part must equal alpha . I in complexified coordinates");
    } else {
        Poly<C> diff = h2 - want;
        double scale = std::max(1e-300, want.norm(2));
        if (diff.norm(0) + diff.norm(1) + diff.norm(2) > 1e-12 * scale)
            throw NormalizationError(
                "quadratic part must equal alpha . I in complexified coordinates");
    }
}

// Action polynomial from the resonant monomials: c xi^(a,a) = c (-i)^{|a|} I^a.
template <class C>
void accumulate_resonant(const Poly<C>& part, int n, Poly<C>& hm) {
    using T = coeff_traits<C>;
    const C minus_i = -T::i();
    for (const auto& [m, c] : part.terms()) {
        if (!is_resonant_monomial(m, n)) continue;
        Monomial act;
        int total = 0;
        for (int j = 0; j < n; ++j) {
            act.e[j] = m.e[j];
            total += m.e[j];
        }
        C f = T::one();
        for (int t = 0; t < total % 4; ++t) f = f * minus_i;
        hm.add_term(act, c * f);
    }
}

}  // namespace

template <class C>
BNFResult<C> birkhoff_normal_form(const Poly<C>& H, const dio::FrequencyVector& alpha, int K,
                                  int working_degree) {
    if (K < 4) throw DomainError("K must be >= 4");
    if (H.nvars() % 2 != 0) throw DimensionError("birkhoff_normal_form: odd variable count");
    const int n = H.nvars() / 2;
    if (alpha.n() != n) throw DimensionError("birkhoff_normal_form: alpha dimension mismatch");
    const int W = working_degree < 0 ? K + 4 : working_degree;
    if (W < K) throw DomainError("working degree must be >= K");

    if (auto k = dio::find_resonance(alpha, K))
        throw ResonanceError("alpha resonant up to order K", *k);
    if (!H.degree_range(0, 1).is_zero())
        throw NormalizationError("jet must have vanishing constant and linear parts");
    check_quadratic_part(H, alpha);

    BNFResult<C> out;
    out.n = n;
    out.K = K;
    out.working_degree = W;
    out.input_norms = H.truncated(W).norms_by_degree();

    Poly<C> jet = H.truncated(W);
    out.hm = Poly<C>(n);
    for (int l = 3; l <= K; ++l) {
        const Poly<C> part = jet.homogeneous_part(l);
        Poly<C> chi(2 * n);
        for (const auto& [m, c] : part.terms()) {
            if (is_resonant_monomial(m, n)) continue;
            chi.add_term(m, c / homological_divisor<C>(m, alpha));
        }
        // Non-resonance forces a = b monomials to even degree.
        if (l % 2 == 1 && chi.term_count() != part.term_count())
            throw InternalError("odd-degree resonant monomial under a non-resonant frequency");
        out.generators.emplace(l, chi);
        if (!chi.is_zero()) jet = lie_transform(jet, chi, W);

        // The degree-l slice must now be resonant-only.
        const Poly<C> slice = jet.homogeneous_part(l);
        Poly<C> residue(2 * n);
        for (const auto& [m, c] : slice.terms())
            if (!is_resonant_monomial(m, n)) residue.add_term(m, c);
        if constexpr (coeff_traits<C>::mode == Mode::exact) {
            if (!residue.is_zero())
                throw InternalError("homological solve left a non-resonant residue");
        } else {
            double scale = std::max(part.norm(l), 1.0);
            if (residue.norm(l) > 1e-9 * scale)
                throw InternalError("homological solve left a non-resonant residue (float)");
        }
        accumulate_resonant(slice, n, out.hm);
    }

    out.transformed = jet;
    for (int l = K + 1; l <= W; ++l)
        if (!jet.homogeneous_part(l).is_zero()) out.remainder_degrees.push_back(l);

    // Normal-form defect through degree K.
    Poly<C> model = linear_actions<C>(alpha) + hm_as_phase(out);
    Poly<C> defect = (jet.degree_range(0, K) - model.degree_range(0, K));
    double dn = 0.0;
    for (const auto& [m, c] : defect.terms()) dn = std::max(dn, coeff_traits<C>::abs(c));
    out.defect_norm = dn;
    return out;
}

template <class C>
Poly<C> bnf_map(const Poly<C>& Hk_real, const dio::FrequencyVector& alpha, int K) {
    if (K < 4) throw DomainError("K must be >= 4");
    if (K % 2 != 0) throw DomainError("bnf_map: K must be even");
    if (!Hk_real.degree_range(0, 2).is_zero())
        throw DomainError("bnf_map: input must have vanishing parts of degree <= 2");
    Poly<C> H = linear_actions<C>(alpha) + complexify(Hk_real.truncated(K));
    return birkhoff_normal_form(H, alpha, K, K + 4).hm;
}

BNFConstants bnf_constants(int n, double R, double normH, const dio::FrequencyVector& alpha, int K,
                           int p, int q) {
    if (n < 1 || !(R > 0.0) || !(normH > 0.0)) throw DomainError("bnf_constants: need n>=1, R>0, normH>0");
    if (K < 4) throw DomainError("K must be >= 4");
    if (p < 2 || 2 * p > K) throw DomainError("bnf_constants: need 2 <= p and 2p <= K");
    if (q < 0 || q > K - 4) throw DomainError("bnf_constants: need 0 <= q <= K-4");

    BNFConstants out;
    out.n = n;
    out.R = R;
    out.normH = normH;
    out.K = K;
    out.p = p;
    out.q = q;
    const double e = std::exp(1.0);
    out.c = e * (2 * n + 1) / (2 * R);
    out.d = std::pow(e * (2 * n + 1), 2) * normH / (4 * R * R);

    const int imax = std::max({K, 2 * p - 1, q + 2});
    out.psi_values.assign(imax + 1, 0.0);
    out.psi_powers.assign(imax + 1, 0.0);
    if (imax >= 2) out.psi_powers[2] = 1.0;
    for (int i = 1; i <= imax; ++i) {
        out.psi_values[i] = dio::psi(alpha, i).value;
        if (i >= 3) out.psi_powers[i] = out.psi_powers[i - 1] * out.psi_values[i];
    }
    out.psiK = out.psi_values[K];
    out.rhoK = 1.0 / (548.0 * n * out.c * out.d * K * out.psiK);

    auto factorial = [](int m) {
        double f = 1.0;
        for (int i = 2; i <= m; ++i) f *= i;
        return f;
    };
    out.beta_p = std::pow(6 * out.c * out.d, 2 * p - 2) * factorial(2 * p - 2) *
                 out.psi_powers[2 * p - 1] / 6.0;
    out.btilde_q = out.d / out.c * std::pow(20 * out.c * out.d, q) * factorial(q + 2) *
                   out.psi_powers[q + 2];
    out.log_btilde_q = std::log(out.d / out.c) + q * std::log(20 * out.c * out.d) +
                       std::lgamma(q + 3.0) + std::log(out.psi_powers[q + 2]);
    return out;
}

template <class C>
DGReport verify_dg_bounds(const BNFResult<C>& result, const BNFConstants& consts) {
    DGReport rep;
    const double c = consts.c, d = consts.d;

    // Precondition: ||H_l|| <= c^{l-2} d on every input degree.
    for (const auto& [l, nrm] : result.input_norms) {
        if (l < 2) continue;
        if (nrm > std::pow(c, l - 2) * d * (1 + 1e-9)) {
            rep.applicable = false;
            rep.reason = "input norm at degree " + std::to_string(l) +
                         " exceeds c^(l-2) d; bounds inapplicable";
            return rep;
        }
    }

    auto factorial = [](int m) {
        double f = 1.0;
        for (int i = 2; i <= m; ++i) f *= i;
        return f;
    };

    const int K = result.K;
    for (int k = 4; k <= K; k += 2) {
        DGReport::Entry e;
        e.k = k;
        e.actual = result.hm.norm(k / 2);
        e.bound = std::pow(6 * c * d, k - 2) * factorial(k - 2) * consts.psi_powers[k - 1] / 6.0;
        e.margin = e.actual == 0.0 ? std::numeric_limits<double>::infinity() : e.bound / e.actual;
        rep.all_ok = rep.all_ok && e.margin >= 1.0;
        rep.entries.push_back(e);
    }
    for (int k : result.remainder_degrees) {
        DGReport::Entry e;
        e.k = k;
        e.is_remainder = true;
        e.actual = result.transformed.norm(k);
        e.bound = 20 * d * d * std::pow(20 * c * d, k - 2) * factorial(K - 3) *
                  std::pow(K - 2, k - K + 2) * consts.psi_powers[K - 1] *
                  std::pow(consts.psiK, k - K + 2);
        e.margin = e.actual == 0.0 ? std::numeric_limits<double>::infinity() : e.bound / e.actual;
        rep.all_ok = rep.all_ok && e.margin >= 1.0;
        rep.entries.push_back(e);
    }
    return rep;
}

template BNFResult<ExactComplex> birkhoff_normal_form(const Poly<ExactComplex>&,
                                                      const dio::FrequencyVector&, int, int);
template BNFResult<std::complex<double>> birkhoff_normal_form(const Poly<std::complex<double>>&,
                                                              const dio::FrequencyVector&, int,
                                                              int);
template Poly<ExactComplex> bnf_map(const Poly<ExactComplex>&, const dio::FrequencyVector&, int);
template Poly<std::complex<double>> bnf_map(const Poly<std::complex<double>>&,
                                            const dio::FrequencyVector&, int);
template DGReport verify_dg_bounds(const BNFResult<ExactComplex>&, const BNFConstants&);
template DGReport verify_dg_bounds(const BNFResult<std::complex<double>>&, const BNFConstants&);

}  // namespace ellipstab::bnf
