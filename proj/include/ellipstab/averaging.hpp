#pragma once

#include <utility>
#include <vector>

#include <json.hpp>

#include "ellipstab/diophantine.hpp"
#include "ellipstab/polynomial.hpp"

namespace ellipstab::avg {

using nlohmann::json;

// l_omega = omega . I in complexified coordinates. Exact mode requires a
// rational omega (periodic vectors from the Dirichlet construction are).
template <class C>
Poly<C> l_omega(const dio::PeriodicVector& w, int n);

// omega.(a-b) for a monomial; exact zero test in exact mode, 1e-12 relative
// tolerance in float mode. Throws PeriodError unless T omega is integral.
bool is_resonant(const Monomial& m, int n, const dio::PeriodicVector& w, bool exact);

// Time average along the periodic flow: keeps exactly the monomials with
// omega.(a-b) = 0. A projection; commutes with the l_omega bracket.
template <class C>
Poly<C> periodic_average(const Poly<C>& f, const dio::PeriodicVector& w);

// Homotopy generator chi with {chi, l_omega} = f - [f]_omega, solved per
// monomial: chi_ab = f_ab / (i omega.(a-b)). The identity is re-verified
// exactly before returning (InternalError on failure: a build bug).
template <class C>
Poly<C> homotopy_generator(const Poly<C>& f, const dio::PeriodicVector& w);

// Coefficient-norm surrogate for the vector-field sup norm on the averaging
// domains: sum_k k ||f_k|| rho^(k-1), an over-estimate, so threshold checks
// that use it remain sufficient conditions.
template <class C>
double xfield_surrogate(const Poly<C>& f, double rho);

template <class C>
double gradient_surrogate(const Poly<C>& h_actions, double rhoI);
template <class C>
double hessian_surrogate(const Poly<C>& h_actions, double rhoI);

struct DomainParams {
    std::vector<double> z_anchor;  // 2n real coordinates
    double s = 0.0, r = 0.0, xi = 0.0;
    json to_json() const { return {{"z", z_anchor}, {"s", s}, {"r", r}, {"xi", xi}}; }
};

template <class C>
struct NormalFormDatum {
    int n = 0;
    int stage = 0;                             // j
    std::vector<dio::PeriodicVector> omegas;   // omega_0..omega_{stage-1}
    Poly<C> h;                                 // integrable part, n action variables
    Poly<C> g;                                 // resonant part, 2n complexified variables
    Poly<C> f;                                 // non-resonant part, 2n variables
    double eps = 0.0;                          // perturbation size at stage 0
    int m = 1;                                 // iteration count per stage
    double F = 0.0;                            // Hessian surrogate of h
    // Domain-aware running estimate of ||X_f||; negative means "use the
    // plain coefficient surrogate".
    double f_slice = -1.0;
    DomainParams domain;

    double f_norm(double rho) const;
};

struct StepLog {
    int iteration = 0;
    double norm_f_avg = 0.0;
    double norm_chi = 0.0;
    double norm_g_new = 0.0;
    double norm_f_old = 0.0;
    // Domain-aware estimate of the new remainder: per contribution, the
    // smaller of the materialized coefficient surrogate and the restricted-
    // domain bound (the full-ball surrogate cannot see that grad h - omega
    // is only small on the slice |I - I(z_j)| <= 3 s_j).
    double norm_f_new = 0.0;
    double norm_f_new_raw = 0.0;  // plain full-ball surrogate of the polynomial
    double contraction = 0.0;     // norm_f_new / norm_f_old (0 when f was 0)
    // Eq.-style threshold checks, all on surrogates.
    bool thr_geometry = false;    // s <= (r+2xi) xi
    bool thr_smallness = false;   // 2^j 216 (r+3xi) m T eps <= s
    bool thr_curvature = false;   // 72 (3F sqrt(n)+1) xi^-1 (r+3xi) m T s <= 1
    bool thresholds_ok = false;
    json to_json() const;
};

template <class C>
double NormalFormDatum<C>::f_norm(double rho) const {
    double raw = xfield_surrogate(f, rho);
    return f_slice >= 0.0 ? std::min(raw, f_slice) : raw;
}

// Checks the NF_j membership conditions: prior-stage commutation (exact),
// linear independence of the omegas, and the surrogate norm bounds.
template <class C>
struct NFCheck {
    bool commutation = true;
    bool independent = true;
    bool g_norm_ok = true;
    bool f_norm_ok = true;
    double g_surrogate = 0.0, g_bound = 0.0;
    double f_surrogate = 0.0, f_bound = 0.0;
    bool ok() const { return commutation && independent && g_norm_ok && f_norm_ok; }
};

template <class C>
NFCheck<C> check_nf(const NormalFormDatum<C>& datum);

// One averaging iteration: g <- g + [f], f <- Lie remainder of
// (h.I + g + f) o exp(ad_chi) minus (h.I + new g), truncated. Commutation
// with all prior l_omega (and the new one, for g) is asserted.
// With enforce_thresholds, a failed Eq.-(thr1) surrogate refuses by throwing
// ThresholdError naming the inequality.
template <class C>
std::pair<NormalFormDatum<C>, StepLog> averaging_step(const NormalFormDatum<C>& datum,
                                                      const dio::PeriodicVector& omega_next,
                                                      int working_degree,
                                                      bool enforce_thresholds = true);

template <class C>
struct NormalizeResult {
    std::vector<Poly<C>> generators;  // chi^0..chi^{m-1}: the Phi description
    NormalFormDatum<C> datum;         // advanced to stage j+1
    std::vector<StepLog> logs;
    double phi_distance_bound = 0.0;  // 2^{j+1} T_j eps
    bool final_bound_ok = true;       // f surrogate <= (j+1) 2^j 2^-m eps
    bool zj_ok = true;                // ||Pi_j grad h(I(z_j)) - omega_j|| <= s_j
};

// Proposition-6 stage bookkeeping: s+ = 2 sqrt(n-1)/(T_next Q), r+ = r + xi,
// xi+ = xi/3. The caller invokes it once the next periodic vector is known.
void advance_domain(DomainParams& d, double T_next, double Q, int n);

// m averaging iterations against omega_next, then the stage advance. When
// Q >= 1 the domain is advanced against omega_next's period; pass Q = 0 when
// the caller manages the domain (the confinement driver does).
template <class C>
NormalizeResult<C> normalize(const NormalFormDatum<C>& datum, const dio::PeriodicVector& omega_next,
                             int m, int working_degree, double Q = 0.0,
                             bool enforce_thresholds = true);

// Gradient of the action polynomial h at the action image of a phase point.
std::vector<double> grad_h_at(const PolyF& h_actions, const std::vector<double>& actions);
std::vector<double> actions_of(const std::vector<double>& z);

// Orthogonal projection onto the orthocomplement of span{omegas}.
std::vector<double> project_orthogonal(const std::vector<dio::PeriodicVector>& omegas,
                                       const std::vector<double>& v);

extern template Poly<ExactComplex> l_omega(const dio::PeriodicVector&, int);
extern template Poly<std::complex<double>> l_omega(const dio::PeriodicVector&, int);
extern template Poly<ExactComplex> periodic_average(const Poly<ExactComplex>&,
                                                    const dio::PeriodicVector&);
extern template Poly<std::complex<double>> periodic_average(const Poly<std::complex<double>>&,
                                                            const dio::PeriodicVector&);
extern template Poly<ExactComplex> homotopy_generator(const Poly<ExactComplex>&,
                                                      const dio::PeriodicVector&);
extern template Poly<std::complex<double>> homotopy_generator(const Poly<std::complex<double>>&,
                                                              const dio::PeriodicVector&);
extern template double xfield_surrogate(const Poly<ExactComplex>&, double);
extern template double xfield_surrogate(const Poly<std::complex<double>>&, double);
extern template NFCheck<ExactComplex> check_nf(const NormalFormDatum<ExactComplex>&);
extern template NFCheck<std::complex<double>> check_nf(const NormalFormDatum<std::complex<double>>&);
extern template std::pair<NormalFormDatum<ExactComplex>, StepLog> averaging_step(
    const NormalFormDatum<ExactComplex>&, const dio::PeriodicVector&, int, bool);
extern template std::pair<NormalFormDatum<std::complex<double>>, StepLog> averaging_step(
    const NormalFormDatum<std::complex<double>>&, const dio::PeriodicVector&, int, bool);
extern template NormalizeResult<ExactComplex> normalize(const NormalFormDatum<ExactComplex>&,
                                                        const dio::PeriodicVector&, int, int,
                                                        double, bool);
extern template NormalizeResult<std::complex<double>> normalize(
    const NormalFormDatum<std::complex<double>>&, const dio::PeriodicVector&, int, int, double,
    bool);

}  // namespace ellipstab::avg
