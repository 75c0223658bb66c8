#include "ellipstab/averaging.hpp"

#include <cmath>
#include <limits>

namespace ellipstab::avg {

namespace {

void check_period(const dio::PeriodicVector& w) {
    if (w.exact) {
        for (const auto& o : w.omega_exact)
            if (!(w.T_exact * o).is_integer())
                throw PeriodError("T omega is not an integer vector");
        return;
    }
    for (double o : w.omega) {
        double t = w.T * o;
        if (std::abs(t - std::round(t)) > 1e-12 * std::max(1.0, std::abs(t)))
            throw PeriodError("T omega is not an integer vector within 1e-12");
    }
}

Rational exact_phase(const Monomial& m, int n, const dio::PeriodicVector& w) {
    Rational s(0);
    for (int j = 0; j < n; ++j) {
        long long diff = static_cast<long long>(m.e[j]) - m.e[n + j];
        if (diff) s += w.omega_exact[j] * Rational(diff);
    }
    return s;
}

double float_phase(const Monomial& m, int n, const dio::PeriodicVector& w) {
    double s = 0.0;
    for (int j = 0; j < n; ++j)
        s += (static_cast<double>(m.e[j]) - m.e[n + j]) * w.omega[j];
    return s;
}

double omega_norm(const dio::PeriodicVector& w) {
    double s = 0.0;
    for (double o : w.omega) s += o * o;
    return std::sqrt(s);
}

template <class C>
C phase_divisor(const Monomial& m, int n, const dio::PeriodicVector& w);

template <>
ExactComplex phase_divisor<ExactComplex>(const Monomial& m, int n, const dio::PeriodicVector& w) {
    if (!w.exact)
        throw DomainError("exact averaging needs an exact (rational) periodic vector");
    return ExactComplex::i_unit() * ExactComplex(exact_phase(m, n, w));
}

template <>
std::complex<double> phase_divisor<std::complex<double>>(const Monomial& m, int n,
                                                         const dio::PeriodicVector& w) {
    return {0.0, float_phase(m, n, w)};
}

template <class C>
bool poly_small(const Poly<C>& p, double scale) {
    if constexpr (coeff_traits<C>::mode == Mode::exact) {
        (void)scale;
        return p.is_zero();
    } else {
        double s = 0.0;
        for (const auto& [m, c] : p.terms()) s += std::abs(c);
        return s <= 1e-9 * std::max(scale, 1.0);
    }
}

}  // namespace

bool is_resonant(const Monomial& m, int n, const dio::PeriodicVector& w, bool exact) {
    if (exact && w.exact) return exact_phase(m, n, w).is_zero();
    return std::abs(float_phase(m, n, w)) <= 1e-12 * std::max(1.0, omega_norm(w));
}

template <class C>
Poly<C> l_omega(const dio::PeriodicVector& w, int n) {
    Poly<C> p(2 * n);
    for (int j = 0; j < n; ++j) {
        Monomial m;
        m.e[j] = 1;
        m.e[n + j] = 1;
        if constexpr (coeff_traits<C>::mode == Mode::exact) {
            if (!w.exact)
                throw DomainError("exact averaging needs an exact (rational) periodic vector");
            p.add_term(m, ExactComplex::i_unit() * ExactComplex(w.omega_exact[j]));
        } else {
            p.add_term(m, std::complex<double>(0.0, w.omega[j]));
        }
    }
    return p;
}

template <class C>
Poly<C> periodic_average(const Poly<C>& f, const dio::PeriodicVector& w) {
    check_period(w);
    if (f.nvars() % 2 != 0) throw DimensionError("periodic_average: odd variable count");
    const int n = f.nvars() / 2;
    constexpr bool exact = coeff_traits<C>::mode == Mode::exact;
    Poly<C> r(f.nvars());
    if (f.truncation()) r.set_truncation(*f.truncation());
    for (const auto& [m, c] : f.terms())
        if (is_resonant(m, n, w, exact)) r.add_term(m, c);
    return r;
}

template <class C>
Poly<C> homotopy_generator(const Poly<C>& f, const dio::PeriodicVector& w) {
    check_period(w);
    if (f.nvars() % 2 != 0) throw DimensionError("homotopy_generator: odd variable count");
    const int n = f.nvars() / 2;
    constexpr bool exact = coeff_traits<C>::mode == Mode::exact;
    Poly<C> chi(f.nvars());
    if (f.truncation()) chi.set_truncation(*f.truncation());
    for (const auto& [m, c] : f.terms()) {
        if (is_resonant(m, n, w, exact)) continue;
        chi.add_term(m, c / phase_divisor<C>(m, n, w));
    }
    // {chi, l_omega} = f - [f], verified before returning.
    Poly<C> lhs = poisson_bracket(chi, l_omega<C>(w, n));
    Poly<C> rhs = f - periodic_average(f, w);
    double scale = 0.0;
    for (const auto& [m, c] : f.terms()) scale += coeff_traits<C>::abs(c);
    if (!poly_small(lhs - rhs, scale))
        throw InternalError("homotopy_generator: homological identity failed");
    return chi;
}

template <class C>
double xfield_surrogate(const Poly<C>& f, double rho) {
    double s = 0.0;
    for (const auto& [k, nrm] : f.norms_by_degree()) s += k * nrm * std::pow(rho, k - 1);
    return s;
}

template <class C>
double gradient_surrogate(const Poly<C>& h_actions, double rhoI) {
    double s = 0.0;
    for (const auto& [k, nrm] : h_actions.norms_by_degree()) s += k * nrm * std::pow(rhoI, k - 1);
    return s;
}

template <class C>
double hessian_surrogate(const Poly<C>& h_actions, double rhoI) {
    double s = 0.0;
    for (const auto& [k, nrm] : h_actions.norms_by_degree())
        if (k >= 2) s += k * (k - 1) * nrm * std::pow(rhoI, k - 2);
    return s;
}

json StepLog::to_json() const {
    return {{"iteration", iteration},
            {"norm_f_avg", norm_f_avg},
            {"norm_chi", norm_chi},
            {"norm_g_new", norm_g_new},
            {"norm_f_old", norm_f_old},
            {"norm_f_new", norm_f_new},
            {"norm_f_new_raw", norm_f_new_raw},
            {"contraction", contraction},
            {"thr_geometry", thr_geometry},
            {"thr_smallness", thr_smallness},
            {"thr_curvature", thr_curvature},
            {"thresholds_ok", thresholds_ok},
            {"surrogate", "coefficient-norm vector-field surrogate"}};
}

template <class C>
NFCheck<C> check_nf(const NormalFormDatum<C>& datum) {
    NFCheck<C> out;
    const int n = datum.n;
    double gscale = 0.0;
    for (const auto& [m, c] : datum.g.terms()) gscale += coeff_traits<C>::abs(c);
    for (const auto& w : datum.omegas) {
        Poly<C> lw = l_omega<C>(w, n);
        if (!poly_small(poisson_bracket(lw, datum.g), gscale)) out.commutation = false;
    }
    // Linear independence via Gram-Schmidt residuals.
    std::vector<std::vector<double>> basis;
    for (const auto& w : datum.omegas) {
        std::vector<double> v = w.omega;
        for (const auto& b : basis) {
            double dot = 0.0;
            for (int j = 0; j < n; ++j) dot += v[j] * b[j];
            for (int j = 0; j < n; ++j) v[j] -= dot * b[j];
        }
        double nr = 0.0;
        for (int j = 0; j < n; ++j) nr += v[j] * v[j];
        nr = std::sqrt(nr);
        if (nr < 1e-9 * std::max(1.0, omega_norm(w))) {
            out.independent = false;
            break;
        }
        for (int j = 0; j < n; ++j) v[j] /= nr;
        basis.push_back(v);
    }
    const double rho = datum.domain.r + 3 * datum.domain.xi;
    const int j = datum.stage;
    out.g_surrogate = xfield_surrogate(datum.g, rho);
    out.g_bound = std::pow(2.0, j) * datum.eps;
    out.g_norm_ok = out.g_surrogate <= out.g_bound * (1 + 1e-9);
    out.f_surrogate = datum.f_norm(rho);
    out.f_bound = j * std::pow(2.0, j - 1) * std::pow(2.0, -datum.m) * datum.eps;
    out.f_norm_ok = j == 0 ? datum.f.is_zero() || out.f_surrogate <= 1e-12
                           : out.f_surrogate <= out.f_bound * (1 + 1e-9);
    return out;
}

template <class C>
std::pair<NormalFormDatum<C>, StepLog> averaging_step(const NormalFormDatum<C>& datum,
                                                      const dio::PeriodicVector& omega_next,
                                                      int working_degree, bool enforce_thresholds) {
    using T = coeff_traits<C>;
    const int n = datum.n;
    const double r = datum.domain.r, xi = datum.domain.xi, s = datum.domain.s;
    const double rho = r + 3 * xi;
    const int j = datum.stage;

    StepLog log;
    log.thr_geometry = s <= (r + 2 * xi) * xi * (1 + 1e-12);
    log.thr_smallness =
        std::pow(2.0, j) * 216.0 * rho * datum.m * omega_next.T * datum.eps <= s * (1 + 1e-12);
    log.thr_curvature = 72.0 * (3 * datum.F * std::sqrt(static_cast<double>(n)) + 1) / xi * rho *
                            datum.m * omega_next.T * s <=
                        1 + 1e-12;
    log.thresholds_ok = log.thr_geometry && log.thr_smallness && log.thr_curvature;
    if (enforce_thresholds && !log.thresholds_ok) {
        std::string which = !log.thr_geometry    ? "s <= (r+2xi) xi"
                            : !log.thr_smallness ? "2^j 216 (r+3xi) m T eps <= s"
                                                 : "72 (3F sqrt(n)+1) xi^-1 (r+3xi) m T s <= 1";
        throw ThresholdError("averaging_step: threshold failed: " + which, which);
    }

    Poly<C> favg = periodic_average(datum.f, omega_next);
    Poly<C> chi = homotopy_generator(datum.f, omega_next);
    log.norm_f_avg = xfield_surrogate(favg, rho);
    log.norm_chi = xfield_surrogate(chi, rho);
    log.norm_f_old = datum.f_norm(rho);
    const double eps_f = log.norm_f_old;
    const double eps_g = xfield_surrogate(datum.g, rho);

    NormalFormDatum<C> out = datum;
    out.g = datum.g + favg;

    // Lie transform exp(ad_chi) with ad(P) = {P, chi}, applied separately to
    // the integrable part and to g + f. The new remainder splits as
    //   A = T(h.I) - h.I + (f - [f])   (the h chain; the l_omega bracket
    //                                   cancels the non-resonant part)
    //   B = (T(g) - g) + (T(f) - f)    (the small chains)
    // and new f = A + B exactly.
    auto lie = [&](const Poly<C>& p) {
        Poly<C> result = p.truncated(working_degree);
        Poly<C> term = result;
        for (long long k = 1; k <= working_degree; ++k) {
            term = poisson_bracket(term, chi)
                       .truncated(working_degree)
                       .scaled(T::from_rational(Rational(1, k)));
            if (term.is_zero()) break;
            result += term;
        }
        return result;
    };
    Poly<C> h_phase = substitute_actions(datum.h, ActionCoords::complexified);
    Poly<C> chain_a = lie(h_phase) - h_phase.truncated(working_degree) +
                      (datum.f - favg).truncated(working_degree);
    Poly<C> chain_b = lie(datum.g) - datum.g.truncated(working_degree) + lie(datum.f) -
                      datum.f.truncated(working_degree);
    out.f = chain_a + chain_b;

    // Domain-aware accounting: on the slice |I - I(z_j)| <= 3 s_j the h chain
    // obeys ||X_A|| <= 18 (3F sqrt(n)+1) xi^-1 rho m T s ||X_f||, and the
    // small chains ||X_B|| <= 18 rho m T s^-1 (e_g + e_f) ||X_f||. Either the
    // materialized surrogate or the restricted bound is a valid upper
    // estimate; take the smaller one per chain.
    const double mT = static_cast<double>(datum.m) * omega_next.T;
    double bound_a = 18.0 * (3 * datum.F * std::sqrt(static_cast<double>(n)) + 1) / xi * rho * mT *
                     s * eps_f;
    double bound_b = s > 0 ? 18.0 * rho * mT / s * (eps_g + eps_f) * eps_f
                           : std::numeric_limits<double>::infinity();
    double est_a = std::min(xfield_surrogate(chain_a, rho), bound_a);
    double est_b = std::min(xfield_surrogate(chain_b, rho), bound_b);
    out.f_slice = est_a + est_b;

    // Commutation assertions: g with every omega seen so far plus the new
    // one, f with the prior ones only.
    double scale = log.norm_f_old + xfield_surrogate(datum.g, rho) + 1.0;
    {
        Poly<C> lw = l_omega<C>(omega_next, n);
        if (!poly_small(poisson_bracket(lw, out.g), scale))
            throw InternalError("averaging_step: new resonant part fails to commute with l_omega");
    }
    for (const auto& w : datum.omegas) {
        Poly<C> lw = l_omega<C>(w, n);
        if (!poly_small(poisson_bracket(lw, out.g), scale))
            throw InternalError("averaging_step: resonant part lost prior-stage commutation");
        if (!poly_small(poisson_bracket(lw, out.f), scale))
            throw InternalError("averaging_step: remainder lost prior-stage commutation");
    }

    log.norm_g_new = xfield_surrogate(out.g, rho);
    log.norm_f_new_raw = xfield_surrogate(out.f, rho);
    log.norm_f_new = out.f_norm(rho);
    log.contraction = log.norm_f_old > 0 ? log.norm_f_new / log.norm_f_old : 0.0;
    return {std::move(out), log};
}

template <class C>
NormalizeResult<C> normalize(const NormalFormDatum<C>& datum, const dio::PeriodicVector& omega_next,
                             int m, int working_degree, double Q, bool enforce_thresholds) {
    const int n = datum.n;
    NormalizeResult<C> out;
    out.datum = datum;
    out.datum.m = m;

    // Eq.-(zj) membership: || Pi_j grad h(I(z_j)) - omega_j || <= s_j.
    if (!datum.domain.z_anchor.empty()) {
        std::vector<double> acts = actions_of(datum.domain.z_anchor);
        PolyF hf = [&] {
            if constexpr (coeff_traits<C>::mode == Mode::exact)
                return to_float(datum.h);
            else
                return datum.h;
        }();
        std::vector<double> grad = grad_h_at(hf, acts);
        std::vector<double> proj = project_orthogonal(datum.omegas, grad);
        double dist = 0.0;
        for (int j2 = 0; j2 < n; ++j2) {
            double d = proj[j2] - omega_next.omega[j2];
            dist += d * d;
        }
        out.zj_ok = std::sqrt(dist) <= datum.domain.s * (1 + 1e-9);
    }

    // Inner iteration state: the stage perturbation g_j is what gets
    // averaged (f^0 := g_j, g^0 := 0); the previous exponentially small
    // remainder f_j is transported through every transform but never
    // averaged, and rejoins the non-resonant slot at the stage advance.
    NormalFormDatum<C> inner = out.datum;
    inner.g = Poly<C>(2 * n);
    inner.f = datum.g;
    inner.f_slice = -1.0;
    const double rho0 = datum.domain.r + 3 * datum.domain.xi;
    Poly<C> carry = datum.f.truncated(working_degree);
    double carry_norm = datum.f_norm(rho0);

    for (int i = 0; i < m; ++i) {
        Poly<C> chi = homotopy_generator(inner.f, omega_next);
        auto [next, log] = averaging_step(inner, omega_next, working_degree, enforce_thresholds);
        log.iteration = i;
        inner = std::move(next);
        out.logs.push_back(log);
        if (!carry.is_zero()) {
            Poly<C> term = carry;
            for (long long k = 1; k <= working_degree; ++k) {
                term = poisson_bracket(term, chi)
                           .truncated(working_degree)
                           .scaled(coeff_traits<C>::from_rational(Rational(1, k)));
                if (term.is_zero()) break;
                carry += term;
            }
        }
        out.generators.push_back(std::move(chi));
    }
    // Transporting the carried remainder through the full composition costs
    // at most a factor 2 under the smallness threshold.
    carry_norm = std::min(2.0 * carry_norm, xfield_surrogate(carry, rho0));

    const int j = datum.stage;
    out.phi_distance_bound = std::pow(2.0, j + 1) * omega_next.T * datum.eps;

    out.datum.g = inner.g;
    out.datum.f = inner.f + carry;
    out.datum.f_slice = (inner.f_slice >= 0 ? inner.f_slice : xfield_surrogate(inner.f, rho0)) +
                        carry_norm;
    out.datum.stage = j + 1;
    out.datum.omegas.push_back(omega_next);
    if (Q >= 1.0) advance_domain(out.datum.domain, omega_next.T, Q, n);
    double rho = out.datum.domain.r + 3 * out.datum.domain.xi;
    double fbound = (j + 1) * std::pow(2.0, j) * std::pow(2.0, -m) * datum.eps;
    out.final_bound_ok = out.datum.f_norm(rho) <= fbound * (1 + 1e-9);
    return out;
}

void advance_domain(DomainParams& d, double T_next, double Q, int n) {
    d.s = 2 * std::sqrt(static_cast<double>(n - 1)) / (T_next * Q);
    d.r = d.r + d.xi;
    d.xi = d.xi / 3.0;
}

std::vector<double> actions_of(const std::vector<double>& z) {
    const int n = static_cast<int>(z.size()) / 2;
    std::vector<double> I(n);
    for (int j = 0; j < n; ++j) I[j] = 0.5 * (z[j] * z[j] + z[n + j] * z[n + j]);
    return I;
}

std::vector<double> grad_h_at(const PolyF& h_actions, const std::vector<double>& actions) {
    const int n = h_actions.nvars();
    std::vector<std::complex<double>> pt(actions.begin(), actions.end());
    std::vector<double> g(n);
    for (int j = 0; j < n; ++j) g[j] = h_actions.derivative(j).eval(pt).real();
    return g;
}

std::vector<double> project_orthogonal(const std::vector<dio::PeriodicVector>& omegas,
                                       const std::vector<double>& v) {
    std::vector<double> r = v;
    std::vector<std::vector<double>> basis;
    for (const auto& w : omegas) {
        std::vector<double> b = w.omega;
        for (const auto& prev : basis) {
            double dot = 0.0;
            for (std::size_t j = 0; j < b.size(); ++j) dot += b[j] * prev[j];
            for (std::size_t j = 0; j < b.size(); ++j) b[j] -= dot * prev[j];
        }
        double nr = 0.0;
        for (double x : b) nr += x * x;
        nr = std::sqrt(nr);
        if (nr < 1e-14) continue;
        for (double& x : b) x /= nr;
        basis.push_back(b);
    }
    for (const auto& b : basis) {
        double dot = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) dot += r[j] * b[j];
        for (std::size_t j = 0; j < r.size(); ++j) r[j] -= dot * b[j];
    }
    return r;
}

template Poly<ExactComplex> l_omega(const dio::PeriodicVector&, int);
template Poly<std::complex<double>> l_omega(const dio::PeriodicVector&, int);
template Poly<ExactComplex> periodic_average(const Poly<ExactComplex>&, const dio::PeriodicVector&);
template Poly<std::complex<double>> periodic_average(const Poly<std::complex<double>>&,
                                                     const dio::PeriodicVector&);
template Poly<ExactComplex> homotopy_generator(const Poly<ExactComplex>&,
                                               const dio::PeriodicVector&);
template Poly<std::complex<double>> homotopy_generator(const Poly<std::complex<double>>&,
                                                       const dio::PeriodicVector&);
template double xfield_surrogate(const Poly<ExactComplex>&, double);
template double xfield_surrogate(const Poly<std::complex<double>>&, double);
template double gradient_surrogate(const Poly<ExactComplex>&, double);
template double gradient_surrogate(const Poly<std::complex<double>>&, double);
template double hessian_surrogate(const Poly<ExactComplex>&, double);
template double hessian_surrogate(const Poly<std::complex<double>>&, double);
template NFCheck<ExactComplex> check_nf(const NormalFormDatum<ExactComplex>&);
template NFCheck<std::complex<double>> check_nf(const NormalFormDatum<std::complex<double>>&);
template std::pair<NormalFormDatum<ExactComplex>, StepLog> averaging_step(
    const NormalFormDatum<ExactComplex>&, const dio::PeriodicVector&, int, bool);
template std::pair<NormalFormDatum<std::complex<double>>, StepLog> averaging_step(
    const NormalFormDatum<std::complex<double>>&, const dio::PeriodicVector&, int, bool);
template NormalizeResult<ExactComplex> normalize(const NormalFormDatum<ExactComplex>&,
                                                 const dio::PeriodicVector&, int, int, double, bool);
template NormalizeResult<std::complex<double>> normalize(
    const NormalFormDatum<std::complex<double>>&, const dio::PeriodicVector&, int, int, double,
    bool);

}  // namespace ellipstab::avg
