#include "ellipstab/nekho.hpp"

#include <cmath>
#include <limits>

#include "ellipstab/kernels.hpp"

namespace ellipstab::nekho {

namespace {

double pair_sup_norm(const std::vector<double>& z) {
    const int n = static_cast<int>(z.size()) / 2;
    double m = 0.0;
    for (int j = 0; j < n; ++j)
        m = std::max(m, std::sqrt(z[j] * z[j] + z[n + j] * z[n + j]));
    return m;
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Dense LU solve with partial pivoting, for the Newton systems (size <= 16).
bool lu_solve(std::vector<double> A, std::vector<double> b, int n, std::vector<double>& x) {
    std::vector<int> piv(n);
    for (int i = 0; i < n; ++i) piv[i] = i;
    for (int col = 0; col < n; ++col) {
        int best = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A[r * n + col]) > std::abs(A[best * n + col])) best = r;
        if (std::abs(A[best * n + col]) < 1e-300) return false;
        if (best != col) {
            for (int c = 0; c < n; ++c) std::swap(A[col * n + c], A[best * n + c]);
            std::swap(b[col], b[best]);
        }
        for (int r = col + 1; r < n; ++r) {
            double f = A[r * n + col] / A[col * n + col];
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
            b[r] -= f * b[col];
        }
    }
    x.assign(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int c = r + 1; c < n; ++c) s -= A[r * n + c] * x[c];
        x[r] = s / A[r * n + r];
    }
    return true;
}

}  // namespace

json SteepParams::to_json() const {
    return {{"kappa", kappa}, {"C", C}, {"delta", delta}, {"p", p}, {"E", E}, {"F", F}};
}

SteepParams SteepParams::from_json(const json& j) {
    SteepParams s;
    s.kappa = j.at("kappa").get<double>();
    s.C = j.at("C").get<double>();
    s.delta = j.at("delta").get<double>();
    s.p = j.at("p").get<std::vector<int>>();
    s.E = j.at("E").get<double>();
    s.F = j.at("F").get<double>();
    return s;
}

double pi_jk(const std::vector<int>& p, int n, int j, int k) {
    // prod over n-j <= i <= n-j+k-1 of p_i, empty product = 1.
    double prod = 1.0;
    for (int i = n - j; i <= n - j + k - 1; ++i) {
        if (i < 1 || i > n - 1) throw DomainError("pi_jk: index out of range");
        prod *= p[i - 1];
    }
    return prod;
}

double a_jk(const std::vector<int>& p, int n, int j, int k) {
    double s = 0.0;
    for (int i = 0; i <= k; ++i) s += pi_jk(p, n, j, i);
    return s;
}

NekhoConstants compute_constants(int n, const SteepParams& steep) {
    if (n < 2) throw DomainError("compute_constants: n must be >= 2");
    if (static_cast<int>(steep.p.size()) != n - 1)
        throw DomainError("compute_constants: need indices p_1..p_{n-1}");
    for (int pl : steep.p)
        if (pl < 1) throw DomainError("compute_constants: indices must be >= 1");
    if (!(steep.kappa > 0) || !(steep.C > 0) || !(steep.delta > 0) || !(steep.E > 0))
        throw DomainError("compute_constants: steepness data must be positive");

    NekhoConstants out;
    out.n = n;
    out.steep = steep;
    const auto& p = steep.p;
    out.a = a_jk(p, n, n - 1, n - 1);
    out.a_prime = a_jk(p, n, n - 2, n - 2);

    const double kappa = steep.kappa, C = steep.C, E = steep.E, F = steep.F;
    const double Fp = steep.Fprime();
    const double sn = std::sqrt(static_cast<double>(n));
    const double sn1 = std::sqrt(static_cast<double>(n - 1));

    out.mu.resize(n - 1);
    for (int j = 0; j <= n - 2; ++j)
        out.mu[j] = C / 5.0 * std::pow(16.0, -p[n - j - 2]);  // p_{n-j-1}, 0-indexed
    out.nu.resize(n);
    for (int j = 0; j <= n - 1; ++j) {
        double v = 1.0;
        for (int i = 0; i <= j - 1; ++i) v *= std::pow(out.mu[i], pi_jk(p, n, j, j - 1 - i));
        out.nu[j] = v;
    }
    out.eta = std::numeric_limits<double>::infinity();
    for (int j = 0; j <= n - 2; ++j) {
        out.eta = std::min(out.eta, kappa / (3 * F));
        out.eta = std::min(out.eta, 2 * std::pow(5 * kappa / (4 * C), 1.0 / p[n - j - 2]));
    }

    out.b1 = 1.0 / (216.0 * (3 * F * sn + 1) * (std::pow(3.0, n) + 1) * sn1);
    out.b2 = std::max({8 * Fp * std::sqrt(static_cast<double>(n) * (n - 1)), E * sn1 / (8 * out.eta),
                       1.0 / out.b1});
    out.b3 = E * sn1 / 8.0;
    out.b4 = 36.0 * E * sn1 / 5.0;

    const double pi_top = pi_jk(p, n, n - 1, n - 1);      // p_1 ... p_{n-1}
    const double pi_sub = pi_jk(p, n, n - 2, n - 2);      // p_2 ... p_{n-1}
    out.log_b5 = (n - 1) * std::log(2.0) + std::log(27.0) +
                 std::log(3.0 + std::pow(3.0, -n + 1)) + out.a * std::log(static_cast<double>(n)) -
                 out.a * std::log(static_cast<double>(n - 1)) + std::log(sn1) -
                 2 * std::log(out.nu[n - 1]) - 2 * pi_top * std::log(kappa) + std::log(out.b1);
    out.b5 = std::exp(out.log_b5);
    out.log_b6 = std::log(2 * sn * Fp) + (out.a + out.a_prime) * std::log(sn) -
                 (out.a + out.a_prime) * std::log(sn1) - std::log(out.nu[n - 1]) -
                 std::log(out.nu[n - 2]) - (pi_top + pi_sub) * std::log(kappa);
    out.b6 = std::exp(out.log_b6);

    const double two_na = 2.0 * n * out.a;
    out.log_ct1 = -out.log_b5 - two_na * std::log(out.b2);
    out.log_ct2 = -out.log_b5 - two_na * std::log(out.b3);
    out.log_ct3 = -out.log_b5 - two_na * std::log(out.b4);
    out.log_ct4 = -2 * out.a / (out.a - out.a_prime) * out.log_b6 +
                  (out.a + out.a_prime) / (out.a - out.a_prime) * out.log_b5;
    out.ct1 = std::exp(out.log_ct1);
    out.ct2 = std::exp(out.log_ct2);
    out.ct3 = std::exp(out.log_ct3);
    out.ct4 = std::exp(out.log_ct4);
    out.ct5 = 2 * E * sn1 * std::exp(out.log_b5 / two_na);
    out.ct6 = 3.0 / (4 * E * sn1) * std::exp(-out.log_b5 / two_na);
    out.ct7 = std::log(2.0) * out.b1 * std::exp(-out.log_b5 / two_na);
    return out;
}

json NekhoConstants::to_json() const {
    return {{"n", n},          {"steep", steep.to_json()},
            {"a", a},          {"a_prime", a_prime},
            {"mu", mu},        {"nu", nu},
            {"eta", eta},      {"b1", b1},
            {"b2", b2},        {"b3", b3},
            {"b4", b4},        {"b5", b5},
            {"b6", b6},        {"ct1", ct1},
            {"ct2", ct2},      {"ct3", ct3},
            {"ct4", ct4},      {"ct5", ct5},
            {"ct6", ct6},      {"ct7", ct7},
            {"log_b5", log_b5}, {"log_b6", log_b6}};
}

Schedule choose_Q_m(double r, double eps, const NekhoConstants& consts) {
    if (!(r > 0) || !(eps > 0)) throw DomainError("choose_Q_m: need r > 0 and eps > 0");
    Schedule out;
    out.r = r;
    out.eps = eps;
    const double two_na = 2.0 * consts.n * consts.a;
    const double log_reps = std::log(r) + std::log(eps);
    out.Q = std::exp(-(consts.log_b5 + log_reps) / two_na);
    out.m = static_cast<long long>(std::floor(consts.b1 * out.Q));

    out.caps = {consts.ct1, consts.ct2 * std::pow(consts.steep.delta, two_na),
                consts.ct3 * std::pow(r, 4 * consts.n * consts.a),
                consts.ct4 * std::pow(r, 2 * consts.a / (consts.a - consts.a_prime))};
    const double reps = r * eps;
    out.threshold_ok = true;
    for (int i = 0; i < 4; ++i) {
        out.margins[i] = out.caps[i] / reps;
        if (!(out.margins[i] >= 1.0)) out.threshold_ok = false;
    }
    out.drift_envelope = consts.ct5 * std::exp(log_reps / two_na);
    out.log_time_bound = std::log(consts.ct6) - std::log(r) - log_reps / two_na +
                         consts.ct7 / r * std::exp(-log_reps / two_na);
    return out;
}

json Schedule::to_json() const {
    return {{"Q", Q},
            {"m", m},
            {"r", r},
            {"eps", eps},
            {"threshold_ok", threshold_ok},
            {"caps", caps},
            {"margins", margins},
            {"drift_envelope", drift_envelope},
            {"log_time_bound", log_time_bound}};
}

StabilityBound stability_time_bound(double r, const dio::FrequencyVector& alpha,
                                    const bnf::BNFConstants& consts, const NekhoConstants& nekho,
                                    std::optional<std::pair<double, double>> tau_gamma) {
    if (!(r > 0)) throw DomainError("stability_time_bound: r must be positive");
    StabilityBound out;
    const double e = std::exp(1.0);
    const double two_na = 2.0 * nekho.n * nekho.a;
    out.c_prime = 1.0 / two_na;
    out.c_dprime = 1644.0 * e * nekho.n * consts.c * consts.d;

    // c = 3^-2 btilde(4na-1)^(-1/(2na)), with btilde evaluated in log space.
    const int q = static_cast<int>(std::llround(4 * nekho.n * nekho.a)) - 1;
    double log_psi_prod = 0.0;
    for (int i = 3; i <= q + 2; ++i) log_psi_prod += std::log(dio::psi(alpha, i).value);
    double log_btilde = std::log(consts.d / consts.c) + q * std::log(20 * consts.c * consts.d) +
                        std::lgamma(q + 3.0) + log_psi_prod;
    out.log_c = -2 * std::log(3.0) - log_btilde / two_na;
    out.c = std::exp(out.log_c);

    dio::DeltaResult dr = dio::delta(alpha, out.c_dprime / r);
    out.delta_value = dr.value;
    out.delta_truncated = dr.resonance_truncated || dr.cap_truncated;
    out.loglogT = out.log_c + 2 * std::log(1.0 / r) + out.c_prime * dr.value;

    if (tau_gamma) {
        auto [tau, gamma] = *tau_gamma;
        out.has_diophantine = true;
        double delta_lower = std::pow(gamma * out.c_dprime / r, 1.0 / (1.0 + tau));
        out.loglogT_diophantine = out.log_c + 2 * std::log(1.0 / r) + out.c_prime * delta_lower;
        out.C_diophantine = out.c_prime * std::pow(gamma * out.c_dprime, 1.0 / (1.0 + tau));
    }
    return out;
}

json StabilityBound::to_json() const {
    json j = {{"c", c},
              {"log_c", log_c},
              {"c_prime", c_prime},
              {"c_dprime", c_dprime},
              {"Delta", delta_value},
              {"Delta_truncated", delta_truncated},
              {"loglogT", loglogT}};
    if (has_diophantine) {
        j["loglogT_diophantine"] = loglogT_diophantine;
        j["C_diophantine"] = C_diophantine;
    }
    return j;
}

Trajectory integrate(const PolyF& H_real, const std::vector<double>& z0,
                     const IntegrateOptions& opts) {
    if (!(opts.dt > 0)) throw DomainError("integrate: dt must be positive");
    const int dim = H_real.nvars();
    if (dim % 2 != 0 || static_cast<int>(z0.size()) != dim)
        throw DimensionError("integrate: phase dimension mismatch");
    const int n = dim / 2;

    kernels::CompiledGradient grad = kernels::CompiledGradient::from_poly(H_real);
    // Hessian entries, compiled once.
    std::vector<kernels::CompiledPoly> hess;
    hess.reserve(static_cast<std::size_t>(dim) * dim);
    for (int a = 0; a < dim; ++a) {
        PolyF da = H_real.derivative(a);
        for (int b = 0; b < dim; ++b) hess.push_back(kernels::CompiledPoly::from_poly(da.derivative(b)));
    }
    kernels::CompiledPoly ham = kernels::CompiledPoly::from_poly(H_real);

    auto field = [&](const double* z, double* out) {
        double g[16];
        grad.eval(z, g);
        for (int j = 0; j < n; ++j) {
            out[j] = g[n + j];       // dx/dt =  dH/dy
            out[n + j] = -g[j];      // dy/dt = -dH/dx
        }
    };

    Trajectory traj;
    traj.n = n;
    traj.dt = opts.dt;
    long long stride = opts.stride > 0 ? opts.stride : std::max(1LL, opts.steps / 4096);

    std::vector<double> z = z0;
    std::vector<double> I0(n), I(n);
    for (int j = 0; j < n; ++j) I0[j] = 0.5 * (z[j] * z[j] + z[n + j] * z[n + j]);

    auto record = [&](double t) {
        traj.times.push_back(t);
        traj.points.push_back(z);
        std::vector<double> acts(n);
        for (int j = 0; j < n; ++j) acts[j] = 0.5 * (z[j] * z[j] + z[n + j] * z[n + j]);
        traj.actions.push_back(std::move(acts));
        traj.energies.push_back(ham.eval(z.data()));
    };
    record(0.0);

    std::vector<double> mid(dim), G(dim), J(static_cast<std::size_t>(dim) * dim), dz(dim),
        znew(dim), f(dim);
    for (long long step = 1; step <= opts.steps; ++step) {
        // Predictor: explicit Euler.
        field(z.data(), f.data());
        for (int k = 0; k < dim; ++k) znew[k] = z[k] + opts.dt * f[k];
        bool converged = false;
        for (int it = 0; it < opts.newton_max; ++it) {
            for (int k = 0; k < dim; ++k) mid[k] = 0.5 * (z[k] + znew[k]);
            field(mid.data(), f.data());
            double res = 0.0;
            for (int k = 0; k < dim; ++k) {
                G[k] = znew[k] - z[k] - opts.dt * f[k];
                res = std::max(res, std::abs(G[k]));
            }
            if (res <= opts.newton_tol) {
                converged = true;
                break;
            }
            // J = I - (dt/2) * JSymp * Hess(mid)
            for (int rw = 0; rw < dim; ++rw) {
                int src = rw < n ? n + rw : rw - n;  // row of the symplectic product
                double sgn = rw < n ? 1.0 : -1.0;
                for (int cl = 0; cl < dim; ++cl) {
                    double hval = hess[static_cast<std::size_t>(src) * dim + cl].eval(mid.data());
                    J[rw * dim + cl] = (rw == cl ? 1.0 : 0.0) - 0.5 * opts.dt * sgn * hval;
                }
            }
            if (!lu_solve(J, G, dim, dz))
                throw DomainError("integrate: singular Newton system; reduce dt");
            for (int k = 0; k < dim; ++k) znew[k] -= dz[k];
        }
        if (!converged)
            throw DomainError("integrate: Newton failed to reach " +
                              std::to_string(opts.newton_tol) + " at step " +
                              std::to_string(step) + "; reduce dt");
        z = znew;

        double drift = 0.0;
        for (int j = 0; j < n; ++j) {
            I[j] = 0.5 * (z[j] * z[j] + z[n + j] * z[n + j]);
            drift = std::max(drift, std::abs(I[j] - I0[j]));
        }
        traj.max_action_drift = std::max(traj.max_action_drift, drift);

        double t = step * opts.dt;
        if (opts.escape_radius > 0 && pair_sup_norm(z) >= opts.escape_radius) {
            traj.escape_time = t;
            record(t);
            break;
        }
        if (step % stride == 0 || step == opts.steps) record(t);
    }
    return traj;
}

DriftReport measure_drift(const Trajectory& traj) {
    if (traj.actions.empty()) throw DomainError("measure_drift: empty trajectory");
    DriftReport out;
    const auto& I0 = traj.actions.front();
    for (const auto& I : traj.actions) out.max_drift = std::max(out.max_drift, sup_diff(I, I0));
    out.max_drift = std::max(out.max_drift, traj.max_action_drift);
    out.escape_time = traj.escape_time;
    return out;
}

namespace {

// Real form of the complexified jet h.I + g + f, for integration.
PolyF realify(const PolyF& complex_poly) {
    PolyF real = complexify_inverse(complex_poly);
    // Imaginary dust from float round-off is dropped.
    PolyF out(real.nvars());
    for (const auto& [m, c] : real.terms()) out.add_term(m, {c.real(), 0.0});
    return out;
}

}  // namespace

json StageRecord::to_json() const {
    json j = {{"stage", stage},
              {"omega", omega},
              {"T", T},
              {"s", s},
              {"r", r},
              {"xi", xi},
              {"thresholds_ok", thresholds_ok},
              {"observed_drift", observed_drift},
              {"horizon", horizon},
              {"integrated_time", integrated_time},
              {"horizon_capped", horizon_capped},
              {"alternative", alternative},
              {"phi_distance_bound", phi_distance_bound}};
    if (!threshold_failure.empty()) j["threshold_failure"] = threshold_failure;
    if (alternative == 2) {
        j["escape_time"] = escape_time;
        j["steep_margin_required"] = steep_margin_required;
        j["steep_margin_observed"] = steep_margin_observed;
    }
    return j;
}

json ConfinementLog::to_json() const {
    json st = json::array();
    for (const auto& s : stages) st.push_back(s.to_json());
    return {{"applicable", applicable},
            {"stop_reason", stop_reason},
            {"stages", st},
            {"max_drift", max_drift}};
}

ConfinementLog run_confinement_algorithm(const PolyF& H_real, const PolyF& h_actions,
                                         const std::vector<double>& z0,
                                         const ConfineOptions& opts,
                                         const steep::SteepnessCertificate* certificate) {
    ConfinementLog log;
    const int n = h_actions.nvars();
    if (H_real.nvars() != 2 * n || static_cast<int>(z0.size()) != 2 * n)
        throw DimensionError("run_confinement_algorithm: dimension mismatch");

    if (certificate && certificate->verdict == steep::Verdict::refuted) {
        log.applicable = false;
        log.stop_reason = "steepness hypothesis refuted by the certifier; algorithm not run";
        return log;
    }

    // Stage 0 data per the initialization: s0 = sqrt(n-1)/(T0 Q), r0 = r/2,
    // xi0 = r0/3, g0 = perturbation, f0 = 0.
    PolyF f_pert = complexify(H_real) - substitute_actions(h_actions, ActionCoords::complexified);
    f_pert.prune();
    avg::NormalFormDatum<std::complex<double>> datum;
    datum.n = n;
    datum.stage = 0;
    datum.h = h_actions;
    datum.g = f_pert;
    datum.f = PolyF(2 * n);
    datum.m = opts.m;
    datum.domain.z_anchor = z0;
    datum.domain.r = opts.r / 2;
    datum.domain.xi = opts.r / 6;
    const double rho0 = datum.domain.r + 3 * datum.domain.xi;
    datum.eps = avg::xfield_surrogate(f_pert, rho0);
    datum.F = avg::hessian_surrogate(h_actions, rho0 * rho0 / 2);

    std::vector<double> acts = avg::actions_of(z0);
    std::vector<double> v = avg::grad_h_at(h_actions, acts);
    dio::PeriodicVector omega = dio::dirichlet_approx(v, opts.Q);
    datum.domain.s = std::sqrt(static_cast<double>(n - 1)) / (omega.T * opts.Q);
    if (n == 1) datum.domain.s = omega.achieved > 0 ? omega.achieved : 1e-3;

    std::vector<double> z = z0;
    const double Fp = std::max(1.0, datum.F);

    for (int j = 0; j < n; ++j) {
        StageRecord rec;
        rec.stage = j;
        rec.omega = omega.omega;
        rec.T = omega.T;
        rec.s = datum.domain.s;
        rec.r = datum.domain.r;
        rec.xi = datum.domain.xi;

        avg::NormalizeResult<std::complex<double>> norm_res;
        try {
            norm_res = avg::normalize(datum, omega, opts.m, opts.working_degree, 0.0, true);
            rec.thresholds_ok = true;
        } catch (const ThresholdError& e) {
            rec.threshold_failure = e.inequality;
            log.stages.push_back(rec);
            log.stop_reason = "threshold failed at stage " + std::to_string(j) + ": " +
                              e.inequality;
            return log;
        }
        rec.phi_distance_bound = norm_res.phi_distance_bound;

        // Integrate the normalized system from the current anchor.
        PolyF Hplus = realify(
            (substitute_actions(norm_res.datum.h, ActionCoords::complexified) + norm_res.datum.g +
             norm_res.datum.f)
                .truncated(opts.working_degree));
        double grad_scale = 0.0;
        for (double g : v) grad_scale += g * g;
        grad_scale = std::sqrt(grad_scale);
        IntegrateOptions iopts;
        iopts.dt = opts.dt > 0 ? opts.dt : opts.r / 100.0 / std::max(1.0, grad_scale);
        double tbar;
        if (j < n - 1) {
            tbar = 1.0 / (rec.r + rec.xi) / ((j + 1) * std::pow(2.0, j)) / rec.s *
                   std::pow(2.0, opts.m);
        } else {
            tbar = 1.0 / (rec.r + rec.xi) / (n * std::pow(2.0, n - 1)) * rec.s /
                   std::max(datum.eps, 1e-300) * std::pow(2.0, opts.m);
        }
        long long steps = static_cast<long long>(std::min(
            static_cast<double>(opts.max_steps), std::ceil(tbar / iopts.dt)));
        rec.horizon = tbar;
        rec.horizon_capped = steps >= opts.max_steps;
        iopts.steps = std::max(1LL, steps);
        iopts.stride = std::max(1LL, iopts.steps / 8192);
        Trajectory traj = integrate(Hplus, z, iopts);
        rec.integrated_time = traj.times.back();

        // Dichotomy: does |I(z(t)) - I(z_j)| reach s_j/4?
        const auto Ij = avg::actions_of(z);
        double level = rec.s / 4;
        double guard = 0.99;  // 1% numerical guard band on the exact s/4 level
        std::size_t cross = traj.actions.size();
        double maxdrift = 0.0;
        for (std::size_t i = 0; i < traj.actions.size(); ++i) {
            double d = sup_diff(traj.actions[i], Ij);
            maxdrift = std::max(maxdrift, d);
            if (d >= guard * level && cross == traj.actions.size()) cross = i;
        }
        rec.observed_drift = maxdrift;
        log.max_drift = std::max(log.max_drift, maxdrift);

        if (cross == traj.actions.size() || j == n - 1) {
            rec.alternative = 1;
            log.stages.push_back(rec);
            log.stop_reason = j == n - 1 ? "stage n-1 reached: resonant part integrable"
                                         : "confined: no s/4 drift within the horizon";
            return log;
        }

        // Alternative (2): find the s/8 crossing of the projected drift.
        rec.alternative = 2;
        std::vector<dio::PeriodicVector> omegas_so_far = datum.omegas;
        omegas_so_far.push_back(omega);
        std::size_t tilde = cross;
        for (std::size_t i = 0; i <= cross; ++i) {
            std::vector<double> diff(n);
            for (int kk = 0; kk < n; ++kk) diff[kk] = traj.actions[i][kk] - Ij[kk];
            std::vector<double> proj = avg::project_orthogonal(omegas_so_far, diff);
            double nr = 0.0;
            for (double x : proj) nr += x * x;
            if (std::sqrt(nr) >= rec.s / 8) {
                tilde = i;
                break;
            }
        }
        rec.escape_time = traj.times[tilde];

        // Steepness escape: || Pi_{j+1} grad h(gamma_j(t~)) || > mu_j s_j^{p_{n-j-1}}.
        std::vector<double> gamma(n);
        {
            std::vector<double> diff(n);
            for (int kk = 0; kk < n; ++kk) diff[kk] = traj.actions[tilde][kk] - Ij[kk];
            std::vector<double> proj = avg::project_orthogonal(omegas_so_far, diff);
            for (int kk = 0; kk < n; ++kk) gamma[kk] = Ij[kk] + proj[kk];
        }
        std::vector<double> vnext =
            avg::project_orthogonal(omegas_so_far, avg::grad_h_at(h_actions, gamma));
        double vnorm = 0.0;
        for (double x : vnext) vnorm += x * x;
        vnorm = std::sqrt(vnorm);
        rec.steep_margin_observed = vnorm;
        if (certificate && certificate->verdict == steep::Verdict::certified && j <= n - 2) {
            int p_idx = certificate->p[n - j - 2];  // p_{n-j-1}, 0-indexed
            double mu_j = certificate->C / 5.0 * std::pow(16.0, -p_idx);
            rec.steep_margin_required = mu_j * std::pow(rec.s, p_idx);
        }
        if (vnorm <= 1e-14) {
            log.stages.push_back(rec);
            log.stop_reason = "projected gradient vanished; steepness escape unavailable";
            log.applicable = false;
            return log;
        }

        dio::PeriodicVector omega_next = dio::dirichlet_approx(vnext, opts.Q);
        // Period lower bound (F' sqrt(n) s_j)^-1 < T_{j+1}.
        if (!(omega_next.T > 1.0 / (Fp * std::sqrt(static_cast<double>(n)) * rec.s)))
            rec.threshold_failure = "(F' sqrt(n) s_j)^-1 < T_{j+1} failed";

        // Advance the datum to stage j+1 with the Proposition-6 bookkeeping.
        datum = norm_res.datum;  // stage j+1, omegas include omega_j
        z = traj.points[tilde];
        datum.domain.z_anchor = z;
        avg::advance_domain(datum.domain, omega_next.T, opts.Q, n);
        log.stages.push_back(rec);

        // Rank check happens inside check_nf at the next normalize; assert here.
        auto chk = avg::check_nf(datum);
        if (!chk.independent) {
            log.stop_reason = "periodic vectors lost linear independence";
            return log;
        }
        v = vnext;
        omega = omega_next;
    }
    log.stop_reason = "stage budget exhausted";
    return log;
}

}  // namespace ellipstab::nekho
