#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ellipstab/averaging.hpp"
#include "ellipstab/bnf.hpp"
#include "ellipstab/diophantine.hpp"
#include "ellipstab/polynomial.hpp"
#include "ellipstab/steepness.hpp"

namespace ellipstab::nekho {

using nlohmann::json;

// Steepness data of the integrable part: (kappa, C, delta, p_1..p_{n-1})
// plus the gradient/Hessian bounds E, F on the working domain.
struct SteepParams {
    double kappa = 0.0;
    double C = 0.0;
    double delta = 0.0;
    std::vector<int> p;
    double E = 0.0;
    double F = 0.0;
    double Fprime() const { return std::max(1.0, F); }

    json to_json() const;
    static SteepParams from_json(const json& j);
};

// pi_j^k = prod_{n-j <= i <= n-j+k-1} p_i and a_j^k = sum_{0<=i<=k} pi_j^i,
// with p indexed 1..n-1. Exposed so tests can re-derive the ledger.
double pi_jk(const std::vector<int>& p, int n, int j, int k);
double a_jk(const std::vector<int>& p, int n, int j, int k);

struct NekhoConstants {
    int n = 0;
    SteepParams steep;
    double a = 0.0;        // 1 + p1 + p1 p2 + ... + p1...p_{n-1}
    double a_prime = 0.0;  // 1 + p2 + p2 p3 + ...
    std::vector<double> mu;  // mu_0..mu_{n-2}
    std::vector<double> nu;  // nu_0..nu_{n-1}
    double eta = 0.0;
    double b1 = 0.0, b2 = 0.0, b3 = 0.0, b4 = 0.0, b5 = 0.0, b6 = 0.0;
    double ct1 = 0.0, ct2 = 0.0, ct3 = 0.0, ct4 = 0.0, ct5 = 0.0, ct6 = 0.0, ct7 = 0.0;
    // Natural logs, safe where the plain values underflow for large exponents.
    double log_b5 = 0.0, log_b6 = 0.0;
    double log_ct1 = 0.0, log_ct2 = 0.0, log_ct3 = 0.0, log_ct4 = 0.0;

    json to_json() const;
};

NekhoConstants compute_constants(int n, const SteepParams& steep);

// Parameter schedule Q = (b5 r eps)^(-1/(2na)), m = [b1 Q], with the
// smallness-threshold flags and the drift/time envelopes.
struct Schedule {
    double Q = 0.0;
    long long m = 0;
    double r = 0.0, eps = 0.0;
    bool threshold_ok = false;
    std::array<double, 4> caps{};     // ct1, ct2 d^2na, ct3 r^4na, ct4 r^(2a/(a-a'))
    std::array<double, 4> margins{};  // cap / (r eps); >= 1 when satisfied
    double drift_envelope = 0.0;      // ct5 (r eps)^(1/(2na))
    double log_time_bound = 0.0;      // log of ct6 r^-1 (.)^{-1/2na} exp(ct7 r^-1 (.)^{-1/2na})

    json to_json() const;
};

Schedule choose_Q_m(double r, double eps, const NekhoConstants& consts);

// Stability-time floor of the double-exponential form, reported as
// log(log T) to avoid overflow. The Diophantine branch is filled when a
// (tau, gamma) fit is supplied.
struct StabilityBound {
    double c = 0.0, c_prime = 0.0, c_dprime = 0.0;  // Eq.-style constants
    double log_c = 0.0;
    long long delta_value = 0;
    bool delta_truncated = false;
    double loglogT = 0.0;
    bool has_diophantine = false;
    double loglogT_diophantine = 0.0;
    double C_diophantine = 0.0;  // gamma^(1/(tau+1)) C'

    json to_json() const;
};

StabilityBound stability_time_bound(double r, const dio::FrequencyVector& alpha,
                                    const bnf::BNFConstants& consts, const NekhoConstants& nekho,
                                    std::optional<std::pair<double, double>> tau_gamma = std::nullopt);

// Fixed-step implicit midpoint with Newton inner iterations.
struct IntegrateOptions {
    double dt = 1e-3;
    long long steps = 1000;
    long long stride = 0;  // 0: pick ~4096 samples
    double escape_radius = 0.0;  // 0: no check; norm is max_j sqrt(xj^2+yj^2)
    double newton_tol = 1e-13;
    int newton_max = 30;
};

struct Trajectory {
    int n = 0;
    double dt = 0.0;
    std::string integrator = "implicit-midpoint";
    std::vector<double> times;
    std::vector<std::vector<double>> points;
    std::vector<std::vector<double>> actions;
    std::vector<double> energies;
    std::optional<double> escape_time;
    double max_action_drift = 0.0;  // tracked every step, not just at samples
};

Trajectory integrate(const PolyF& H_real, const std::vector<double>& z0,
                     const IntegrateOptions& opts);

struct DriftReport {
    double max_drift = 0.0;  // sup-norm on actions, relative to the start
    std::optional<double> escape_time;
};

DriftReport measure_drift(const Trajectory& traj);

// Step-logged run of the confinement algorithm at desk scale.
struct ConfineOptions {
    double Q = 8.0;
    int m = 2;
    double r = 0.1;
    int working_degree = 8;
    double dt = 0.0;          // 0: r/100 scaled by 1/||grad h||
    long long max_steps = 2000000;
    std::uint64_t seed = 0;
};

struct StageRecord {
    int stage = 0;
    std::vector<double> omega;
    double T = 0.0, s = 0.0, r = 0.0, xi = 0.0;
    bool thresholds_ok = false;
    std::string threshold_failure;
    double observed_drift = 0.0;
    double horizon = 0.0, integrated_time = 0.0;
    bool horizon_capped = false;
    int alternative = 0;  // 1 = confined, 2 = escape to the next stage
    double escape_time = 0.0;
    double steep_margin_required = 0.0;  // mu_j s_j^{p_{n-j-1}}
    double steep_margin_observed = 0.0;  // ||Pi_{j+1} grad h(gamma)||
    double phi_distance_bound = 0.0;
    json to_json() const;
};

struct ConfinementLog {
    bool applicable = true;
    std::string stop_reason;
    std::vector<StageRecord> stages;
    double max_drift = 0.0;
    json to_json() const;
};

ConfinementLog run_confinement_algorithm(const PolyF& H_real, const PolyF& h_actions,
                                         const std::vector<double>& z0,
                                         const ConfineOptions& opts,
                                         const steep::SteepnessCertificate* certificate);

}  // namespace ellipstab::nekho
