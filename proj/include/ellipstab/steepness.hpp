#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ellipstab/polynomial.hpp"

namespace ellipstab::steep {

using nlohmann::json;

// Orthonormal basis of an l-dimensional subspace of R^n, column-major.
struct SubspaceSample {
    int n = 0;
    int l = 0;
    std::vector<double> basis;  // n*l entries, column v at basis[v*n .. v*n+n)

    double entry(int row, int col) const { return basis[col * n + row]; }
    bool orthonormal(double tol = 1e-12) const;
    json to_json() const;
    static SubspaceSample from_json(const json& j);
};

SubspaceSample coordinate_subspace(int n, const std::vector<int>& vars);
SubspaceSample haar_subspace(int n, int l, std::uint64_t seed);

struct GridSpec {
    double xi_min = 1e-3;
    double xi_max = 0.5;
    int points_per_decade = 256;
};
std::vector<double> log_grid(const GridSpec& spec);

struct MarginCurve {
    std::vector<double> xi;
    std::vector<double> margin;  // running max over eta <= xi of the inner min
};

// max_{0<=eta<=xi} min_{||y||=eta} ||grad P_Lambda(y)|| on a grid.
// Inner minimization: exact for l=1, dense angular grid plus golden-section
// refinement for l=2, multi-start projected descent for l>=3.
MarginCurve margin_curve(const PolyF& P, const SubspaceSample& Lambda,
                         const std::vector<double>& xi_grid);

enum class Verdict { certified, refuted, inconclusive };
std::string verdict_name(Verdict v);

struct SteepnessCertificate {
    Verdict verdict = Verdict::inconclusive;
    int n = 0;
    int m = 0;             // polynomial degree
    double kappa = 0.0;    // gradient lower bound (filled by the Taylor transfer)
    double C = 0.0;
    double delta = 0.0;
    std::vector<int> p;    // indices p_1..p_{n-1} (uniformly m-1 in stable mode)
    double stable_radius = 0.0;  // coefficient perturbation radius certified against
    // Sampling evidence, one curve per inspected subspace.
    struct Evidence {
        SubspaceSample sample;
        MarginCurve curve;
        double slope = 0.0;
        int fitted_index = 0;
    };
    std::vector<Evidence> evidence;
    std::optional<SubspaceSample> witness;  // refutation witness
    double witness_margin = 0.0;
    // One-sided by construction: "certified" means no violation was found at
    // the stated sampling resolution.
    std::string caveat = "sampling-based certificate: no violation found at stated resolution";

    json to_json() const;
    static SteepnessCertificate from_json(const json& j);
};

// Definition-2-style certification with per-dimension indices fitted from the
// log-log margin slopes. Coordinate subspaces are always inspected; `samples`
// Haar draws per dimension are added, plus an adversarial minimization that
// hunts for degenerate restrictions.
SteepnessCertificate certify_steep(const PolyF& P, const GridSpec& grid, int samples,
                                   std::uint64_t seed = 0, int jobs = 1);

// Definition-1-style: exponent fixed at m-1, certified over a coefficient
// perturbation family of the given sup-norm radius.
SteepnessCertificate certify_stably_steep(const PolyF& P, double radius, int perturbation_samples,
                                          const GridSpec& grid, int samples,
                                          std::uint64_t seed = 0, int jobs = 1);

// Definition-A.1-style: full-sphere gradient growth in P_2(l,m), same
// perturbation family, no subspace restriction.
SteepnessCertificate certify_stably_expanding(const PolyF& Q, double radius,
                                              int perturbation_samples, const GridSpec& grid,
                                              std::uint64_t seed = 0, int jobs = 1);

// Quantitative Taylor transfer: from a certified base polynomial P_{p-1} with
// constants (C0, delta0) to steepness constants for the full jet:
//   kappa = varpi/2, C = C0/2, delta* = C0 / (2 M (p-1)!),
//   mu* = min{certified radius, sqrt(varpi/M)},
//   mu = min{rho/2, mu*}, delta = min{rho^2/4, delta*}.
struct TaylorConstants {
    double mu = 0.0;
    double kappa = 0.0;
    double C = 0.0;
    double delta = 0.0;
    double mu_star = 0.0;
    double delta_star = 0.0;
};
TaylorConstants taylor_steepness_constants(double varpi, double M, int p,
                                           const SteepnessCertificate& base, double rho);

}  // namespace ellipstab::steep
