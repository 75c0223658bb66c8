#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "ellipstab/errors.hpp"
#include "ellipstab/exact.hpp"

namespace ellipstab::dio {

using nlohmann::json;

// Frequency vector alpha with exact (rational / quadratic-irrational over a
// single radicand) or float components. Components must be pairwise distinct:
// ellipticity requires a simple spectrum.
class FrequencyVector {
  public:
    static FrequencyVector rational(std::vector<Rational> vals);
    static FrequencyVector quadratic(std::vector<QuadIrr> vals);
    static FrequencyVector floating(std::vector<double> vals);
    static FrequencyVector from_json(const json& j);
    json to_json() const;

    int n() const { return static_cast<int>(floats_.size()); }
    bool is_exact() const { return exact_; }

    double component(int j) const { return floats_[j]; }
    const std::vector<double>& components() const { return floats_; }
    const QuadIrr& exact_component(int j) const { return exacts_[j]; }

    QuadIrr dot_exact(const std::vector<long long>& k) const;
    double dot_double(const std::vector<long long>& k) const;
    double norm() const;

  private:
    bool exact_ = false;
    std::vector<QuadIrr> exacts_;
    std::vector<double> floats_;
    void validate() const;
};

// Iterates integer vectors with |k|_1 = shell, one representative per {k,-k}
// pair (first nonzero component positive), in a deterministic order.
void for_each_shell_rep(int n, int shell, const std::function<void(const std::vector<long long>&)>& fn);

struct PsiResult {
    double value = 0.0;                   // Psi_alpha(K)
    std::vector<long long> minimizer;     // k achieving the smallest |k.alpha|
};

// Max of |k.alpha|^(-1) over 0 < |k|_1 <= K by exhaustive enumeration.
// Throws ResonanceError (with the smallest-shell witness) on exact resonance.
PsiResult psi(const FrequencyVector& alpha, int K);

struct DeltaResult {
    long long value = 0;          // Delta_alpha(x); 0 when the set is empty
    bool resonance_truncated = false;
    bool cap_truncated = false;
    std::vector<long long> resonance_witness;
};

// Delta_alpha(x) = sup{K >= 1 : K Psi(K) <= x}. Brute-force incremental scan,
// with a continued-fraction fast path for exact n = 2 inputs so that the
// stability-time probe at very large x stays tractable.
DeltaResult delta(const FrequencyVector& alpha, double x, long long cap = 2000000000LL);

struct FitResult {
    double gamma = 0.0;                 // min |k.alpha| |k|_1^tau over the range
    std::vector<long long> minimizer;
};

// Largest gamma consistent with DC(tau, gamma) up to order Kmax.
FitResult diophantine_fit(const FrequencyVector& alpha, double tau, int Kmax);

// Smallest-|k|_1 resonance witness, or nullopt. Float tolerance is
// |k.alpha| < 1e-12 * ||alpha||.
std::optional<std::vector<long long>> find_resonance(const FrequencyVector& alpha, int K);

// Periodic approximation (omega, T) with T omega integral and T minimal.
struct PeriodicVector {
    std::vector<double> omega;
    double T = 0.0;
    double achieved = 0.0;  // ||v - omega||
    double bound = 0.0;     // sqrt(n-1)/(T Q)
    bool exact = false;
    std::vector<Rational> omega_exact;
    Rational T_exact;

    json to_json() const;
    static PeriodicVector from_json(const json& j);
};

// Lemma-4-style construction: reorder so the sup-norm component leads,
// Dirichlet-approximate the rest with the smallest admissible q <= Q^(n-1).
// Both guarantees ||v-omega|| <= sqrt(n-1)/(TQ) and
// ||v||^{-1} <= T <= sqrt(n) ||v||^{-1} Q^{n-1} are asserted on return
// (exactly, in the exact overload).
PeriodicVector dirichlet_approx(const std::vector<Rational>& v, const Rational& Q);
PeriodicVector dirichlet_approx(const std::vector<double>& v, double Q);

}  // namespace ellipstab::dio
