#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "ellipstab/polynomial.hpp"

namespace ellipstab::kernels {

// Flattened real polynomial for tight evaluation loops. Coefficients must be
// real (imaginary parts below 1e-12 relative are dropped; larger ones throw).
struct CompiledPoly {
    static constexpr int kMaxVars = 8;
    struct Term {
        double coef;
        std::array<std::uint8_t, kMaxVars> e;
    };
    int nvars = 0;
    int max_exp = 0;
    std::vector<Term> terms;

    static CompiledPoly from_poly(const PolyF& p);
    static CompiledPoly from_poly(const PolyEx& p);

    double eval(const double* x) const;
};

// Per-variable partial derivatives, compiled once.
struct CompiledGradient {
    int nvars = 0;
    std::vector<CompiledPoly> comps;

    static CompiledGradient from_poly(const PolyF& p);
    static CompiledGradient from_poly(const PolyEx& p);

    void eval(const double* x, double* out) const;
    double norm2(const double* x) const;
};

enum class Isa { scalar, avx2 };

Isa detected_isa();
Isa active_isa();
void force_isa(Isa isa);  // test hook; falls back to scalar if unsupported
std::string isa_name(Isa isa);

// Batch kernels over structure-of-arrays points: xs[v * count + i] holds
// coordinate v of point i. Dispatches to the best available instruction set.
void eval_batch(const CompiledPoly& p, const double* xs, std::size_t count, double* values);
// out[i] = sum_v (dP/dx_v)^2 at point i.
void grad_norm2_batch(const CompiledGradient& g, const double* xs, std::size_t count, double* out);

// Reference kernels, exposed so the equivalence tests can target them.
void eval_batch_scalar(const CompiledPoly& p, const double* xs, std::size_t count, double* values);
void grad_norm2_batch_scalar(const CompiledGradient& g, const double* xs, std::size_t count,
                             double* out);
#if defined(ELLIPSTAB_HAVE_AVX2)
void eval_batch_avx2(const CompiledPoly& p, const double* xs, std::size_t count, double* values);
void grad_norm2_batch_avx2(const CompiledGradient& g, const double* xs, std::size_t count,
                           double* out);
#endif

}  // namespace ellipstab::kernels
