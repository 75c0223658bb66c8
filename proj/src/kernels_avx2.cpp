// AVX2 + FMA variants of the batch evaluation kernels. Compiled with
// -mavx2 -mfma and selected at runtime; the scalar versions in kernels.cpp
// are the reference the equivalence tests compare against.

#include <immintrin.h>

#include "ellipstab/kernels.hpp"

namespace ellipstab::kernels {

namespace {

// Evaluates 4 points at once. Power tables live on the stack:
// kMaxVars * (max_exp+1) vectors.
inline __m256d eval4(const CompiledPoly& p, const __m256d* pw, int stride) {
    __m256d acc = _mm256_setzero_pd();
    for (const auto& t : p.terms) {
        __m256d m = _mm256_set1_pd(t.coef);
        for (int v = 0; v < p.nvars; ++v) m = _mm256_mul_pd(m, pw[v * stride + t.e[v]]);
        acc = _mm256_add_pd(acc, m);
    }
    return acc;
}

inline void build_powers(const double* xs, std::size_t count, std::size_t i, int nvars,
                         int max_exp, __m256d* pw, int stride) {
    for (int v = 0; v < nvars; ++v) {
        __m256d x = _mm256_loadu_pd(xs + v * count + i);
        __m256d cur = _mm256_set1_pd(1.0);
        pw[v * stride + 0] = cur;
        for (int e = 1; e <= max_exp; ++e) {
            cur = _mm256_mul_pd(cur, x);
            pw[v * stride + e] = cur;
        }
    }
}

}  // namespace

void eval_batch_avx2(const CompiledPoly& p, const double* xs, std::size_t count, double* values) {
    const int stride = p.max_exp + 1;
    __m256d pw[CompiledPoly::kMaxVars * 64];
    std::size_t i = 0;
    for (; i + 4 <= count; i += 4) {
        build_powers(xs, count, i, p.nvars, p.max_exp, pw, stride);
        _mm256_storeu_pd(values + i, eval4(p, pw, stride));
    }
    if (i < count) {
        double x[CompiledPoly::kMaxVars];
        for (; i < count; ++i) {
            for (int v = 0; v < p.nvars; ++v) x[v] = xs[v * count + i];
            values[i] = p.eval(x);
        }
    }
}

void grad_norm2_batch_avx2(const CompiledGradient& g, const double* xs, std::size_t count,
                           double* out) {
    int max_exp = 0;
    for (const auto& c : g.comps) max_exp = std::max(max_exp, c.max_exp);
    const int stride = max_exp + 1;
    __m256d pw[CompiledPoly::kMaxVars * 64];
    std::size_t i = 0;
    for (; i + 4 <= count; i += 4) {
        build_powers(xs, count, i, g.nvars, max_exp, pw, stride);
        __m256d acc = _mm256_setzero_pd();
        for (const auto& comp : g.comps) {
            __m256d gv = eval4(comp, pw, stride);
            acc = _mm256_fmadd_pd(gv, gv, acc);
        }
        _mm256_storeu_pd(out + i, acc);
    }
    if (i < count) {
        double x[CompiledPoly::kMaxVars];
        for (; i < count; ++i) {
            for (int v = 0; v < g.nvars; ++v) x[v] = xs[v * count + i];
            out[i] = g.norm2(x);
        }
    }
}

}  // namespace ellipstab::kernels
