#include "ellipstab/kernels.hpp"

#include <cmath>

#include "ellipstab/errors.hpp"

namespace ellipstab::kernels {

namespace {

template <class C>
CompiledPoly compile_impl(const Poly<C>& p) {
    using T = coeff_traits<C>;
    if (p.nvars() > CompiledPoly::kMaxVars)
        throw DimensionError("CompiledPoly: too many variables (max 8)");
    CompiledPoly out;
    out.nvars = p.nvars();
    double scale = 0.0;
    for (const auto& [m, c] : p.terms()) scale = std::max(scale, T::abs(c));
    for (const auto& [m, c] : p.terms()) {
        std::complex<double> z = T::to_complex(c);
        if (std::abs(z.imag()) > 1e-12 * std::max(scale, 1e-300))
            throw DomainError("CompiledPoly: coefficients must be real");
        CompiledPoly::Term t;
        t.coef = z.real();
        t.e.fill(0);
        for (int v = 0; v < out.nvars; ++v) {
            t.e[v] = m.e[v];
            out.max_exp = std::max(out.max_exp, static_cast<int>(m.e[v]));
        }
        out.terms.push_back(t);
    }
    if (out.max_exp >= 64) throw DomainError("CompiledPoly: exponent too large (max 63)");
    return out;
}

template <class C>
CompiledGradient compile_grad_impl(const Poly<C>& p) {
    CompiledGradient g;
    g.nvars = p.nvars();
    for (int v = 0; v < p.nvars(); ++v) g.comps.push_back(compile_impl(p.derivative(v)));
    return g;
}

Isa g_forced = Isa::scalar;
bool g_force_active = false;

}  // namespace

CompiledPoly CompiledPoly::from_poly(const PolyF& p) { return compile_impl(p); }
CompiledPoly CompiledPoly::from_poly(const PolyEx& p) { return compile_impl(p); }
CompiledGradient CompiledGradient::from_poly(const PolyF& p) { return compile_grad_impl(p); }
CompiledGradient CompiledGradient::from_poly(const PolyEx& p) { return compile_grad_impl(p); }

double CompiledPoly::eval(const double* x) const {
    // Per-point power table keeps repeated exponents cheap.
    double pw[kMaxVars][64];
    for (int v = 0; v < nvars; ++v) {
        pw[v][0] = 1.0;
        for (int e = 1; e <= max_exp; ++e) pw[v][e] = pw[v][e - 1] * x[v];
    }
    double s = 0.0;
    for (const auto& t : terms) {
        double m = t.coef;
        for (int v = 0; v < nvars; ++v) m *= pw[v][t.e[v]];
        s += m;
    }
    return s;
}

void CompiledGradient::eval(const double* x, double* out) const {
    for (int v = 0; v < nvars; ++v) out[v] = comps[v].eval(x);
}

double CompiledGradient::norm2(const double* x) const {
    double s = 0.0;
    for (int v = 0; v < nvars; ++v) {
        double g = comps[v].eval(x);
        s += g * g;
    }
    return s;
}

Isa detected_isa() {
#if defined(ELLIPSTAB_HAVE_AVX2)
    if (__builtin_cpu_supports("avx2")) return Isa::avx2;
#endif
    return Isa::scalar;
}

Isa active_isa() { return g_force_active ? g_forced : detected_isa(); }

void force_isa(Isa isa) {
    g_force_active = true;
    g_forced = isa == Isa::avx2 && detected_isa() != Isa::avx2 ? Isa::scalar : isa;
}

std::string isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void eval_batch_scalar(const CompiledPoly& p, const double* xs, std::size_t count, double* values) {
    double x[CompiledPoly::kMaxVars];
    for (std::size_t i = 0; i < count; ++i) {
        for (int v = 0; v < p.nvars; ++v) x[v] = xs[v * count + i];
        values[i] = p.eval(x);
    }
}

void grad_norm2_batch_scalar(const CompiledGradient& g, const double* xs, std::size_t count,
                             double* out) {
    double x[CompiledPoly::kMaxVars];
    for (std::size_t i = 0; i < count; ++i) {
        for (int v = 0; v < g.nvars; ++v) x[v] = xs[v * count + i];
        out[i] = g.norm2(x);
    }
}

void eval_batch(const CompiledPoly& p, const double* xs, std::size_t count, double* values) {
#if defined(ELLIPSTAB_HAVE_AVX2)
    if (active_isa() == Isa::avx2) {
        eval_batch_avx2(p, xs, count, values);
        return;
    }
#endif
    eval_batch_scalar(p, xs, count, values);
}

void grad_norm2_batch(const CompiledGradient& g, const double* xs, std::size_t count, double* out) {
#if defined(ELLIPSTAB_HAVE_AVX2)
    if (active_isa() == Isa::avx2) {
        grad_norm2_batch_avx2(g, xs, count, out);
        return;
    }
#endif
    grad_norm2_batch_scalar(g, xs, count, out);
}

}  // namespace ellipstab::kernels
