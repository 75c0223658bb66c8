#pragma once

#include <complex>
#include <map>
#include <optional>
#include <vector>

#include "ellipstab/errors.hpp"
#include "ellipstab/exact.hpp"
#include "ellipstab/monomial.hpp"

namespace ellipstab {

enum class Mode { exact, floating };

template <class C>
struct coeff_traits;

template <>
struct coeff_traits<ExactComplex> {
    static constexpr Mode mode = Mode::exact;
    static ExactComplex zero() { return {}; }
    static ExactComplex one() { return ExactComplex(Rational(1)); }
    static ExactComplex i() { return ExactComplex::i_unit(); }
    static ExactComplex inv_sqrt2() { return ExactComplex::inv_sqrt2(); }
    static ExactComplex from_rational(const Rational& r) { return ExactComplex(r); }
    static ExactComplex mul_int(const ExactComplex& c, long long k) {
        return c * ExactComplex(Rational(k));
    }
    static bool is_zero(const ExactComplex& c) { return c.is_zero(); }
    static double abs(const ExactComplex& c) { return c.abs(); }
    static std::complex<double> to_complex(const ExactComplex& c) { return c.to_complex(); }
};

template <>
struct coeff_traits<std::complex<double>> {
    static constexpr Mode mode = Mode::floating;
    static std::complex<double> zero() { return {0.0, 0.0}; }
    static std::complex<double> one() { return {1.0, 0.0}; }
    static std::complex<double> i() { return {0.0, 1.0}; }
    static std::complex<double> inv_sqrt2() { return {0.7071067811865476, 0.0}; }
    static std::complex<double> from_rational(const Rational& r) { return {r.to_double(), 0.0}; }
    static std::complex<double> mul_int(const std::complex<double>& c, long long k) {
        return c * static_cast<double>(k);
    }
    static bool is_zero(const std::complex<double>& c) { return c.real() == 0.0 && c.imag() == 0.0; }
    static double abs(const std::complex<double>& c) { return std::abs(c); }
    static std::complex<double> to_complex(const std::complex<double>& c) { return c; }
};

// Relative threshold below which float-mode coefficients are dropped,
// measured against the largest coefficient of the same degree.
inline constexpr double kFloatPrune = 1e-14;

// Sparse multivariate polynomial over C, immutable in spirit: operations
// return new values. Truncation degree, when set, is enforced on products.
template <class C>
class Poly {
  public:
    using Traits = coeff_traits<C>;
    using TermMap = std::map<Monomial, C, GradedLex>;

    Poly() : nvars_(0) {}
    explicit Poly(int nvars) : nvars_(nvars) { check_nvars(nvars); }

    static Poly zero(int nvars) { return Poly(nvars); }
    static Poly constant(int nvars, const C& c) {
        Poly p(nvars);
        if (!Traits::is_zero(c)) p.terms_.emplace(Monomial{}, c);
        return p;
    }
    static Poly variable(int nvars, int v, const C& c) {
        Poly p(nvars);
        Monomial m;
        m.e[v] = 1;
        if (!Traits::is_zero(c)) p.terms_.emplace(m, c);
        return p;
    }

    int nvars() const { return nvars_; }
    Mode mode() const { return Traits::mode; }
    bool is_zero() const { return terms_.empty(); }
    const TermMap& terms() const { return terms_; }
    std::size_t term_count() const { return terms_.size(); }
    std::optional<int> truncation() const { return trunc_; }

    void set_truncation(int d) {
        trunc_ = d;
        enforce_truncation();
    }
    void clear_truncation() { trunc_.reset(); }

    int max_degree() const { return terms_.empty() ? 0 : terms_.rbegin()->first.degree(); }
    int min_degree() const { return terms_.empty() ? 0 : terms_.begin()->first.degree(); }

    const C* coeff(const Monomial& m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? nullptr : &it->second;
    }

    void add_term(const Monomial& m, const C& c) {
        if (Traits::is_zero(c)) return;
        if (trunc_ && m.degree() > *trunc_) return;
        auto [it, fresh] = terms_.emplace(m, c);
        if (!fresh) {
            it->second += c;
            if (Traits::is_zero(it->second)) terms_.erase(it);
        }
    }

    friend Poly operator+(const Poly& a, const Poly& b) {
        a.check_same(b);
        Poly r = a;
        r.trunc_ = combine_trunc(a.trunc_, b.trunc_);
        for (const auto& [m, c] : b.terms_) r.add_term(m, c);
        r.enforce_truncation();
        r.prune();
        return r;
    }
    friend Poly operator-(const Poly& a, const Poly& b) {
        a.check_same(b);
        Poly r = a;
        r.trunc_ = combine_trunc(a.trunc_, b.trunc_);
        for (const auto& [m, c] : b.terms_) r.add_term(m, -c);
        r.enforce_truncation();
        r.prune();
        return r;
    }
    Poly operator-() const {
        Poly r = *this;
        for (auto& [m, c] : r.terms_) c = -c;
        return r;
    }
    Poly& operator+=(const Poly& o) { return *this = *this + o; }
    Poly& operator-=(const Poly& o) { return *this = *this - o; }

    Poly scaled(const C& s) const {
        Poly r(nvars_);
        r.trunc_ = trunc_;
        if (Traits::is_zero(s)) return r;
        for (const auto& [m, c] : terms_) {
            C v = c * s;
            if (!Traits::is_zero(v)) r.terms_.emplace(m, v);
        }
        r.prune();
        return r;
    }

    friend Poly operator*(const Poly& a, const Poly& b) {
        a.check_same(b);
        Poly r(a.nvars_);
        r.trunc_ = combine_trunc(a.trunc_, b.trunc_);
        for (const auto& [ma, ca] : a.terms_) {
            int da = ma.degree();
            for (const auto& [mb, cb] : b.terms_) {
                if (r.trunc_ && da + mb.degree() > *r.trunc_) continue;
                Monomial m = ma;
                m *= mb;
                r.add_term(m, ca * cb);
            }
        }
        r.prune();
        return r;
    }

    Poly derivative(int var) const {
        Poly r(nvars_);
        for (const auto& [m, c] : terms_) {
            if (!m.e[var]) continue;
            Monomial d = m;
            d.e[var] -= 1;
            r.add_term(d, Traits::mul_int(c, m.e[var]));
        }
        return r;
    }

    Poly homogeneous_part(int k) const {
        Poly r(nvars_);
        for (const auto& [m, c] : terms_) {
            if (m.degree() == k) r.terms_.emplace(m, c);
        }
        return r;
    }

    Poly degree_range(int lo, int hi) const {
        Poly r(nvars_);
        for (const auto& [m, c] : terms_) {
            int d = m.degree();
            if (d >= lo && d <= hi) r.terms_.emplace(m, c);
        }
        return r;
    }

    Poly truncated(int d) const {
        Poly r = degree_range(0, d);
        r.trunc_ = d;
        return r;
    }

    // Drops float-mode coefficients below kFloatPrune relative to the largest
    // coefficient of the same degree. No-op in exact mode.
    void prune() {
        if constexpr (Traits::mode == Mode::exact) return;
        if (terms_.empty()) return;
        std::map<int, double> degmax;
        for (const auto& [m, c] : terms_) {
            double& mx = degmax[m.degree()];
            mx = std::max(mx, Traits::abs(c));
        }
        for (auto it = terms_.begin(); it != terms_.end();) {
            if (Traits::abs(it->second) < kFloatPrune * degmax[it->first.degree()])
                it = terms_.erase(it);
            else
                ++it;
        }
    }

    double norm(int k) const {
        double s = 0.0;
        for (const auto& [m, c] : terms_)
            if (m.degree() == k) s += Traits::abs(c);
        return s;
    }

    std::map<int, double> norms_by_degree() const {
        std::map<int, double> r;
        for (const auto& [m, c] : terms_) r[m.degree()] += Traits::abs(c);
        return r;
    }

    double sup_norm_bound(double rho) const {
        if (!(rho > 0.0)) throw DomainError("sup_norm_bound: radius must be positive");
        double s = 0.0;
        for (const auto& [m, c] : norms_by_degree()) s += c * std::pow(rho, m);
        return s;
    }

    std::complex<double> eval(const std::vector<std::complex<double>>& z) const {
        if (static_cast<int>(z.size()) != nvars_)
            throw DimensionError("eval: point dimension mismatch");
        std::complex<double> s = 0.0;
        for (const auto& [m, c] : terms_) {
            std::complex<double> t = Traits::to_complex(c);
            for (int v = 0; v < nvars_; ++v)
                for (int k = 0; k < m.e[v]; ++k) t *= z[v];
            s += t;
        }
        return s;
    }

    // Substitutes images[v] for variable v. All images share a variable count.
    Poly substitute(const std::vector<Poly>& images) const {
        if (static_cast<int>(images.size()) != nvars_)
            throw DimensionError("substitute: need one image per variable");
        int out_vars = images.empty() ? 0 : images[0].nvars_;
        Poly r(out_vars);
        r.trunc_ = trunc_;
        // Memoized powers per variable.
        std::vector<std::vector<Poly>> pows(nvars_);
        auto power = [&](int v, int e) -> const Poly& {
            auto& pv = pows[v];
            if (pv.empty()) {
                Poly one = constant(out_vars, Traits::one());
                pv.push_back(one);
            }
            while (static_cast<int>(pv.size()) <= e) pv.push_back(pv.back() * images[v]);
            return pv[e];
        };
        for (const auto& [m, c] : terms_) {
            Poly t = constant(out_vars, c);
            for (int v = 0; v < nvars_ && !t.is_zero(); ++v) {
                if (m.e[v]) t = t * power(v, m.e[v]);
            }
            r += t;
        }
        r.enforce_truncation();
        r.prune();
        return r;
    }

    bool operator==(const Poly& o) const { return nvars_ == o.nvars_ && terms_ == o.terms_; }

  private:
    int nvars_;
    std::optional<int> trunc_;
    TermMap terms_;

    static void check_nvars(int n) {
        if (n < 0 || n > Monomial::kMaxVars)
            throw DimensionError("Poly: nvars out of range [0," +
                                 std::to_string(Monomial::kMaxVars) + "]");
    }
    void check_same(const Poly& o) const {
        if (nvars_ != o.nvars_) throw DimensionError("Poly: mismatched nvars");
    }
    static std::optional<int> combine_trunc(std::optional<int> a, std::optional<int> b) {
        if (a && b) return std::min(*a, *b);
        return a ? a : b;
    }
    void enforce_truncation() {
        if (!trunc_) return;
        for (auto it = terms_.begin(); it != terms_.end();) {
            if (it->first.degree() > *trunc_)
                it = terms_.erase(it);
            else
                ++it;
        }
    }

    template <class D>
    friend Poly<D> poisson_bracket(const Poly<D>&, const Poly<D>&);
};

// Canonical bracket with pairing (var j, var n+j):
//   {P,Q} = sum_j dP/dxi_j dQ/dxi_{n+j} - dP/dxi_{n+j} dQ/dxi_j.
template <class C>
Poly<C> poisson_bracket(const Poly<C>& p, const Poly<C>& q) {
    if (p.nvars() != q.nvars()) throw DimensionError("poisson_bracket: mismatched nvars");
    if (p.nvars() % 2 != 0) throw DimensionError("poisson_bracket: odd number of variables");
    const int n = p.nvars() / 2;
    Poly<C> r(p.nvars());
    auto trunc = [&] {
        auto a = p.truncation();
        auto b = q.truncation();
        if (a && b) return std::optional<int>(std::min(*a, *b));
        return a ? a : b;
    }();
    if (trunc) r.set_truncation(*trunc);
    for (const auto& [mp, cp] : p.terms()) {
        const int dp = mp.degree();
        for (const auto& [mq, cq] : q.terms()) {
            if (trunc && dp + mq.degree() - 2 > *trunc) continue;
            for (int j = 0; j < n; ++j) {
                const long long f = static_cast<long long>(mp.e[j]) * mq.e[n + j] -
                                    static_cast<long long>(mp.e[n + j]) * mq.e[j];
                if (!f) continue;
                Monomial m = mp;
                m *= mq;
                m.e[j] -= 1;
                m.e[n + j] -= 1;
                r.add_term(m, coeff_traits<C>::mul_int(cp * cq, f));
            }
        }
    }
    r.prune();
    return r;
}

// H(S(xi)) for the unitary complexification z_j=(xi_j+i xi_{n+j})/sqrt2,
// z_{n+j}=i(xi_j-i xi_{n+j})/sqrt2. Input lives in real (x,y) variables.
template <class C>
Poly<C> complexify(const Poly<C>& h) {
    using T = coeff_traits<C>;
    if (h.nvars() % 2 != 0) throw DimensionError("complexify: odd number of variables");
    const int n = h.nvars() / 2;
    const C is2 = T::inv_sqrt2();
    const C i = T::i();
    std::vector<Poly<C>> images;
    images.reserve(h.nvars());
    for (int j = 0; j < n; ++j) {
        Poly<C> img(h.nvars());
        img.add_term([&] { Monomial m; m.e[j] = 1; return m; }(), is2);
        img.add_term([&] { Monomial m; m.e[n + j] = 1; return m; }(), i * is2);
        images.push_back(std::move(img));
    }
    for (int j = 0; j < n; ++j) {
        Poly<C> img(h.nvars());
        img.add_term([&] { Monomial m; m.e[j] = 1; return m; }(), i * is2);
        img.add_term([&] { Monomial m; m.e[n + j] = 1; return m; }(), is2);
        images.push_back(std::move(img));
    }
    return h.substitute(images);
}

// Inverse change: xi_j=(x_j-i y_j)/sqrt2, xi_{n+j}=(y_j-i x_j)/sqrt2.
template <class C>
Poly<C> complexify_inverse(const Poly<C>& p) {
    using T = coeff_traits<C>;
    if (p.nvars() % 2 != 0) throw DimensionError("complexify_inverse: odd number of variables");
    const int n = p.nvars() / 2;
    const C is2 = T::inv_sqrt2();
    const C mi = -T::i();
    std::vector<Poly<C>> images;
    images.reserve(p.nvars());
    for (int j = 0; j < n; ++j) {
        Poly<C> img(p.nvars());
        img.add_term([&] { Monomial m; m.e[j] = 1; return m; }(), is2);
        img.add_term([&] { Monomial m; m.e[n + j] = 1; return m; }(), mi * is2);
        images.push_back(std::move(img));
    }
    for (int j = 0; j < n; ++j) {
        Poly<C> img(p.nvars());
        img.add_term([&] { Monomial m; m.e[j] = 1; return m; }(), mi * is2);
        img.add_term([&] { Monomial m; m.e[n + j] = 1; return m; }(), is2);
        images.push_back(std::move(img));
    }
    return p.substitute(images);
}

enum class ActionCoords { real, complexified };

// Lifts Q(I_1..I_n) to phase space: I_j = (x_j^2+y_j^2)/2 or I_j = i xi_j xi_{n+j}.
template <class C>
Poly<C> substitute_actions(const Poly<C>& q, ActionCoords coords) {
    using T = coeff_traits<C>;
    const int n = q.nvars();
    std::vector<Poly<C>> images;
    images.reserve(n);
    for (int j = 0; j < n; ++j) {
        Poly<C> img(2 * n);
        if (coords == ActionCoords::real) {
            const C half = T::from_rational(Rational(1, 2));
            img.add_term([&] { Monomial m; m.e[j] = 2; return m; }(), half);
            img.add_term([&] { Monomial m; m.e[n + j] = 2; return m; }(), half);
        } else {
            img.add_term([&] { Monomial m; m.e[j] = 1; m.e[n + j] = 1; return m; }(), T::i());
        }
        images.push_back(std::move(img));
    }
    return q.substitute(images);
}

using PolyEx = Poly<ExactComplex>;
using PolyF = Poly<std::complex<double>>;

inline PolyF to_float(const PolyEx& p) {
    PolyF r(p.nvars());
    if (p.truncation()) r.set_truncation(*p.truncation());
    for (const auto& [m, c] : p.terms()) r.add_term(m, c.to_complex());
    return r;
}

}  // namespace ellipstab
