#include "ellipstab/steepness.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <limits>
#include <cmath>
#include <random>
#include <thread>

#include "ellipstab/errors.hpp"
#include "ellipstab/kernels.hpp"

namespace ellipstab::steep {

namespace {

constexpr double kRefuteTol = 1e-10;
constexpr double kInconclusiveC = 1e-8;
constexpr double kSafety = 1.0 - 1e-3;  // certificates quote a strict bound

void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, jobs);
    if (jobs == 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min(jobs, count); ++t) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

// P restricted to the subspace: P_Lambda(y) = P(B y), in l variables.
PolyF restrict_poly(const PolyF& P, const SubspaceSample& s) {
    std::vector<PolyF> images;
    images.reserve(P.nvars());
    for (int row = 0; row < P.nvars(); ++row) {
        PolyF img(s.l);
        for (int col = 0; col < s.l; ++col) {
            double c = s.entry(row, col);
            if (c != 0.0) {
                Monomial m;
                m.e[col] = 1;
                img.add_term(m, {c, 0.0});
            }
        }
        images.push_back(std::move(img));
    }
    return P.substitute(images);
}

double grad_norm_at(const kernels::CompiledGradient& g, const double* y) {
    return std::sqrt(std::max(0.0, g.norm2(y)));
}

// min_{||y||=eta} ||grad P_Lambda(y)||, dimension-specialized.
class InnerMinimizer {
  public:
    InnerMinimizer(const PolyF& restricted, int l, std::uint64_t seed)
        : l_(l), grad_(kernels::CompiledGradient::from_poly(restricted)), seed_(seed) {}

    double min_on_sphere(double eta) const {
        if (l_ == 1) {
            double y = eta, ym = -eta;
            return std::min(grad_norm_at(grad_, &y), grad_norm_at(grad_, &ym));
        }
        if (l_ == 2) return min_circle(eta);
        return min_multistart(eta);
    }

  private:
    int l_;
    kernels::CompiledGradient grad_;
    std::uint64_t seed_;

    double min_circle(double eta) const {
        constexpr int N = 4096;
        static thread_local std::vector<double> xs, out;
        xs.resize(2 * N);
        out.resize(N);
        for (int i = 0; i < N; ++i) {
            double th = 2 * M_PI * i / N;
            xs[i] = eta * std::cos(th);
            xs[N + i] = eta * std::sin(th);
        }
        kernels::grad_norm2_batch(grad_, xs.data(), N, out.data());
        int best = 0;
        for (int i = 1; i < N; ++i)
            if (out[i] < out[best]) best = i;
        // Golden-section refinement around the best grid angle.
        double lo = 2 * M_PI * (best - 1) / N, hi = 2 * M_PI * (best + 1) / N;
        auto val = [&](double th) {
            double y[2] = {eta * std::cos(th), eta * std::sin(th)};
            return grad_.norm2(y);
        };
        const double gr = 0.6180339887498949;
        double a = lo, b = hi, c = b - gr * (b - a), d = a + gr * (b - a);
        for (int it = 0; it < 40; ++it) {
            if (val(c) < val(d))
                b = d;
            else
                a = c;
            c = b - gr * (b - a);
            d = a + gr * (b - a);
        }
        return std::sqrt(std::max(0.0, std::min(val(0.5 * (a + b)), out[best])));
    }

    double min_multistart(double eta) const {
        std::mt19937_64 rng(seed_ ^ 0x9e3779b97f4a7c15ULL);
        std::normal_distribution<double> gauss;
        double best = std::numeric_limits<double>::infinity();
        std::vector<double> y(l_), g(l_), cand(l_);
        for (int start = 0; start < 64; ++start) {
            double nr = 0.0;
            for (int v = 0; v < l_; ++v) {
                y[v] = gauss(rng);
                nr += y[v] * y[v];
            }
            nr = std::sqrt(nr);
            for (int v = 0; v < l_; ++v) y[v] *= eta / nr;
            double f = grad_.norm2(y.data());
            double step = 0.25 * eta;
            // Projected descent on ||grad P||^2 with numeric tangent gradient.
            for (int it = 0; it < 200 && step > 1e-12 * eta; ++it) {
                numeric_gradient(y.data(), eta, g);
                // Project out the radial component.
                double rad = 0.0;
                for (int v = 0; v < l_; ++v) rad += g[v] * y[v];
                rad /= eta * eta;
                double tnorm = 0.0;
                for (int v = 0; v < l_; ++v) {
                    g[v] -= rad * y[v];
                    tnorm += g[v] * g[v];
                }
                if (std::sqrt(tnorm) < 1e-10 * std::max(1.0, f)) break;
                bool moved = false;
                while (step > 1e-14 * eta) {
                    double cn = 0.0;
                    for (int v = 0; v < l_; ++v) {
                        cand[v] = y[v] - step * g[v];
                        cn += cand[v] * cand[v];
                    }
                    cn = std::sqrt(cn);
                    for (int v = 0; v < l_; ++v) cand[v] *= eta / cn;
                    double fc = grad_.norm2(cand.data());
                    if (fc < f) {
                        y = cand;
                        f = fc;
                        moved = true;
                        step *= 1.3;
                        break;
                    }
                    step *= 0.5;
                }
                if (!moved) break;
            }
            best = std::min(best, f);
        }
        return std::sqrt(std::max(0.0, best));
    }

    void numeric_gradient(const double* y, double eta, std::vector<double>& g) const {
        double h = 1e-6 * eta;
        std::vector<double> yp(y, y + l_), ym(y, y + l_);
        for (int v = 0; v < l_; ++v) {
            yp[v] += h;
            ym[v] -= h;
            g[v] = (grad_.norm2(yp.data()) - grad_.norm2(ym.data())) / (2 * h);
            yp[v] = y[v];
            ym[v] = y[v];
        }
    }
};

double coef_scale(const PolyF& P) {
    double s = 0.0;
    for (const auto& [m, c] : P.terms()) s = std::max(s, std::abs(c));
    return s;
}

// Least-squares slope of log(margin) against log(xi), lowest decade first.
double loglog_slope(const MarginCurve& c, double xi_lo, double xi_hi) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < c.xi.size(); ++i) {
        if (c.xi[i] < xi_lo || c.xi[i] > xi_hi || c.margin[i] <= 0) continue;
        double x = std::log(c.xi[i]), y = std::log(c.margin[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return 0.0;
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

bool SubspaceSample::orthonormal(double tol) const {
    for (int a = 0; a < l; ++a) {
        for (int b = a; b < l; ++b) {
            double dot = 0.0;
            for (int r = 0; r < n; ++r) dot += entry(r, a) * entry(r, b);
            double want = a == b ? 1.0 : 0.0;
            if (std::abs(dot - want) > tol) return false;
        }
    }
    return true;
}

json SubspaceSample::to_json() const { return {{"n", n}, {"l", l}, {"basis", basis}}; }

SubspaceSample SubspaceSample::from_json(const json& j) {
    SubspaceSample s;
    s.n = j.at("n").get<int>();
    s.l = j.at("l").get<int>();
    s.basis = j.at("basis").get<std::vector<double>>();
    return s;
}

SubspaceSample coordinate_subspace(int n, const std::vector<int>& vars) {
    SubspaceSample s;
    s.n = n;
    s.l = static_cast<int>(vars.size());
    s.basis.assign(static_cast<std::size_t>(n) * s.l, 0.0);
    for (int col = 0; col < s.l; ++col) s.basis[col * n + vars[col]] = 1.0;
    return s;
}

SubspaceSample haar_subspace(int n, int l, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    SubspaceSample s;
    s.n = n;
    s.l = l;
    s.basis.assign(static_cast<std::size_t>(n) * l, 0.0);
    for (int col = 0; col < l; ++col) {
        std::vector<double> v(n);
        for (int r = 0; r < n; ++r) v[r] = gauss(rng);
        for (int prev = 0; prev < col; ++prev) {
            double dot = 0.0;
            for (int r = 0; r < n; ++r) dot += v[r] * s.basis[prev * n + r];
            for (int r = 0; r < n; ++r) v[r] -= dot * s.basis[prev * n + r];
        }
        double nr = 0.0;
        for (int r = 0; r < n; ++r) nr += v[r] * v[r];
        nr = std::sqrt(nr);
        for (int r = 0; r < n; ++r) s.basis[col * n + r] = v[r] / nr;
    }
    return s;
}

std::vector<double> log_grid(const GridSpec& spec) {
    if (!(spec.xi_min > 0) || !(spec.xi_max > spec.xi_min))
        throw DomainError("log_grid: need 0 < xi_min < xi_max");
    std::vector<double> g;
    double decades = std::log10(spec.xi_max / spec.xi_min);
    int count = std::max(2, static_cast<int>(std::ceil(decades * spec.points_per_decade)));
    for (int i = 0; i <= count; ++i)
        g.push_back(spec.xi_min * std::pow(spec.xi_max / spec.xi_min,
                                           static_cast<double>(i) / count));
    return g;
}

MarginCurve margin_curve(const PolyF& P, const SubspaceSample& Lambda,
                         const std::vector<double>& xi_grid) {
    if (Lambda.l < 1 || Lambda.l > P.nvars() - 1)
        throw DomainError("margin_curve: subspace dimension must lie in [1, n-1]");
    if (!P.degree_range(0, 1).is_zero())
        throw DomainError("margin_curve: polynomial must have no constant or linear part");
    if (!Lambda.orthonormal()) throw DomainError("margin_curve: basis is not orthonormal");

    PolyF restricted = restrict_poly(P, Lambda);
    InnerMinimizer inner(restricted, Lambda.l, 0xabcdef);
    MarginCurve out;
    out.xi = xi_grid;
    out.margin.resize(xi_grid.size());
    double running = 0.0;
    for (std::size_t i = 0; i < xi_grid.size(); ++i) {
        running = std::max(running, inner.min_on_sphere(xi_grid[i]));
        out.margin[i] = running;
    }
    return out;
}

namespace {

double curve_max(const MarginCurve& c) {
    double m = 0.0;
    for (double v : c.margin) m = std::max(m, v);
    return m;
}

bool curve_degenerate(const MarginCurve& c) { return curve_max(c) <= kRefuteTol; }

void reorthonormalize(SubspaceSample& s) {
    const int n = s.n;
    for (int col = 0; col < s.l; ++col) {
        for (int prev = 0; prev < col; ++prev) {
            double dot = 0.0;
            for (int r = 0; r < n; ++r) dot += s.basis[col * n + r] * s.basis[prev * n + r];
            for (int r = 0; r < n; ++r) s.basis[col * n + r] -= dot * s.basis[prev * n + r];
        }
        double nr = 0.0;
        for (int r = 0; r < n; ++r) nr += s.basis[col * n + r] * s.basis[col * n + r];
        nr = std::sqrt(nr);
        if (nr < 1e-12) {
            s.basis[col * n + (col % n)] = 1.0;
            nr = 1.0;
        }
        for (int r = 0; r < n; ++r) s.basis[col * n + r] /= nr;
    }
}

// Adversarial hunt for a degenerate restriction. P_Lambda == 0 is algebraic
// in the basis, so minimizing the smooth residual sum (coefficients of
// P_Lambda)^2 converges to machine precision where the cone-shaped margin
// objective would stall. Projected numeric-gradient descent with restarts.
std::optional<SubspaceSample> hunt_degenerate(const PolyF& P, int l, const SubspaceSample& start,
                                              std::uint64_t seed) {
    const int n = P.nvars();
    auto residual = [&](const SubspaceSample& s) {
        PolyF restricted = restrict_poly(P, s);
        double r = 0.0;
        for (const auto& [m, c] : restricted.terms()) r += std::norm(c);
        return r;
    };
    auto descend = [&](SubspaceSample s) {
        reorthonormalize(s);
        double f = residual(s);
        const int dims = n * l;
        std::vector<double> grad(dims);
        double step = 0.1;
        for (int it = 0; it < 600 && f > 1e-28; ++it) {
            const double h = std::max(1e-7, 1e-7 * std::sqrt(f));
            for (int d = 0; d < dims; ++d) {
                SubspaceSample sp = s, sm = s;
                sp.basis[d] += h;
                sm.basis[d] -= h;
                reorthonormalize(sp);
                reorthonormalize(sm);
                grad[d] = (residual(sp) - residual(sm)) / (2 * h);
            }
            double gn = 0.0;
            for (double g : grad) gn += g * g;
            gn = std::sqrt(gn);
            if (gn < 1e-18) break;
            bool moved = false;
            while (step > 1e-16) {
                SubspaceSample cand = s;
                for (int d = 0; d < dims; ++d) cand.basis[d] -= step / gn * grad[d];
                reorthonormalize(cand);
                double fc = residual(cand);
                if (fc < f) {
                    s = cand;
                    f = fc;
                    step *= 1.6;
                    moved = true;
                    break;
                }
                step *= 0.5;
            }
            if (!moved) break;
        }
        return std::pair<SubspaceSample, double>(s, f);
    };

    auto [best, fbest] = descend(start);
    std::mt19937_64 rng(seed);
    for (int restart = 0; restart < 8 && fbest > 1e-26; ++restart) {
        auto [s, f] = descend(haar_subspace(n, l, rng()));
        if (f < fbest) {
            fbest = f;
            best = s;
        }
    }
    if (fbest <= 1e-26) return best;
    return std::nullopt;
}

std::vector<SubspaceSample> coordinate_subspaces(int n, int l) {
    std::vector<SubspaceSample> out;
    std::vector<int> pick(l);
    std::function<void(int, int)> rec = [&](int from, int depth) {
        if (depth == l) {
            out.push_back(coordinate_subspace(n, pick));
            return;
        }
        for (int v = from; v < n; ++v) {
            pick[depth] = v;
            rec(v + 1, depth + 1);
        }
    };
    rec(0, 0);
    return out;
}

struct FitOutcome {
    int index = 1;      // fitted integer index for this curve
    double slope = 0.0;
    bool stable = true;
};

// Smallest integer index in [1, m-1] consistent with the small-xi slope; the
// fit is "stable" when per-decade slopes stay within 0.1 of it.
FitOutcome fit_curve_index(const MarginCurve& c, int m) {
    FitOutcome out;
    double lo = c.xi.front(), hi = c.xi.back();
    double low_decade = loglog_slope(c, lo, std::min(hi, lo * 10));
    out.slope = low_decade;
    int idx = static_cast<int>(std::lround(low_decade));
    idx = std::max(1, std::min(m - 1, idx));
    out.index = idx;
    for (double d = lo; d * 10 <= hi * 1.0001; d *= 10) {
        double s = loglog_slope(c, d, d * 10);
        // Later decades may bend toward smaller slopes as the running max
        // switches branch; they must not bend upward past the index.
        if (s > idx + 0.1 + 1e-12) out.stable = false;
    }
    return out;
}

struct DimensionScan {
    std::vector<SteepnessCertificate::Evidence> evidence;
    std::optional<SubspaceSample> refutation;
    double refuted_margin = 0.0;
    int p_l = 1;
    double C_l = 0.0;
};

DimensionScan scan_dimension(const PolyF& P, int l, const GridSpec& grid, int samples,
                             std::uint64_t seed, int jobs, std::optional<int> forced_index) {
    const int n = P.nvars();
    const int m = P.max_degree();
    std::vector<double> xi = log_grid(grid);
    std::vector<SubspaceSample> subs = coordinate_subspaces(n, l);
    for (int s = 0; s < samples; ++s)
        subs.push_back(haar_subspace(n, l, seed + 1315423911ULL * (l * 1000 + s)));

    DimensionScan out;
    out.evidence.resize(subs.size());
    parallel_for(static_cast<int>(subs.size()), jobs, [&](int i) {
        SteepnessCertificate::Evidence ev;
        ev.sample = subs[i];
        ev.curve = margin_curve(P, subs[i], xi);
        FitOutcome fit = fit_curve_index(ev.curve, m);
        ev.slope = fit.slope;
        ev.fitted_index = fit.index;
        out.evidence[i] = std::move(ev);
    });

    // Direct degeneracy among inspected samples.
    int weakest = 0;
    double weakest_val = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < out.evidence.size(); ++i) {
        double mx = curve_max(out.evidence[i].curve);
        if (curve_degenerate(out.evidence[i].curve)) {
            out.refutation = out.evidence[i].sample;
            out.refuted_margin = mx;
            return out;
        }
        if (mx < weakest_val) {
            weakest_val = mx;
            weakest = static_cast<int>(i);
        }
    }
    // Adversarial hunt from the weakest sample.
    if (auto w = hunt_degenerate(P, l, out.evidence[weakest].sample, seed + l)) {
        MarginCurve full = margin_curve(P, *w, xi);
        if (curve_degenerate(full)) {
            out.refutation = *w;
            out.refuted_margin = curve_max(full);
            return out;
        }
    }

    out.p_l = forced_index ? *forced_index : 1;
    if (!forced_index)
        for (const auto& ev : out.evidence) out.p_l = std::max(out.p_l, ev.fitted_index);
    double C = std::numeric_limits<double>::infinity();
    for (const auto& ev : out.evidence) {
        for (std::size_t i = 0; i < ev.curve.xi.size(); ++i) {
            double ratio = ev.curve.margin[i] / std::pow(ev.curve.xi[i], out.p_l);
            C = std::min(C, ratio);
        }
    }
    out.C_l = C * kSafety;
    return out;
}

SteepnessCertificate certify_impl(const PolyF& P, const GridSpec& grid, int samples,
                                  std::uint64_t seed, int jobs, std::optional<int> forced_index) {
    if (!P.degree_range(0, 1).is_zero())
        throw DomainError("certify: polynomial must lie in P_2(n,m)");
    if (P.nvars() < 2)
        throw DomainError("certify: proper subspaces need n >= 2");
    SteepnessCertificate cert;
    cert.n = P.nvars();
    cert.m = P.max_degree();
    cert.delta = grid.xi_max;
    cert.p.assign(std::max(0, cert.n - 1), 1);
    double C = std::numeric_limits<double>::infinity();
    for (int l = 1; l <= cert.n - 1; ++l) {
        DimensionScan scan = scan_dimension(P, l, grid, samples, seed, jobs, forced_index);
        for (auto& ev : scan.evidence) cert.evidence.push_back(std::move(ev));
        if (scan.refutation) {
            cert.verdict = Verdict::refuted;
            cert.witness = scan.refutation;
            cert.witness_margin = scan.refuted_margin;
            return cert;
        }
        cert.p[l - 1] = scan.p_l;
        C = std::min(C, scan.C_l);
    }
    cert.C = C;
    cert.verdict = C < kInconclusiveC ? Verdict::inconclusive : Verdict::certified;
    return cert;
}

PolyF perturb_coeffs(const PolyF& P, double radius, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-radius, radius);
    PolyF out = P;
    // Perturb every coefficient slot of P_2(n,m): all monomials of degree
    // 2..m, present or not.
    const int n = P.nvars();
    const int m = P.max_degree();
    std::function<void(Monomial&, int, int)> rec = [&](Monomial& mono, int var, int left) {
        if (var == n) {
            int d = mono.degree();
            if (d >= 2 && d <= m) out.add_term(mono, {u(rng), 0.0});
            return;
        }
        for (int e = 0; e <= left; ++e) {
            mono.e[var] = static_cast<std::uint8_t>(e);
            rec(mono, var + 1, left - e);
            mono.e[var] = 0;
        }
    };
    Monomial mono;
    rec(mono, 0, m);
    return out;
}

}  // namespace

std::string verdict_name(Verdict v) {
    switch (v) {
        case Verdict::certified: return "certified";
        case Verdict::refuted: return "refuted";
        default: return "inconclusive";
    }
}

SteepnessCertificate certify_steep(const PolyF& P, const GridSpec& grid, int samples,
                                   std::uint64_t seed, int jobs) {
    return certify_impl(P, grid, samples, seed, jobs, std::nullopt);
}

SteepnessCertificate certify_stably_steep(const PolyF& P, double radius, int perturbation_samples,
                                          const GridSpec& grid, int samples, std::uint64_t seed,
                                          int jobs) {
    if (!(radius > 0)) throw DomainError("certify_stably_steep: radius must be positive");
    const int m = P.max_degree();
    std::mt19937_64 rng(seed);
    SteepnessCertificate cert;
    cert.n = P.nvars();
    cert.m = m;
    cert.delta = grid.xi_max;
    cert.stable_radius = radius;
    cert.p.assign(std::max(0, cert.n - 1), m - 1);
    double C = std::numeric_limits<double>::infinity();
    for (int member = 0; member <= perturbation_samples; ++member) {
        PolyF Q = member == 0 ? P : perturb_coeffs(P, radius, rng);
        SteepnessCertificate sub = certify_impl(Q, grid, samples, seed + member, jobs, m - 1);
        if (member == 0) cert.evidence = sub.evidence;
        if (sub.verdict == Verdict::refuted) {
            cert.verdict = Verdict::refuted;
            cert.witness = sub.witness;
            cert.witness_margin = sub.witness_margin;
            return cert;
        }
        C = std::min(C, sub.C);
        cert.delta = std::min(cert.delta, sub.delta);
    }
    cert.C = C;
    cert.verdict = C < kInconclusiveC ? Verdict::inconclusive : Verdict::certified;
    return cert;
}

SteepnessCertificate certify_stably_expanding(const PolyF& Q, double radius,
                                              int perturbation_samples, const GridSpec& grid,
                                              std::uint64_t seed, int jobs) {
    (void)jobs;
    if (!(radius > 0)) throw DomainError("certify_stably_expanding: radius must be positive");
    if (!Q.degree_range(0, 1).is_zero())
        throw DomainError("certify_stably_expanding: polynomial must lie in P_2(l,m)");
    const int l = Q.nvars();
    const int m = Q.max_degree();
    std::vector<double> xi = log_grid(grid);
    std::mt19937_64 rng(seed);
    SteepnessCertificate cert;
    cert.n = l;
    cert.m = m;
    cert.delta = grid.xi_max;
    cert.stable_radius = radius;
    cert.p.assign(1, m - 1);
    double C = std::numeric_limits<double>::infinity();
    for (int member = 0; member <= perturbation_samples; ++member) {
        PolyF R = member == 0 ? Q : perturb_coeffs(Q, radius, rng);
        InnerMinimizer inner(R, l, seed + member);
        MarginCurve curve;
        curve.xi = xi;
        curve.margin.resize(xi.size());
        double running = 0.0;
        for (std::size_t i = 0; i < xi.size(); ++i) {
            running = std::max(running, inner.min_on_sphere(xi[i]));
            curve.margin[i] = running;
        }
        if (member == 0) {
            SteepnessCertificate::Evidence ev;
            ev.sample = coordinate_subspace(l, [&] {
                std::vector<int> all(l);
                for (int v = 0; v < l; ++v) all[v] = v;
                return all;
            }());
            ev.curve = curve;
            ev.slope = loglog_slope(curve, xi.front(), xi.back());
            ev.fitted_index = m - 1;
            cert.evidence.push_back(std::move(ev));
        }
        if (curve_degenerate(curve)) {
            cert.verdict = Verdict::refuted;
            cert.witness_margin = curve_max(curve);
            return cert;
        }
        for (std::size_t i = 0; i < xi.size(); ++i)
            C = std::min(C, curve.margin[i] / std::pow(xi[i], m - 1));
    }
    cert.C = C * kSafety;
    cert.verdict = cert.C < kInconclusiveC ? Verdict::inconclusive : Verdict::certified;
    return cert;
}

TaylorConstants taylor_steepness_constants(double varpi, double M, int p,
                                           const SteepnessCertificate& base, double rho) {
    if (base.verdict != Verdict::certified)
        throw DomainError("taylor_steepness_constants: base certificate is not certified");
    if (!(varpi > 0) || !(M > 0) || p < 3 || !(rho > 0))
        throw DomainError("taylor_steepness_constants: need varpi > 0, M > 0, p >= 3, rho > 0");
    double fact = 1.0;
    for (int i = 2; i <= p - 1; ++i) fact *= i;
    TaylorConstants out;
    out.kappa = varpi / 2;
    out.C = base.C / 2;
    out.delta_star = base.C / (2 * M * fact);
    out.delta = std::min(rho * rho / 4, out.delta_star);
    double mu_tilde = base.stable_radius > 0 ? base.stable_radius
                                             : std::numeric_limits<double>::infinity();
    out.mu_star = std::min(mu_tilde, std::sqrt(varpi / M));
    out.mu = std::min(rho / 2, out.mu_star);
    return out;
}

json SteepnessCertificate::to_json() const {
    json ev = json::array();
    for (const auto& e : evidence) {
        ev.push_back({{"sample", e.sample.to_json()},
                      {"slope", e.slope},
                      {"fitted_index", e.fitted_index},
                      {"xi", e.curve.xi},
                      {"margin", e.curve.margin}});
    }
    json j = {{"verdict", verdict_name(verdict)},
              {"n", n},
              {"m", m},
              {"kappa", kappa},
              {"C", C},
              {"delta", delta},
              {"p", p},
              {"stable_radius", stable_radius},
              {"caveat", caveat},
              {"evidence", ev}};
    if (witness) {
        j["witness"] = witness->to_json();
        j["witness_margin"] = witness_margin;
    }
    return j;
}

SteepnessCertificate SteepnessCertificate::from_json(const json& j) {
    SteepnessCertificate c;
    std::string v = j.at("verdict").get<std::string>();
    c.verdict = v == "certified" ? Verdict::certified
                                 : v == "refuted" ? Verdict::refuted : Verdict::inconclusive;
    c.n = j.at("n").get<int>();
    c.m = j.at("m").get<int>();
    c.kappa = j.value("kappa", 0.0);
    c.C = j.value("C", 0.0);
    c.delta = j.value("delta", 0.0);
    c.p = j.value("p", std::vector<int>{});
    c.stable_radius = j.value("stable_radius", 0.0);
    if (j.contains("witness")) c.witness = SubspaceSample::from_json(j["witness"]);
    c.witness_margin = j.value("witness_margin", 0.0);
    return c;
}

}  // namespace ellipstab::steep
