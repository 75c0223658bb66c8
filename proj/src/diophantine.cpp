#include "ellipstab/diophantine.hpp"

#include <algorithm>
#include <cmath>

namespace ellipstab::dio {

namespace {

// Exact dyadic decomposition of a double, so float thresholds can be compared
// against quadratic irrationals without rounding at the boundary.
Rational rational_from_double(double x) {
    if (!std::isfinite(x)) throw DomainError("expected a finite real");
    if (x == 0.0) return Rational(0);
    int exp = 0;
    double m = std::frexp(x, &exp);  // x = m * 2^exp, |m| in [1/2,1)
    long long mant = static_cast<long long>(std::ldexp(m, 53));
    exp -= 53;
    Rational r{BigInt(mant), BigInt(1)};
    if (exp >= 0) return r * Rational(BigInt::pow(BigInt(2), static_cast<unsigned>(exp)), BigInt(1));
    return r * Rational(BigInt(1), BigInt::pow(BigInt(2), static_cast<unsigned>(-exp)));
}

std::vector<long long> normalize_sign(std::vector<long long> k) {
    for (long long v : k) {
        if (v > 0) break;
        if (v < 0) {
            for (auto& x : k) x = -x;
            break;
        }
    }
    return k;
}

}  // namespace

FrequencyVector FrequencyVector::rational(std::vector<Rational> vals) {
    FrequencyVector f;
    f.exact_ = true;
    for (auto& v : vals) {
        f.exacts_.emplace_back(std::move(v));
        f.floats_.push_back(f.exacts_.back().to_double());
    }
    f.validate();
    return f;
}

FrequencyVector FrequencyVector::quadratic(std::vector<QuadIrr> vals) {
    FrequencyVector f;
    f.exact_ = true;
    long long d = 0;
    for (auto& v : vals) {
        if (!v.is_rational()) {
            if (d == 0)
                d = v.d();
            else if (d != v.d())
                throw DomainError("FrequencyVector: all quadratic components must share one radicand");
        }
        f.floats_.push_back(v.to_double());
        f.exacts_.push_back(std::move(v));
    }
    f.validate();
    return f;
}

FrequencyVector FrequencyVector::floating(std::vector<double> vals) {
    FrequencyVector f;
    f.exact_ = false;
    f.floats_ = std::move(vals);
    f.validate();
    return f;
}

void FrequencyVector::validate() const {
    if (floats_.empty()) throw DomainError("FrequencyVector: needs at least one component");
    for (std::size_t i = 0; i < floats_.size(); ++i) {
        for (std::size_t j = i + 1; j < floats_.size(); ++j) {
            bool same = exact_ ? (exacts_[i] - exacts_[j]).is_zero() : floats_[i] == floats_[j];
            if (same)
                throw DomainError("FrequencyVector: components must be pairwise distinct "
                                  "(simple spectrum)");
        }
    }
}

FrequencyVector FrequencyVector::from_json(const json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "rational") {
        std::vector<Rational> vals;
        for (const auto& v : j.at("values"))
            vals.push_back(v.is_string() ? Rational::parse(v.get<std::string>())
                                         : Rational(v.get<long long>()));
        return rational(std::move(vals));
    }
    if (kind == "quadratic") {
        long long d = j.at("d").get<long long>();
        std::vector<QuadIrr> vals;
        for (const auto& v : j.at("values")) {
            Rational a = v.at("a").is_string() ? Rational::parse(v["a"].get<std::string>())
                                               : Rational(v["a"].get<long long>());
            Rational b = v.at("b").is_string() ? Rational::parse(v["b"].get<std::string>())
                                               : Rational(v["b"].get<long long>());
            vals.emplace_back(a, b, d);
        }
        return quadratic(std::move(vals));
    }
    if (kind == "float") {
        std::vector<double> vals = j.at("values").get<std::vector<double>>();
        return floating(std::move(vals));
    }
    throw DomainError("FrequencyVector: kind must be rational|quadratic|float");
}

json FrequencyVector::to_json() const {
    if (!exact_) return {{"kind", "float"}, {"values", floats_}};
    bool all_rational = true;
    long long d = 0;
    for (const auto& v : exacts_) {
        if (!v.is_rational()) {
            all_rational = false;
            d = v.d();
        }
    }
    if (all_rational) {
        json vals = json::array();
        for (const auto& v : exacts_) vals.push_back(v.rat().to_string());
        return {{"kind", "rational"}, {"values", vals}};
    }
    json vals = json::array();
    for (const auto& v : exacts_)
        vals.push_back({{"a", v.rat().to_string()}, {"b", v.coef().to_string()}});
    return {{"kind", "quadratic"}, {"d", d}, {"values", vals}};
}

QuadIrr FrequencyVector::dot_exact(const std::vector<long long>& k) const {
    if (!exact_) throw DomainError("dot_exact on float frequency vector");
    QuadIrr s;
    for (std::size_t j = 0; j < exacts_.size(); ++j) {
        if (k[j]) s += exacts_[j] * QuadIrr(Rational(k[j]));
    }
    return s;
}

double FrequencyVector::dot_double(const std::vector<long long>& k) const {
    double s = 0.0;
    for (std::size_t j = 0; j < floats_.size(); ++j) s += static_cast<double>(k[j]) * floats_[j];
    return s;
}

double FrequencyVector::norm() const {
    double s = 0.0;
    for (double v : floats_) s += v * v;
    return std::sqrt(s);
}

void for_each_shell_rep(int n, int shell,
                        const std::function<void(const std::vector<long long>&)>& fn) {
    std::vector<long long> k(n, 0);
    // Fill positions recursively with the |k|_1 budget; the first nonzero
    // entry is kept positive, so exactly one of {k,-k} is visited.
    std::function<void(int, int, bool)> rec = [&](int pos, int budget, bool leading) {
        if (pos == n - 1) {
            if (budget == 0) {
                k[pos] = 0;
                fn(k);
            } else {
                k[pos] = budget;
                fn(k);
                if (!leading) {
                    k[pos] = -budget;
                    fn(k);
                }
            }
            k[pos] = 0;
            return;
        }
        for (int a = budget; a >= -budget; --a) {
            if (leading && a < 0) break;
            k[pos] = a;
            rec(pos + 1, budget - std::abs(a), leading && a == 0);
            k[pos] = 0;
        }
    };
    rec(0, shell, true);
}

namespace {

struct ExactScan {
    bool have = false;
    QuadIrr min_abs;  // smallest |k.alpha| seen
    std::vector<long long> argmin;
};

// Scans one shell; throws on exact resonance.
void scan_shell_exact(const FrequencyVector& alpha, int shell, ExactScan& st) {
    for_each_shell_rep(alpha.n(), shell, [&](const std::vector<long long>& k) {
        QuadIrr v = alpha.dot_exact(k).abs();
        if (v.is_zero())
            throw ResonanceError("resonance k.alpha = 0 at |k|_1 = " + std::to_string(shell),
                                 normalize_sign(k));
        if (!st.have || (v < st.min_abs)) {
            st.have = true;
            st.min_abs = v;
            st.argmin = k;
        }
    });
}

struct FloatScan {
    bool have = false;
    double min_abs = 0.0;
    std::vector<long long> argmin;
};

void scan_shell_float(const FrequencyVector& alpha, int shell, FloatScan& st, double tol) {
    for_each_shell_rep(alpha.n(), shell, [&](const std::vector<long long>& k) {
        double v = std::abs(alpha.dot_double(k));
        if (v < tol)
            throw ResonanceError("resonance |k.alpha| below tolerance at |k|_1 = " +
                                     std::to_string(shell),
                                 normalize_sign(k));
        if (!st.have || v < st.min_abs) {
            st.have = true;
            st.min_abs = v;
            st.argmin = k;
        }
    });
}

}  // namespace

PsiResult psi(const FrequencyVector& alpha, int K) {
    if (K < 1) throw DomainError("psi: K must be >= 1");
    if (alpha.is_exact()) {
        ExactScan st;
        for (int s = 1; s <= K; ++s) scan_shell_exact(alpha, s, st);
        return {1.0 / st.min_abs.to_double(), normalize_sign(st.argmin)};
    }
    FloatScan st;
    double tol = 1e-12 * alpha.norm();
    for (int s = 1; s <= K; ++s) scan_shell_float(alpha, s, st, tol);
    return {1.0 / st.min_abs, normalize_sign(st.argmin)};
}

namespace {

// Successive-minimum records of |k.alpha| over the l1 ball for n = 2 exact
// vectors: value_k = |alpha_1| |q_k beta - p_k| becomes available at l1 cost
// cost_k = p_k + q_k (continued-fraction convergents of beta = alpha2/alpha1).
struct CfRecord {
    BigInt cost;
    QuadIrr value;
};

// Generates records in cost order until `enough(back)` holds or the expansion
// terminates. A rational beta is reported through `resonance` instead.
std::vector<CfRecord> cf_records(const FrequencyVector& alpha,
                                 const std::function<bool(const CfRecord&)>& enough,
                                 std::vector<long long>* resonance) {
    const QuadIrr a1 = alpha.exact_component(0);
    const QuadIrr a2 = alpha.exact_component(1);
    if (a1.is_zero()) throw ResonanceError("alpha_1 = 0", {1, 0});
    if (a2.is_zero()) throw ResonanceError("alpha_2 = 0", {0, 1});
    std::vector<CfRecord> recs;
    QuadIrr base = a1.abs();
    if ((a2.abs() - base).sign() < 0) base = a2.abs();
    recs.push_back({BigInt(1), base});

    QuadIrr beta = (a2 / a1).abs();
    if (beta.is_rational()) {
        if (resonance) {
            const Rational& b = beta.rat();
            long long p = b.num().fits_int64() ? b.num().to_int64() : 0;
            long long q = b.den().fits_int64() ? b.den().to_int64() : 0;
            int flip = (a2.to_double() / a1.to_double()) < 0 ? 1 : -1;
            *resonance = normalize_sign({p, flip * q});
        }
        return recs;
    }

    BigInt pk1(1), qk1(0);  // previous-previous convergent
    QuadIrr b = beta;
    BigInt pk = b.floor(), qk(1);
    QuadIrr err0 = (QuadIrr(Rational(qk, BigInt(1))) * beta - QuadIrr(Rational(pk, BigInt(1)))).abs();
    recs.push_back({pk.abs() + qk, a1.abs() * err0});
    QuadIrr frac = b - QuadIrr(Rational(pk, BigInt(1)));
    for (int iter = 0; iter < 300; ++iter) {
        if (enough(recs.back())) break;
        if (frac.is_zero()) break;  // unreachable for irrational beta
        b = frac.inverse();
        BigInt a = b.floor();
        frac = b - QuadIrr(Rational(a, BigInt(1)));
        BigInt pn = a * pk + pk1;
        BigInt qn = a * qk + qk1;
        pk1 = pk;
        qk1 = qk;
        pk = pn;
        qk = qn;
        QuadIrr err =
            (QuadIrr(Rational(qk, BigInt(1))) * beta - QuadIrr(Rational(pk, BigInt(1)))).abs();
        recs.push_back({pk.abs() + qk, a1.abs() * err});
    }
    return recs;
}

DeltaResult delta_from_records(std::vector<CfRecord> recs, const QuadIrr& x, long long cap) {
    std::sort(recs.begin(), recs.end(),
              [](const CfRecord& a, const CfRecord& b) { return a.cost < b.cost; });
    // Keep only strictly improving values in cost order.
    std::vector<CfRecord> mono;
    for (auto& r : recs) {
        if (!mono.empty() && !((r.value - mono.back().value).sign() < 0)) continue;
        mono.push_back(r);
    }
    DeltaResult out;
    BigInt best(0);
    const BigInt capb(cap);
    for (std::size_t i = 0; i < mono.size(); ++i) {
        if (mono[i].cost > capb) break;
        const BigInt& lo = mono[i].cost;
        // On this segment K Psi(K) <= x means K <= x * value.
        BigInt hi = (x * mono[i].value).floor();
        if (i + 1 < mono.size()) {
            BigInt seg_end = mono[i + 1].cost - BigInt(1);
            if (seg_end < hi) hi = seg_end;
        }
        if (capb < hi) {
            hi = capb;
            out.cap_truncated = true;
        }
        if (!(hi < lo) && best < hi) best = hi;
    }
    out.value = best.fits_int64() ? best.to_int64() : cap;
    return out;
}

}  // namespace

DeltaResult delta(const FrequencyVector& alpha, double x, long long cap) {
    if (!(x >= 0.0)) throw DomainError("delta: x must be non-negative");
    DeltaResult out;
    if (x <= 0.0) return out;

    if (alpha.is_exact() && alpha.n() == 2) {
        QuadIrr xq{rational_from_double(x)};
        std::vector<long long> resonance;
        auto enough = [&](const CfRecord& r) {
            // Later records cannot open feasible K beyond x * value(current).
            return ((xq * r.value) - QuadIrr(Rational(r.cost, BigInt(1)))).sign() < 0;
        };
        std::vector<CfRecord> recs = cf_records(alpha, enough, &resonance);
        if (resonance.empty()) return delta_from_records(std::move(recs), xq, cap);
        // Rational ratio: fall through to the incremental scan, which stops
        // at the resonance shell and flags truncation.
    }

    Rational xr = rational_from_double(x);
    ExactScan est;
    FloatScan fst;
    double tol = alpha.is_exact() ? 0.0 : 1e-12 * alpha.norm();
    for (long long K = 1; K <= cap; ++K) {
        try {
            if (alpha.is_exact())
                scan_shell_exact(alpha, static_cast<int>(K), est);
            else
                scan_shell_float(alpha, static_cast<int>(K), fst, tol);
        } catch (const ResonanceError& e) {
            out.resonance_truncated = true;
            out.resonance_witness = e.witness;
            return out;
        }
        // K Psi(K) is strictly increasing, so the first failure is final.
        bool ok;
        if (alpha.is_exact())
            ok = ((QuadIrr{xr} * est.min_abs) - QuadIrr(Rational(K))).sign() >= 0;
        else
            ok = static_cast<double>(K) / fst.min_abs <= x;
        if (!ok) return out;
        out.value = K;
    }
    out.cap_truncated = true;
    return out;
}

FitResult diophantine_fit(const FrequencyVector& alpha, double tau, int Kmax) {
    if (Kmax < 1) throw DomainError("diophantine_fit: Kmax must be >= 1");
    if (tau < alpha.n() - 1) throw DomainError("diophantine_fit: tau must be >= n-1");
    FitResult out;
    bool have = false;
    double tol = alpha.is_exact() ? 0.0 : 1e-12 * alpha.norm();
    for (int s = 1; s <= Kmax; ++s) {
        for_each_shell_rep(alpha.n(), s, [&](const std::vector<long long>& k) {
            double v;
            if (alpha.is_exact()) {
                QuadIrr q = alpha.dot_exact(k).abs();
                if (q.is_zero())
                    throw ResonanceError("resonance at |k|_1 = " + std::to_string(s),
                                         normalize_sign(k));
                v = q.to_double();
            } else {
                v = std::abs(alpha.dot_double(k));
                if (v < tol)
                    throw ResonanceError("resonance at |k|_1 = " + std::to_string(s),
                                         normalize_sign(k));
            }
            double g = v * std::pow(static_cast<double>(s), tau);
            if (!have || g < out.gamma) {
                have = true;
                out.gamma = g;
                out.minimizer = normalize_sign(k);
            }
        });
    }
    return out;
}

std::optional<std::vector<long long>> find_resonance(const FrequencyVector& alpha, int K) {
    if (K < 1) throw DomainError("find_resonance: K must be >= 1");
    double tol = 1e-12 * alpha.norm();
    for (int s = 1; s <= K; ++s) {
        std::optional<std::vector<long long>> hit;
        for_each_shell_rep(alpha.n(), s, [&](const std::vector<long long>& k) {
            if (hit) return;
            bool zero = alpha.is_exact() ? alpha.dot_exact(k).is_zero()
                                         : std::abs(alpha.dot_double(k)) < tol;
            if (zero) hit = normalize_sign(k);
        });
        if (hit) return hit;
    }
    return std::nullopt;
}

namespace {

// Nearest integer with exact halves rounded toward zero.
BigInt round_half_toward_zero(const Rational& r) {
    BigInt q, rem;
    BigInt::divmod(r.num(), r.den(), q, rem);
    if (!rem.is_zero() && r.sign() < 0) q -= BigInt(1);  // q = floor(r)
    Rational frac = r - Rational(q, BigInt(1));
    Rational half(1, 2);
    if (frac > half) return q + BigInt(1);
    if (frac < half) return q;
    return r.sign() > 0 ? q : q + BigInt(1);
}

}  // namespace

PeriodicVector dirichlet_approx(const std::vector<Rational>& v, const Rational& Q) {
    const int n = static_cast<int>(v.size());
    if (n < 1) throw DomainError("dirichlet_approx: empty vector");
    if (Q < Rational(1)) throw DomainError("dirichlet_approx: Q must be >= 1");
    bool all_zero = true;
    for (const auto& c : v) all_zero = all_zero && c.is_zero();
    if (all_zero) throw DomainError("dirichlet_approx: v must be nonzero");

    // Sup-norm component leads; ties break to the lowest index.
    int jstar = 0;
    for (int j = 1; j < n; ++j)
        if (v[j].abs() > v[jstar].abs()) jstar = j;
    const Rational A = v[jstar].abs();

    std::vector<Rational> x;
    x.reserve(n - 1);
    for (int j = 0; j < n; ++j)
        if (j != jstar) x.push_back(v[j] / A);

    // q ranges over 1..floor(Q^{n-1}); Minkowski guarantees a hit.
    Rational qpow = Rational::pow(Q, n - 1);
    BigInt qmax_b, rem;
    BigInt::divmod(qpow.num(), qpow.den(), qmax_b, rem);
    long long qmax = qmax_b.fits_int64() ? qmax_b.to_int64() : (1LL << 40);
    const Rational invQ = Q.inverse();

    std::vector<BigInt> p(x.size());
    bool found = false;
    BigInt q_found;
    for (long long q = 1; q <= qmax && !found; ++q) {
        bool ok = true;
        std::vector<BigInt> pc(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            Rational qx = x[i] * Rational(q);
            pc[i] = round_half_toward_zero(qx);
            if ((qx - Rational(pc[i], BigInt(1))).abs() > invQ) {
                ok = false;
                break;
            }
        }
        if (ok) {
            found = true;
            q_found = BigInt(q);
            p = std::move(pc);
        }
    }
    if (!found)
        throw InternalError("dirichlet_approx: no admissible q <= Q^(n-1); should not happen");

    // Reduce (q, p) by their gcd so T is the smallest positive multiplier.
    BigInt g = q_found;
    for (const auto& pi : p) g = BigInt::gcd(g, pi);
    if (!g.is_one() && !g.is_zero()) {
        q_found = q_found / g;
        for (auto& pi : p) pi = pi / g;
    }

    PeriodicVector out;
    out.exact = true;
    out.omega_exact.resize(n);
    out.omega_exact[jstar] = v[jstar];
    const Rational qr(q_found, BigInt(1));
    {
        std::size_t i = 0;
        for (int j = 0; j < n; ++j) {
            if (j == jstar) continue;
            out.omega_exact[j] = A * Rational(p[i], BigInt(1)) / qr;
            ++i;
        }
    }
    out.T_exact = qr / A;

    // Exact verification of both Lemma 4 inequalities.
    Rational err2(0), vnorm2(0);
    for (int j = 0; j < n; ++j) {
        Rational d = v[j] - out.omega_exact[j];
        err2 += d * d;
        vnorm2 += v[j] * v[j];
    }
    Rational t2 = out.T_exact * out.T_exact;
    if (err2 * t2 * Q * Q > Rational(n - 1))
        throw InternalError("dirichlet_approx: approximation bound violated");
    Rational tv2 = t2 * vnorm2;
    if (tv2 < Rational(1) || tv2 > Rational(n) * Rational::pow(Q, 2 * (n - 1)))
        throw InternalError("dirichlet_approx: period bound violated");

    out.T = out.T_exact.to_double();
    out.omega.resize(n);
    for (int j = 0; j < n; ++j) out.omega[j] = out.omega_exact[j].to_double();
    out.achieved = std::sqrt(err2.to_double());
    out.bound = std::sqrt(static_cast<double>(n - 1)) / (out.T * Q.to_double());
    return out;
}

PeriodicVector dirichlet_approx(const std::vector<double>& v, double Q) {
    // Float inputs are lifted exactly (doubles are dyadic rationals) and the
    // exact construction is reused; outputs are reported as doubles.
    std::vector<Rational> vr;
    vr.reserve(v.size());
    for (double c : v) vr.push_back(rational_from_double(c));
    PeriodicVector out = dirichlet_approx(vr, rational_from_double(Q));
    out.exact = false;
    out.omega_exact.clear();
    out.T_exact = Rational(0);
    return out;
}

json PeriodicVector::to_json() const {
    json j = {{"omega", omega}, {"T", T}, {"achieved", achieved}, {"bound", bound}};
    if (exact) {
        json oe = json::array();
        for (const auto& w : omega_exact) oe.push_back(w.to_string());
        j["omega_exact"] = oe;
        j["T_exact"] = T_exact.to_string();
    }
    return j;
}

PeriodicVector PeriodicVector::from_json(const json& j) {
    PeriodicVector p;
    p.omega = j.at("omega").get<std::vector<double>>();
    p.T = j.at("T").get<double>();
    p.achieved = j.value("achieved", 0.0);
    p.bound = j.value("bound", 0.0);
    if (j.contains("omega_exact")) {
        p.exact = true;
        for (const auto& s : j["omega_exact"])
            p.omega_exact.push_back(Rational::parse(s.get<std::string>()));
        p.T_exact = Rational::parse(j.at("T_exact").get<std::string>());
    }
    return p;
}

}  // namespace ellipstab::dio
