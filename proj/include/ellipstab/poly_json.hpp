#pragma once

#include <variant>

#include <json.hpp>

#include "ellipstab/polynomial.hpp"

namespace ellipstab {

using nlohmann::json;

// Canonical serialization:
//   {"nvars": n, "mode": "exact"|"float",
//    "terms": [{"exp": [...], "re": "p/q", "im": "p/q", "log2half": 0|1}, ...]}
// Terms are graded-lex sorted (the term map's iteration order), so emitting a
// parsed polynomial reproduces the canonical byte stream.

inline json to_json(const PolyEx& p) {
    json terms = json::array();
    for (const auto& [m, c] : p.terms()) {
        json exp = json::array();
        for (int v = 0; v < p.nvars(); ++v) exp.push_back(static_cast<int>(m.e[v]));
        if (!c.single_component())
            throw DomainError(
                "poly to_json: coefficient mixes 2^0 and 2^(1/2) parts; not representable "
                "in the exact term schema");
        bool root = c.re.is_zero() && c.im.is_zero() && !(c.re2.is_zero() && c.im2.is_zero());
        const Rational& re = root ? c.re2 : c.re;
        const Rational& im = root ? c.im2 : c.im;
        terms.push_back({{"exp", exp},
                         {"re", re.to_string()},
                         {"im", im.to_string()},
                         {"log2half", root ? 1 : 0}});
    }
    json j = {{"nvars", p.nvars()}, {"mode", "exact"}, {"terms", terms}};
    if (p.truncation()) j["truncated"] = *p.truncation();
    return j;
}

inline json to_json(const PolyF& p) {
    json terms = json::array();
    for (const auto& [m, c] : p.terms()) {
        json exp = json::array();
        for (int v = 0; v < p.nvars(); ++v) exp.push_back(static_cast<int>(m.e[v]));
        terms.push_back({{"exp", exp}, {"re", c.real()}, {"im", c.imag()}});
    }
    json j = {{"nvars", p.nvars()}, {"mode", "float"}, {"terms", terms}};
    if (p.truncation()) j["truncated"] = *p.truncation();
    return j;
}

namespace detail {

inline Monomial exp_from_json(const json& jexp, int nvars) {
    if (!jexp.is_array() || static_cast<int>(jexp.size()) != nvars)
        throw DomainError("poly from_json: exp length must equal nvars");
    Monomial m;
    for (int v = 0; v < nvars; ++v) {
        int e = jexp[v].get<int>();
        if (e < 0 || e > 255) throw DomainError("poly from_json: exponent out of range");
        m.e[v] = static_cast<std::uint8_t>(e);
    }
    return m;
}

inline Rational rational_from_json(const json& j) {
    if (j.is_string()) return Rational::parse(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<long long>());
    throw DomainError("poly from_json: exact coefficients must be rational strings");
}

}  // namespace detail

inline PolyEx exact_poly_from_json(const json& j) {
    PolyEx p(j.at("nvars").get<int>());
    for (const auto& t : j.at("terms")) {
        Monomial m = detail::exp_from_json(t.at("exp"), p.nvars());
        Rational re = detail::rational_from_json(t.at("re"));
        Rational im = detail::rational_from_json(t.at("im"));
        long long k = t.value("log2half", 0);
        // Split 2^(k/2) into 2^floor(k/2) * (sqrt2 if k odd).
        long long half = k >= 0 ? k / 2 : (k - 1) / 2;
        bool odd = k - 2 * half != 0;
        Rational scale = half >= 0 ? Rational(BigInt::pow(BigInt(2), static_cast<unsigned>(half)), BigInt(1))
                                   : Rational(BigInt(1), BigInt::pow(BigInt(2), static_cast<unsigned>(-half)));
        ExactComplex c = odd ? ExactComplex(Rational(0), Rational(0), re * scale, im * scale)
                             : ExactComplex(re * scale, im * scale);
        p.add_term(m, c);
    }
    if (j.contains("truncated")) p.set_truncation(j["truncated"].get<int>());
    return p;
}

inline PolyF float_poly_from_json(const json& j) {
    PolyF p(j.at("nvars").get<int>());
    for (const auto& t : j.at("terms")) {
        Monomial m = detail::exp_from_json(t.at("exp"), p.nvars());
        double re = t.at("re").is_string() ? Rational::parse(t["re"].get<std::string>()).to_double()
                                           : t.at("re").get<double>();
        double im = t.at("im").is_string() ? Rational::parse(t["im"].get<std::string>()).to_double()
                                           : t.at("im").get<double>();
        double scale = std::pow(2.0, 0.5 * t.value("log2half", 0));
        p.add_term(m, std::complex<double>(re * scale, im * scale));
    }
    if (j.contains("truncated")) p.set_truncation(j["truncated"].get<int>());
    return p;
}

using AnyPoly = std::variant<PolyEx, PolyF>;

inline AnyPoly poly_from_json(const json& j) {
    std::string mode = j.value("mode", "exact");
    if (mode == "exact") return exact_poly_from_json(j);
    if (mode == "float") return float_poly_from_json(j);
    throw DomainError("poly from_json: mode must be \"exact\" or \"float\"");
}

}  // namespace ellipstab
