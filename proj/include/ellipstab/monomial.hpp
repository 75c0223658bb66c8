#pragma once

#include <array>
#include <cstdint>
#include <numeric>
#include <string>

namespace ellipstab {

// Exponent multi-index. Fixed storage; nvars is carried by the polynomial.
struct Monomial {
    static constexpr int kMaxVars = 16;
    std::array<std::uint8_t, kMaxVars> e{};

    int degree() const {
        int d = 0;
        for (auto x : e) d += x;
        return d;
    }
    bool operator==(const Monomial& o) const { return e == o.e; }

    Monomial& operator*=(const Monomial& o) {
        for (int i = 0; i < kMaxVars; ++i) e[i] = static_cast<std::uint8_t>(e[i] + o.e[i]);
        return *this;
    }

    std::string to_string(int nvars) const {
        std::string s;
        for (int i = 0; i < nvars; ++i) {
            if (!e[i]) continue;
            s += "x" + std::to_string(i + 1);
            if (e[i] > 1) s += "^" + std::to_string(e[i]);
        }
        return s.empty() ? "1" : s;
    }
};

// Graded lexicographic order: total degree first, then lex with the earlier
// variable dominating. Gives canonical serialization and deterministic loops.
struct GradedLex {
    bool operator()(const Monomial& a, const Monomial& b) const {
        int da = a.degree(), db = b.degree();
        if (da != db) return da < db;
        for (int i = 0; i < Monomial::kMaxVars; ++i) {
            if (a.e[i] != b.e[i]) return a.e[i] > b.e[i];
        }
        return false;
    }
};

}  // namespace ellipstab
