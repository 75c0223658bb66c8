#pragma once

#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>
#include <stdexcept>
#include <compare>

namespace ellipstab {

// Arbitrary-precision signed integer, base 2^32 little-endian limbs.
// Sized for exact normal-form coefficients at desk scale, not for crypto.
class BigInt {
  public:
    BigInt() = default;
    BigInt(long long v);
    explicit BigInt(const std::string& decimal);

    static BigInt from_uint64(std::uint64_t v);

    bool is_zero() const { return limbs_.empty(); }
    bool is_negative() const { return sign_ < 0; }
    bool is_one() const { return sign_ > 0 && limbs_.size() == 1 && limbs_[0] == 1; }
    int sign() const { return sign_; }

    BigInt operator-() const;
    BigInt& negate();
    BigInt abs() const;

    friend BigInt operator+(const BigInt& a, const BigInt& b);
    friend BigInt operator-(const BigInt& a, const BigInt& b);
    friend BigInt operator*(const BigInt& a, const BigInt& b);
    // Truncated toward zero, like C integer division.
    friend BigInt operator/(const BigInt& a, const BigInt& b);
    friend BigInt operator%(const BigInt& a, const BigInt& b);
    static void divmod(const BigInt& a, const BigInt& b, BigInt& q, BigInt& r);

    BigInt& operator+=(const BigInt& o) { *this = *this + o; return *this; }
    BigInt& operator-=(const BigInt& o) { *this = *this - o; return *this; }
    BigInt& operator*=(const BigInt& o) { *this = *this * o; return *this; }

    static BigInt gcd(BigInt a, BigInt b);
    static BigInt pow(const BigInt& base, unsigned exp);

    std::strong_ordering operator<=>(const BigInt& o) const;
    bool operator==(const BigInt& o) const = default;

    // Magnitude comparison, ignoring signs.
    static int cmp_abs(const BigInt& a, const BigInt& b);

    double to_double() const;
    // Throws std::overflow_error if the value does not fit.
    long long to_int64() const;
    bool fits_int64() const;
    std::string to_string() const;

    std::size_t limb_count() const { return limbs_.size(); }

  private:
    // Invariant: no leading zero limb; sign_ == 0 iff limbs_ empty.
    int sign_ = 0;
    std::vector<std::uint32_t> limbs_;

    void trim();
    static std::vector<std::uint32_t> add_mag(const std::vector<std::uint32_t>& a,
                                              const std::vector<std::uint32_t>& b);
    static std::vector<std::uint32_t> sub_mag(const std::vector<std::uint32_t>& a,
                                              const std::vector<std::uint32_t>& b);
    static int cmp_mag(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b);
    static std::vector<std::uint32_t> mul_mag(const std::vector<std::uint32_t>& a,
                                              const std::vector<std::uint32_t>& b);
    static void divmod_mag(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b,
                           std::vector<std::uint32_t>& q, std::vector<std::uint32_t>& r);
};

}  // namespace ellipstab
