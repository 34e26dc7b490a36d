#pragma once

// Small integer and rational helpers shared by every module.

#include <gmpxx.h>

#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "covmin/errors.hpp"

namespace covmin {

using u64 = std::uint64_t;
using u128 = unsigned __int128;
using Rational = mpq_class;
using BigInt = mpz_class;

inline u64 mulmod(u64 a, u64 b, u64 m) {
  return static_cast<u64>(static_cast<u128>(a) * b % m);
}

inline u64 powmod(u64 base, u64 exp, u64 m) {
  u64 result = 1 % m;
  base %= m;
  while (exp > 0) {
    if (exp & 1) result = mulmod(result, base, m);
    base = mulmod(base, base, m);
    exp >>= 1;
  }
  return result;
}

/// Inverse of a modulo m; requires gcd(a, m) = 1.
inline u64 invmod(u64 a, u64 m) {
  if (m == 1) return 0;
  __int128 t = 0, new_t = 1;
  __int128 r = m, new_r = a % m;
  while (new_r != 0) {
    __int128 q = r / new_r;
    __int128 tmp = t - q * new_t;
    t = new_t;
    new_t = tmp;
    tmp = r - q * new_r;
    r = new_r;
    new_r = tmp;
  }
  if (r != 1) throw ValidationError("invmod: arguments not coprime");
  if (t < 0) t += m;
  return static_cast<u64>(t);
}

/// lcm(a, b) or 0 on overflow of 64 bits.
inline u64 lcm_checked(u64 a, u64 b) {
  u64 g = std::gcd(a, b);
  u128 l = static_cast<u128>(a / g) * b;
  if (l > UINT64_MAX) return 0;
  return static_cast<u64>(l);
}

inline BigInt to_big(u64 v) {
  BigInt out;
  mpz_import(out.get_mpz_t(), 1, 1, sizeof(v), 0, 0, &v);
  return out;
}

inline bool fits_u64(const BigInt& v) {
  return sgn(v) >= 0 && mpz_sizeinbase(v.get_mpz_t(), 2) <= 64;
}

inline u64 to_u64(const BigInt& v) {
  if (!fits_u64(v)) throw ResourceError("integer does not fit in 64 bits");
  u64 out = 0;
  mpz_export(&out, nullptr, 1, sizeof(out), 0, 0, v.get_mpz_t());
  return out;
}

inline Rational make_rational(long long num, long long den) {
  Rational q(BigInt(static_cast<long>(num)), BigInt(static_cast<long>(den)));
  q.canonicalize();
  return q;
}

inline Rational make_rational(u64 num, u64 den) {
  Rational q(to_big(num), to_big(den));
  q.canonicalize();
  return q;
}

/// Exact fraction string "p/q"; integers print without a denominator.
inline std::string fraction_string(const Rational& q) {
  if (q.get_den() == 1) return q.get_num().get_str();
  return q.get_num().get_str() + "/" + q.get_den().get_str();
}

/// Parses "p/q", an integer, or a finite decimal such as "0.18" or "1e-3"
/// into an exact rational.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw ValidationError("empty rational literal");
  try {
    if (auto slash = s.find('/'); slash != std::string::npos) {
      Rational q(BigInt(s.substr(0, slash), 10), BigInt(s.substr(slash + 1), 10));
      if (q.get_den() == 0) throw ValidationError("zero denominator in '" + s + "'");
      q.canonicalize();
      return q;
    }
    long exp10 = 0;
    if (auto e = s.find_first_of("eE"); e != std::string::npos) {
      exp10 = std::stol(s.substr(e + 1));
      s = s.substr(0, e);
    }
    bool negative = false;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
      negative = s[0] == '-';
      s = s.substr(1);
    }
    std::string digits;
    for (char c : s) {
      if (c == '.') {
        if (digits.find('.') != std::string::npos) throw ValidationError("bad number");
        digits.push_back(c);
      } else if (c >= '0' && c <= '9') {
        digits.push_back(c);
      } else {
        throw ValidationError("bad number");
      }
    }
    auto dot = digits.find('.');
    if (dot != std::string::npos) {
      exp10 -= static_cast<long>(digits.size() - dot - 1);
      digits.erase(dot, 1);
    }
    if (digits.empty()) throw ValidationError("bad number");
    Rational q{BigInt(digits, 10)};
    BigInt scale;
    mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(exp10 < 0 ? -exp10 : exp10));
    if (exp10 < 0) q /= scale; else q *= scale;
    q.canonicalize();
    return negative ? Rational(-q) : q;
  } catch (const std::invalid_argument&) {
    throw ValidationError("cannot parse rational literal '" + std::string(text) + "'");
  }
}

inline Rational pow_rational(const Rational& base, unsigned exp) {
  Rational out(1);
  for (unsigned i = 0; i < exp; ++i) out *= base;
  return out;
}

}  // namespace covmin
