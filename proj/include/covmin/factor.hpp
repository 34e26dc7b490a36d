#pragma once

// Exact factorization of 64-bit integers: trial division by small primes,
// deterministic Miller-Rabin, Pollard-Brent for the remaining cofactor.

#include <algorithm>
#include <numeric>
#include <utility>
#include <vector>

#include "covmin/errors.hpp"
#include "covmin/integer.hpp"

namespace covmin {

struct PrimePower {
  u64 prime;
  unsigned exponent;
  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

struct Factorization {
  u64 n = 1;
  std::vector<PrimePower> prime_powers;  // ascending primes

  std::size_t omega() const { return prime_powers.size(); }
  bool squarefree() const {
    return std::all_of(prime_powers.begin(), prime_powers.end(),
                       [](const PrimePower& pp) { return pp.exponent == 1; });
  }
  std::vector<u64> primes() const {
    std::vector<u64> out;
    for (const auto& pp : prime_powers) out.push_back(pp.prime);
    return out;
  }
};

inline bool is_prime_u64(u64 n) {
  if (n < 2) return false;
  for (u64 p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
    u64 x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int r = 1; r < s; ++r) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

namespace detail {

// Brent's variant of Pollard rho. Returns a non-trivial factor of composite n.
inline u64 pollard_brent(u64 n, u64& work, u64 budget) {
  if (n % 2 == 0) return 2;
  for (u64 c = 1;; ++c) {
    u64 y = 2, r = 1, q = 1, g = 1, x = 0, ys = 0;
    const u64 m = 128;
    auto f = [&](u64 v) { return (mulmod(v, v, n) + c) % n; };
    do {
      x = y;
      for (u64 i = 0; i < r; ++i) y = f(y);
      u64 k = 0;
      do {
        ys = y;
        for (u64 i = 0; i < std::min(m, r - k); ++i) {
          y = f(y);
          q = mulmod(q, x > y ? x - y : y - x, n);
        }
        g = std::gcd(q, n);
        k += m;
        work += m;
        if (work > budget) throw ResourceError("factorization budget exceeded");
      } while (k < r && g == 1);
      r <<= 1;
    } while (g == 1);
    if (g == n) {
      do {
        ys = f(ys);
        g = std::gcd(x > ys ? x - ys : ys - x, n);
      } while (g == 1);
    }
    if (g != n) return g;
  }
}

inline void split_into(u64 n, std::vector<u64>& out, u64& work, u64 budget) {
  if (n == 1) return;
  if (is_prime_u64(n)) {
    out.push_back(n);
    return;
  }
  u64 d = pollard_brent(n, work, budget);
  split_into(d, out, work, budget);
  split_into(n / d, out, work, budget);
}

}  // namespace detail

/// Factorizes n >= 1. `budget` bounds the Pollard iterations.
inline Factorization factorize(u64 n, u64 budget = u64{1} << 32) {
  if (n == 0) throw ValidationError("factorize: n must be positive");
  Factorization f;
  f.n = n;
  std::vector<u64> primes;
  u64 rest = n;
  for (u64 p = 2; p < 1000 && p * p <= rest; p += (p == 2 ? 1 : 2)) {
    while (rest % p == 0) {
      primes.push_back(p);
      rest /= p;
    }
  }
  u64 work = 0;
  detail::split_into(rest, primes, work, budget);
  std::sort(primes.begin(), primes.end());
  for (u64 p : primes) {
    if (!f.prime_powers.empty() && f.prime_powers.back().prime == p) {
      ++f.prime_powers.back().exponent;
    } else {
      f.prime_powers.push_back({p, 1});
    }
  }
  return f;
}

/// All positive divisors of a factored number, ascending. Throws once more
/// than `limit` divisors would be produced.
inline std::vector<u64> divisors(const Factorization& f, u64 limit = u64{1} << 20) {
  std::vector<u64> divs{1};
  for (const auto& [p, e] : f.prime_powers) {
    std::size_t base = divs.size();
    if (base * (e + 1) > limit) throw ResourceError("divisor enumeration budget exceeded");
    u64 pk = 1;
    for (unsigned k = 1; k <= e; ++k) {
      pk *= p;
      for (std::size_t i = 0; i < base; ++i) divs.push_back(divs[i] * pk);
    }
  }
  std::sort(divs.begin(), divs.end());
  return divs;
}

inline std::size_t omega(u64 n) { return factorize(n).omega(); }

}  // namespace covmin
