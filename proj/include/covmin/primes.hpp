#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "covmin/directed_real.hpp"
#include "covmin/errors.hpp"
#include "covmin/integer.hpp"

namespace covmin {

/// All primes up to `limit`, ascending.
class PrimeTable {
 public:
  PrimeTable() = default;
  PrimeTable(u64 limit, std::vector<std::uint32_t> primes)
      : limit_(limit), primes_(std::move(primes)) {}

  u64 limit() const { return limit_; }
  std::size_t size() const { return primes_.size(); }
  std::span<const std::uint32_t> primes() const { return primes_; }

  /// pi(x) for x <= limit.
  std::size_t count_upto(u64 x) const {
    return static_cast<std::size_t>(
        std::upper_bound(primes_.begin(), primes_.end(), x) - primes_.begin());
  }

  /// Primes p with lo < p <= hi.
  std::span<const std::uint32_t> range(u64 lo, u64 hi) const {
    if (hi > limit_) throw ValidationError("prime table too small for requested range");
    if (hi <= lo) return {};
    auto first = std::upper_bound(primes_.begin(), primes_.end(), lo);
    auto last = std::upper_bound(primes_.begin(), primes_.end(), hi);
    return {first, last};
  }

 private:
  u64 limit_ = 1;
  std::vector<std::uint32_t> primes_;
};

/// Sieve of Eratosthenes over odd numbers.
inline PrimeTable sieve_primes(u64 limit, u64 cap = u64{1} << 32) {
  if (limit < 2) throw ValidationError("sieve limit must be at least 2");
  if (limit > cap) throw ResourceError("sieve limit exceeds configured cap");
  std::vector<std::uint32_t> primes{2};
  std::vector<bool> composite((limit - 1) / 2 + 1, false);  // index i <-> 2i+1
  for (u64 i = 1; 2 * i + 1 <= limit; ++i) {
    if (composite[i]) continue;
    u64 p = 2 * i + 1;
    primes.push_back(static_cast<std::uint32_t>(p));
    for (u64 j = p * p; j <= limit; j += 2 * p) composite[j / 2] = true;
  }
  return PrimeTable(limit, std::move(primes));
}

/// Enclosure of log p for an integer p >= 1.
inline Enclosure log_integer(u64 p, mpfr_prec_t prec = default_precision()) {
  return log(Enclosure::exact(Rational(to_big(p)), prec));
}

/// Enclosures of theta(x) = sum_{p <= x} log p for each x of an ascending
/// list, in one pass over the table.
inline std::vector<Enclosure> theta_many(std::span<const u64> xs, const PrimeTable& table,
                                         mpfr_prec_t prec = default_precision()) {
  if (!std::is_sorted(xs.begin(), xs.end())) throw ValidationError("theta grid must be ascending");
  if (!xs.empty() && xs.back() > table.limit())
    throw ValidationError("theta argument exceeds prime table limit");
  std::vector<Enclosure> out;
  Enclosure acc = Enclosure::exact(0, prec);
  auto primes = table.primes();
  std::size_t next = 0;
  for (u64 x : xs) {
    while (next < primes.size() && primes[next] <= x) acc = acc + log_integer(primes[next++], prec);
    out.push_back(acc);
  }
  return out;
}

inline Enclosure theta(u64 x, const PrimeTable& table, mpfr_prec_t prec = default_precision()) {
  u64 xs[] = {x};
  return theta_many(xs, table, prec).front();
}

inline constexpr u64 kThetaErrorThreshold = 678407;

/// x / (40 log x) without checking the range where it bounds |theta(x) - x|.
inline Enclosure theta_error_formula(const Enclosure& x) {
  return x / (log(x) * Enclosure::exact(40, x.precision()));
}

/// Upper bound x/(40 log x) on |theta(x) - x|, valid for x >= 678407.
inline DirectedReal theta_error_bound(const Enclosure& x) {
  if (mpfr_cmp_ui(x.lower().get(), kThetaErrorThreshold) < 0)
    throw ValidationError("x below RS validity threshold 678407");
  return theta_error_formula(x).upper();
}

inline DirectedReal theta_error_bound(u64 x, mpfr_prec_t prec = default_precision()) {
  return theta_error_bound(Enclosure::exact(Rational(to_big(x)), prec));
}

}  // namespace covmin
