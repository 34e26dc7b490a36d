#pragma once

// Certified estimates over primes in (e^a, e^b]: numeric products and sums
// from a prime table, and the analytic bounds by partial summation against
// |theta(x) - x| < x / (40 log x).

#include <array>
#include <cmath>
#include <vector>

#include "covmin/directed_real.hpp"
#include "covmin/errors.hpp"
#include "covmin/integer.hpp"
#include "covmin/primes.hpp"

namespace covmin {

/// ell_k(p^j) = (j+1)^k - j^k.
inline BigInt ell_prime_power(unsigned k, unsigned j) {
  BigInt a, b;
  mpz_ui_pow_ui(a.get_mpz_t(), j + 1, k);
  mpz_ui_pow_ui(b.get_mpz_t(), j, k);
  return a - b;
}

namespace detail {

// Eulerian polynomial coefficients: sum_{j>=0} ((j+1)^k - j^k) x^j
// = A_k(x) / (1 - x)^k.
inline const std::vector<long>& eulerian_coefficients(unsigned k) {
  static const std::array<std::vector<long>, 6> table = {{
      {1},
      {1},
      {1, 1},
      {1, 4, 1},
      {1, 11, 11, 1},
      {1, 26, 66, 26, 1},
  }};
  return table.at(k);
}

inline Enclosure closed_form_series(unsigned k, const Enclosure& x) {
  const auto& coeffs = eulerian_coefficients(k);
  mpfr_prec_t prec = x.precision();
  Enclosure num = Enclosure::exact(coeffs.back(), prec);
  for (std::size_t i = coeffs.size() - 1; i-- > 0;)
    num = num * x + Enclosure::exact(coeffs[i], prec);
  Enclosure one_minus = Enclosure::exact(1, prec) - x;
  return num / pow(one_minus, k);
}

// sum_{j=0}^{J} d_j x^j plus the tail bound: for j > J,
// d_j <= k (j+1)^{k-1}, and consecutive bound terms shrink by at most
// ((J+3)/(J+2))^{k-1} x.
inline Enclosure truncated_series(unsigned k, const Enclosure& x) {
  mpfr_prec_t prec = x.precision();
  double xd = mpfr_get_d(x.upper().get(), MPFR_RNDU);
  Enclosure sum = Enclosure::exact(0, prec);
  Enclosure power = Enclosure::exact(1, prec);
  unsigned j = 0;
  for (;; ++j) {
    sum = sum + Enclosure::exact(Rational(ell_prime_power(k, j)), prec) * power;
    power = power * x;
    double next_bound = k * std::pow(j + 2.0, k - 1.0) * std::pow(xd, j + 1.0);
    double ratio = std::pow((j + 3.0) / (j + 2.0), k - 1.0) * xd;
    if (ratio < 0.75 && next_bound < std::ldexp(1.0, -static_cast<int>(prec) - 8)) break;
    if (j > 100000) throw ResourceError("series truncation did not converge");
  }
  Enclosure ratio = pow(Enclosure::exact(make_rational(static_cast<u64>(j + 3), static_cast<u64>(j + 2)), prec),
                        k - 1) * x;
  if (mpfr_cmp_ui(ratio.upper().get(), 1) >= 0) throw InvariantViolation("tail ratio not below 1");
  Enclosure lead = Enclosure::exact(static_cast<long>(k), prec) *
                   pow(Enclosure::exact(static_cast<long>(j + 2), prec), k - 1) * power;
  Enclosure tail_hi = lead / (Enclosure::exact(1, prec) - ratio);
  Enclosure tail = Enclosure::from_bounds(DirectedReal::from_int(0, Direction::Lower, prec),
                                          tail_hi.upper());
  return sum + tail;
}

}  // namespace detail

/// sum_{j>=0} ((j+1)^k - j^k) x^j for 0 <= x <= 1/2: closed form for k <= 5,
/// truncation with a certified tail beyond.
inline Enclosure ell_series(unsigned k, const Enclosure& x) {
  if (k == 0) throw ValidationError("moment order must be at least 1");
  if (!x.nonneg() || mpfr_cmp_d(x.upper().get(), 0.5) > 0)
    throw ValidationError("ell_series needs 0 <= x <= 1/2");
  return k <= 5 ? detail::closed_form_series(k, x) : detail::truncated_series(k, x);
}

inline Enclosure ell_series_tail(unsigned k, const Enclosure& x) {
  return ell_series(k, x) - Enclosure::exact(1, x.precision());
}

/// Integer endpoints of (e^a, e^b]: floor(e^a), floor(e^b).
struct PrimeInterval {
  BigInt lo;
  BigInt hi;
};

inline BigInt floor_exp(const Rational& a, mpfr_prec_t prec = default_precision()) {
  for (mpfr_prec_t p = prec; p <= 8 * prec; p *= 2) {
    BigInt out;
    if (exp_rational(a, p).decided_floor(out)) return out;
  }
  throw ResourceError("cannot decide floor(e^a) at available precision");
}

inline PrimeInterval prime_interval(const Rational& a, const Rational& b) {
  if (b <= a) throw ValidationError("interval needs a < b");
  return {floor_exp(a), floor_exp(b)};
}

struct IntervalPrimeStats {
  Rational a, b;
  unsigned k = 3;
  std::size_t prime_count = 0;
  Enclosure prod1;       // prod (1 + E/(p-1))
  Enclosure prod2;       // prod (1 + E sum_{j>=1} ((j+1)^k - j^k)/p^j)
  Enclosure prod2_squarefree;  // prod (1 + E (2^k - 1)/p)
  Enclosure sum_k;       // sum 1/(p-1)^k
};

/// Numeric statistics over primes e^a < p <= e^b.
inline IntervalPrimeStats interval_prime_stats(const Rational& a, const Rational& b, unsigned k,
                                               const Rational& lambda_exp, const PrimeTable& table,
                                               mpfr_prec_t prec = default_precision()) {
  if (k == 0) throw ValidationError("moment order must be at least 1");
  if (lambda_exp <= 0) throw ValidationError("e^lambda must be positive");
  PrimeInterval iv = prime_interval(a, b);
  if (!fits_u64(iv.hi) || to_u64(iv.hi) > table.limit())
    throw ValidationError("prime table too small: need primes up to " + iv.hi.get_str());
  IntervalPrimeStats s;
  s.a = a;
  s.b = b;
  s.k = k;
  const Enclosure one = Enclosure::exact(1, prec);
  const Enclosure e_lambda = Enclosure::exact(lambda_exp, prec);
  const Enclosure sqf_coeff = Enclosure::exact(Rational(ell_prime_power(k, 1)), prec) * e_lambda;
  s.prod1 = one;
  s.prod2 = one;
  s.prod2_squarefree = one;
  s.sum_k = Enclosure::exact(0, prec);
  for (std::uint32_t p : table.range(to_u64(iv.lo), to_u64(iv.hi))) {
    ++s.prime_count;
    Enclosure pm1 = Enclosure::exact(static_cast<long>(p) - 1, prec);
    Enclosure inv_p = Enclosure::exact(make_rational(u64{1}, u64{p}), prec);
    s.prod1 = s.prod1 * (one + e_lambda / pm1);
    s.prod2 = s.prod2 * (one + e_lambda * ell_series_tail(k, inv_p));
    s.prod2_squarefree = s.prod2_squarefree * (one + sqf_coeff * inv_p);
    s.sum_k = s.sum_k + pow(pm1, k).reciprocal();
  }
  return s;
}

/// Integer-n form: primes in (e^n, e^{n+1}].
inline IntervalPrimeStats interval_prime_stats(long n, unsigned k, const Rational& lambda_exp,
                                               const PrimeTable& table,
                                               mpfr_prec_t prec = default_precision()) {
  if (n < 1) throw ValidationError("n must be at least 1");
  return interval_prime_stats(Rational(n), Rational(n + 1), k, lambda_exp, table, prec);
}

/// Analytic bounds for primes in (e^a, e^b] by partial summation.
struct AnalyticBounds {
  Rational a, b;
  unsigned k = 3;
  bool theta_bound_in_range = true;  // e^a >= 678407
  Enclosure integral;     // bound on sum 1/p = int dtheta(x)/(x log x)
  Enclosure log_prod1;
  Enclosure prod1;
  Enclosure log_prod2;
  Enclosure prod2;
  Enclosure sum_k;        // bound on sum 1/(p-1)^k
  Enclosure sum_k_coefficient;  // sum_k * (k-1) a e^{(k-1)a}, for k >= 2
};

/// The partial-summation chain for an arbitrary interval (e^a, e^b]:
///   int dtheta/(x log x) <= log(b/a) + 1/(40 b^2) + 1/(40 a^2) + log(b/a)/(20 a)
///   log prod1 <= E/(1 - e^-a) * integral
///   log prod2 <= E * g_k(e^-a) * integral, g_k(x) = (S_k(x) - 1)/x increasing
///   sum 1/(p-1)^k <= (1 - e^-a)^-k / a * [ (1 + k/(40a)) int_{e^a}^{e^b} x^-k dx
///                     + 1/(40 b e^{(k-1)b}) + 1/(40 a e^{(k-1)a}) ]
/// The error term is only valid for e^a >= 678407; below that the result
/// is flagged and the caller decides (require_theta_range throws instead).
inline AnalyticBounds analytic_interval_bounds(const Rational& a, const Rational& b, unsigned k,
                                               const Rational& lambda_exp,
                                               bool require_theta_range = true,
                                               mpfr_prec_t prec = default_precision()) {
  if (k == 0) throw ValidationError("moment order must be at least 1");
  if (b <= a) throw ValidationError("interval needs a < b");
  if (a < 2) throw ValidationError("analytic bounds need a >= 2");
  AnalyticBounds out;
  out.a = a;
  out.b = b;
  out.k = k;
  const Enclosure one = Enclosure::exact(1, prec);
  const Enclosure forty = Enclosure::exact(40, prec);
  const Enclosure ea = Enclosure::exact(a, prec);
  const Enclosure eb = Enclosure::exact(b, prec);
  const Enclosure e_lambda = Enclosure::exact(lambda_exp, prec);
  const Enclosure exp_a = exp(ea);
  out.theta_bound_in_range = mpfr_cmp_ui(exp_a.lower().get(), kThetaErrorThreshold) >= 0;
  if (require_theta_range && !out.theta_bound_in_range)
    throw ValidationError("analytic bounds need e^a >= 678407");

  const Enclosure log_ratio = log(eb / ea);
  out.integral = log_ratio + (forty * eb * eb).reciprocal() + (forty * ea * ea).reciprocal() +
                 log_ratio / (Enclosure::exact(20, prec) * ea);

  const Enclosure inv_exp_a = exp(-ea);
  const Enclosure one_minus = one - inv_exp_a;
  out.log_prod1 = e_lambda * out.integral / one_minus;
  out.prod1 = exp(out.log_prod1);

  const Enclosure g = ell_series_tail(k, inv_exp_a) / inv_exp_a;
  out.log_prod2 = e_lambda * g * out.integral;
  out.prod2 = exp(out.log_prod2);

  if (k == 1) {
    out.sum_k = out.integral / one_minus;
    out.sum_k_coefficient = Enclosure::exact(0, prec);
  } else {
    const Enclosure km1 = Enclosure::exact(static_cast<long>(k - 1), prec);
    const Enclosure kk = Enclosure::exact(static_cast<long>(k), prec);
    const Enclosure main_integral = (exp(-(km1 * ea)) - exp(-(km1 * eb))) / km1;
    const Enclosure bracket = main_integral * (one + kk / (forty * ea)) +
                              (forty * eb * exp(km1 * eb)).reciprocal() +
                              (forty * ea * exp(km1 * ea)).reciprocal();
    out.sum_k = bracket / (ea * pow(one_minus, k));
    out.sum_k_coefficient = out.sum_k * km1 * ea * exp(km1 * ea);
  }
  return out;
}

/// The n >= 13 regime with E = 2, k = 3 on (e^n, e^{n+1}]. For n = 13 the
/// interval starts below 678407, so theta_bound_in_range comes back false.
inline AnalyticBounds lemma_a1_analytic(long n, mpfr_prec_t prec = default_precision()) {
  if (n < 13) throw ValidationError("n < 13: use numeric path");
  return analytic_interval_bounds(Rational(n), Rational(n + 1), 3, Rational(2), false, prec);
}

}  // namespace covmin
