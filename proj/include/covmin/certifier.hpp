#pragma once

// End-to-end certification of a minimum-modulus bound: (C0) by Rankin's
// trick, the stage-0 bias bound, (C1) stage by stage, the bias recursion and
// the closure of the induction beyond the last checked stage.

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "covmin/directed_real.hpp"
#include "covmin/errors.hpp"
#include "covmin/integer.hpp"
#include "covmin/prime_estimates.hpp"
#include "covmin/primes.hpp"

namespace covmin {

enum class ExponentMode { Infinite, Squarefree };
enum class TailMode { Ratio, Cumulative };

inline const char* to_string(ExponentMode m) {
  return m == ExponentMode::Infinite ? "infinite" : "squarefree";
}
inline const char* to_string(TailMode m) { return m == TailMode::Ratio ? "ratio" : "cumulative"; }

/// One certification attempt. P_i = e^{p0_log + i * stage_step}.
struct Schedule {
  BigInt M = 1;
  Rational p0_log = 11;
  Rational stage_step = 1;
  Rational lambda_exp = 2;
  Rational pi_good = Rational(1, 2);
  Rational delta = Rational(2, 5);
  Rational sigma = Rational(9, 50);
  std::vector<unsigned> k_set{3};
  ExponentMode exponent_mode = ExponentMode::Infinite;
  TailMode tail_mode = TailMode::Ratio;
  Rational numeric_cap_log = 14;  // stages with P_{i+1} <= e^cap use the prime table
  unsigned tail_horizon = 8;      // analytic stages stepped in cumulative mode

  Rational stage_start(std::size_t i) const { return p0_log + stage_step * static_cast<unsigned long>(i); }

  void validate() const {
    if (M < 1) throw ValidationError("M must be positive");
    if (p0_log < Rational(7, 10)) throw ValidationError("P_0 must be at least 2");
    if (stage_step <= 0) throw ValidationError("stage_step must be positive (thresholds not increasing)");
    if (lambda_exp <= 1) throw ValidationError("lambda_exp must exceed 1");
    if (pi_good <= 0 || pi_good >= 1) throw ValidationError("pi_good must lie in (0, 1)");
    if (delta <= 0 || delta >= 1) throw ValidationError("delta must lie in (0, 1)");
    if (sigma <= 0 || sigma >= 1) throw ValidationError("sigma must lie in (0, 1)");
    if (k_set.empty()) throw ValidationError("k_set must be non-empty");
    for (unsigned k : k_set)
      if (k < 1 || k > 16) throw ValidationError("moment orders must lie in [1, 16]");
    if (p0_log > 20) throw ValidationError("p0_log above 20 is out of sieve range");
    if (numeric_cap_log <= 0 || numeric_cap_log > 18)
      throw ValidationError("numeric_cap_log must lie in (0, 18]");
    if (tail_horizon > 10000) throw ValidationError("tail_horizon too large");
  }
};

/// The reference schedule: M = 10^18, P_i = e^{11+i}, e^lambda = 2,
/// pi = 1/2, delta = 0.4, sigma = 0.18, k = 3.
inline Schedule reference_schedule() {
  Schedule s;
  mpz_ui_pow_ui(s.M.get_mpz_t(), 10, 18);
  return s;
}

inline constexpr int kVerdictSlackBits = 64;

/// upper(a) + |upper(a)| 2^-64 < lower(b).
inline bool below_with_slack(const DirectedReal& a_upper, const DirectedReal& b_lower) {
  if (a_upper.direction() != Direction::Upper || b_lower.direction() != Direction::Lower)
    throw DirectionError("verdict comparison needs (upper, lower)");
  Mpfr t(std::max(a_upper.precision(), b_lower.precision()) + kVerdictSlackBits + 8);
  mpfr_abs(t.get(), a_upper.get(), MPFR_RNDU);
  mpfr_mul_2si(t.get(), t.get(), -kVerdictSlackBits, MPFR_RNDU);
  mpfr_add(t.get(), t.get(), a_upper.get(), MPFR_RNDU);
  return mpfr_less_p(t.get(), b_lower.get());
}

inline bool below_with_slack(const Enclosure& a, const Enclosure& b) {
  return below_with_slack(a.upper(), b.lower());
}

// --- (C0) -----------------------------------------------------------------

/// log prod_{p <= P0} (1 - p^{-(1-sigma)})^{-1}.
inline Enclosure rankin_euler_log(const Rational& p0_log, const Rational& sigma,
                                  const PrimeTable& table, mpfr_prec_t prec = default_precision()) {
  BigInt p0 = floor_exp(p0_log, prec);
  if (!fits_u64(p0) || to_u64(p0) > table.limit())
    throw ValidationError("prime table too small: need primes up to " + p0.get_str());
  const Enclosure s1 = Enclosure::exact(sigma - 1, prec);
  Enclosure acc = Enclosure::exact(0, prec);
  for (std::uint32_t p : table.range(1, to_u64(p0))) {
    Enclosure t = exp(s1 * log_integer(p, prec));
    acc = acc - log1p(-t);
  }
  return acc;
}

struct C0Result {
  Enclosure log_bound;
  Enclosure bound;  // M^{-sigma} prod (1 - p^{sigma-1})^{-1}
  bool pass = false;
};

inline C0Result c0_from_euler_log(const BigInt& M, const Rational& sigma, const Rational& delta,
                                  const Enclosure& euler_log) {
  mpfr_prec_t prec = euler_log.precision();
  C0Result r;
  r.log_bound = euler_log - Enclosure::exact(sigma, prec) * log(Enclosure::exact(Rational(M), prec));
  r.bound = exp(r.log_bound);
  r.pass = below_with_slack(r.bound, Enclosure::exact(delta, prec));
  return r;
}

inline C0Result rankin_c0(const BigInt& M, const Rational& p0_log, const Rational& sigma,
                          const Rational& delta, const PrimeTable& table,
                          mpfr_prec_t prec = default_precision()) {
  if (sigma <= 0 || sigma >= 1) throw ValidationError("sigma must lie in (0, 1)");
  if (M < 1) throw ValidationError("M must be positive");
  return c0_from_euler_log(M, sigma, delta, rankin_euler_log(p0_log, sigma, table, prec));
}

/// Smallest M passing (C0) given the Euler factor: exponential search then
/// bisection down to a single integer.
inline BigInt minimal_m_from_euler_log(const Rational& sigma, const Rational& delta,
                                       const Enclosure& euler_log) {
  auto pass = [&](const BigInt& m) { return c0_from_euler_log(m, sigma, delta, euler_log).pass; };
  BigInt lo = 0, hi = 1;
  while (!pass(hi)) {
    lo = hi;
    hi *= hi + 1;
    if (mpz_sizeinbase(hi.get_mpz_t(), 2) > 100000) throw ResourceError("no M passes (C0)");
  }
  while (hi - lo > 1) {
    BigInt mid = (lo + hi) / 2;
    (pass(mid) ? hi : lo) = mid;
  }
  return hi;
}

inline BigInt minimal_m(const Rational& p0_log, const Rational& sigma, const Rational& delta,
                        const PrimeTable& table, mpfr_prec_t prec = default_precision()) {
  return minimal_m_from_euler_log(sigma, delta, rankin_euler_log(p0_log, sigma, table, prec));
}

// --- stage-0 bias ----------------------------------------------------------

/// beta_k(0) <= ((1-delta)^{-1} prod_{p <= P0} sum_j ((j+1)^k - j^k)/p^j)^{1/k}.
inline Enclosure beta0_bound(unsigned k, const Rational& p0_log, const Rational& delta,
                             const PrimeTable& table, mpfr_prec_t prec = default_precision()) {
  if (delta >= 1 || delta <= 0) throw ValidationError("delta must lie in (0, 1)");
  if (k == 0) throw ValidationError("moment order must be at least 1");
  BigInt p0 = floor_exp(p0_log, prec);
  if (!fits_u64(p0) || to_u64(p0) > table.limit())
    throw ValidationError("prime table too small: need primes up to " + p0.get_str());
  Enclosure acc = -log(Enclosure::exact(1 - delta, prec));
  for (std::uint32_t p : table.range(1, to_u64(p0)))
    acc = acc + log(ell_series(k, Enclosure::exact(make_rational(u64{1}, u64{p}), prec)));
  return exp(acc / Enclosure::exact(static_cast<long>(k), prec));
}

// --- per-stage prime data --------------------------------------------------

struct StageBounds {
  std::size_t i = 0;
  Rational a, b;
  bool analytic = false;
  bool theta_range_ok = true;
  Enclosure prod1;
  std::map<unsigned, Enclosure> prod2;  // per k, per exponent mode
  std::map<unsigned, Enclosure> sum;    // sum 1/(p-1)^k
};

/// Memo of interval statistics keyed by (a, b, k, E, mode, method).
class StatsCache {
 public:
  using Key = std::tuple<std::string, std::string, unsigned, std::string, int, bool, long>;
  std::map<Key, StageBounds> entries;
};

/// Bounds for stage i: numeric when b <= numeric_cap_log, analytic otherwise
/// (which requires e^a >= 678407).
inline StageBounds stage_bounds(const Schedule& s, std::size_t i, const PrimeTable& table,
                                StatsCache* cache = nullptr, mpfr_prec_t prec = default_precision()) {
  StageBounds out;
  out.i = i;
  out.a = s.stage_start(i);
  out.b = s.stage_start(i + 1);
  out.analytic = out.b > s.numeric_cap_log;
  for (unsigned k : s.k_set) {
    StatsCache::Key key{out.a.get_str(), out.b.get_str(), k, s.lambda_exp.get_str(),
                        static_cast<int>(s.exponent_mode), out.analytic, static_cast<long>(prec)};
    StageBounds part;
    if (cache && cache->entries.count(key)) {
      part = cache->entries.at(key);
    } else if (!out.analytic) {
      IntervalPrimeStats st = interval_prime_stats(out.a, out.b, k, s.lambda_exp, table, prec);
      part.prod1 = st.prod1;
      part.prod2[k] = s.exponent_mode == ExponentMode::Infinite ? st.prod2 : st.prod2_squarefree;
      part.sum[k] = st.sum_k;
    } else {
      AnalyticBounds an = analytic_interval_bounds(out.a, out.b, k, s.lambda_exp, false, prec);
      part.theta_range_ok = an.theta_bound_in_range;
      part.prod1 = an.prod1;
      part.prod2[k] = an.prod2;
      part.sum[k] = an.sum_k;
    }
    if (cache) cache->entries[key] = part;
    out.prod1 = part.prod1;
    out.theta_range_ok = part.theta_range_ok;
    out.prod2[k] = part.prod2.at(k);
    out.sum[k] = part.sum.at(k);
  }
  return out;
}

// --- (C1) ------------------------------------------------------------------

struct C1Result {
  std::size_t i = 0;
  DirectedReal lhs_upper{Direction::Upper};
  DirectedReal rhs_lower{Direction::Lower};
  std::map<unsigned, DirectedReal> rhs_lower_by_k;
  std::map<unsigned, bool> pass_by_k;
  bool rhs_unbounded = false;  // empty prime interval
  unsigned best_k = 0;
  bool pass = false;
};

/// lhs = prod (1 + E/(p-1)); rhs = (1 - 1/E)/E max_k (1-pi)^{1/k} / beta_k(i)
/// * (sum 1/(p-1)^k)^{-1/k}.
inline C1Result c1_check(std::size_t i, const std::map<unsigned, DirectedReal>& beta_upper,
                         const Schedule& s, const StageBounds& bounds,
                         mpfr_prec_t prec = default_precision()) {
  C1Result out;
  out.i = i;
  out.lhs_upper = bounds.prod1.upper();
  const DirectedReal c = DirectedReal::from_rational((1 - 1 / s.lambda_exp) / s.lambda_exp,
                                                     Direction::Lower, prec);
  bool first = true;
  for (unsigned k : s.k_set) {
    const DirectedReal& sum_up = bounds.sum.at(k).upper();
    if (mpfr_sgn(sum_up.get()) <= 0) {
      out.rhs_unbounded = true;
      out.best_k = k;
      out.pass = true;
      out.pass_by_k[k] = true;
      continue;
    }
    DirectedReal one_minus_pi = DirectedReal::from_rational(1 - s.pi_good, Direction::Lower, prec);
    DirectedReal rhs = c * root(one_minus_pi, k) * reciprocal(beta_upper.at(k)) *
                       reciprocal(root(sum_up, k));
    out.pass_by_k[k] = below_with_slack(out.lhs_upper, rhs);
    if (first || rhs.compare_raw(out.rhs_lower) > 0) {
      if (!out.rhs_unbounded) out.best_k = k;
      out.rhs_lower = rhs;
      first = false;
    }
    out.rhs_lower_by_k.emplace(k, rhs);
  }
  if (!out.rhs_unbounded) out.pass = below_with_slack(out.lhs_upper, out.rhs_lower);
  return out;
}

/// (prod2 / pi)^{1/k}, the per-stage multiplier of beta_k.
inline Enclosure growth_factor(unsigned k, const Enclosure& prod2, const Rational& pi_good) {
  if (pi_good <= 0 || pi_good > 1) throw ValidationError("pi_good must lie in (0, 1]");
  return root(prod2 * Enclosure::exact(1 / pi_good, prod2.precision()), k);
}

// --- certificate -----------------------------------------------------------

struct StageRecord {
  std::size_t i = 0;
  Rational a, b;
  std::string method;  // numeric | analytic
  C1Result c1;
  std::map<unsigned, DirectedReal> beta_upper;    // beta_k(i)
  std::map<unsigned, DirectedReal> growth_upper;  // beta_k(i+1) / beta_k(i)
};

struct TailRecord {
  std::string mode;
  std::size_t base_index = 0;
  unsigned k = 0;
  DirectedReal growth_upper{Direction::Upper};
  DirectedReal rhs_growth_lower{Direction::Lower};
  bool pass = false;
};

struct Certificate {
  Schedule schedule;
  mpfr_prec_t precision = 128;
  std::optional<C0Result> c0;
  std::map<unsigned, DirectedReal> beta0_upper;
  std::vector<StageRecord> stages;
  std::optional<std::size_t> analytic_from;  // first analytic stage
  std::optional<TailRecord> tail;
  bool certified = false;
  std::string reason;
};

namespace detail {

inline Certificate fail(Certificate c, std::string why) {
  c.certified = false;
  c.reason = std::move(why);
  return c;
}

// For one k: C1 holds at this stage and G_k < e^{(k-1) s / k}. Every analytic
// bound (prod1, prod2, and sum_k scaled by (k-1) a e^{(k-1)a}) is decreasing
// in a, so beta_k(i) s_k(i)^{1/k} then decreases from here on while the lhs
// does too.
inline std::optional<TailRecord> ratio_test(const Schedule& s, const StageRecord& st,
                                            mpfr_prec_t prec) {
  std::optional<TailRecord> best;
  for (unsigned k : s.k_set) {
    if (k < 2 || !st.c1.pass_by_k.at(k)) continue;
    TailRecord t;
    t.mode = to_string(s.tail_mode);
    t.base_index = st.i;
    t.k = k;
    t.growth_upper = st.growth_upper.at(k);
    Enclosure rate = exp(Enclosure::exact(s.stage_step * (k - 1) / k, prec));
    t.rhs_growth_lower = rate.lower();
    t.pass = below_with_slack(t.growth_upper, t.rhs_growth_lower);
    if (!best || (t.pass && !best->pass)) best = t;
    if (t.pass) break;
  }
  return best;
}

}  // namespace detail

inline BigInt required_table_limit(const Schedule& s) {
  Rational top = s.p0_log;
  for (std::size_t i = 0;; ++i) {
    if (s.stage_start(i + 1) > s.numeric_cap_log) break;
    top = s.stage_start(i + 1);
  }
  return floor_exp(top);
}

/// Runs the full pipeline. Invalid schedules throw; every later failure is
/// reported in the verdict.
inline Certificate certify(const Schedule& s, const PrimeTable& table, StatsCache* cache = nullptr) {
  s.validate();
  const mpfr_prec_t prec = default_precision();
  Certificate cert;
  cert.schedule = s;
  cert.precision = prec;
  try {
    cert.c0 = rankin_c0(s.M, s.p0_log, s.sigma, s.delta, table, prec);
    if (!cert.c0->pass) return detail::fail(cert, "(C0) fails: Rankin bound not below delta");

    std::map<unsigned, DirectedReal> beta;
    for (unsigned k : s.k_set) {
      beta.emplace(k, beta0_bound(k, s.p0_log, s.delta, table, prec).upper());
      cert.beta0_upper.emplace(k, beta.at(k));
    }

    std::size_t last = 0;
    for (std::size_t i = 0;; ++i) {
      StageBounds sb = stage_bounds(s, i, table, cache, prec);
      if (sb.analytic && !sb.theta_range_ok)
        return detail::fail(cert, "stage " + std::to_string(i) +
                                      " is past the numeric cap and starts below e^a = 678407");
      if (sb.analytic && !cert.analytic_from) {
        cert.analytic_from = i;
        last = s.tail_mode == TailMode::Ratio ? i : i + s.tail_horizon;
      }
      StageRecord st;
      st.i = i;
      st.a = sb.a;
      st.b = sb.b;
      st.method = sb.analytic ? "analytic" : "numeric";
      st.beta_upper = beta;
      st.c1 = c1_check(i, beta, s, sb, prec);
      for (unsigned k : s.k_set)
        st.growth_upper.emplace(k, growth_factor(k, sb.prod2.at(k), s.pi_good).upper());
      cert.stages.push_back(st);
      if (!st.c1.pass) return detail::fail(cert, "(C1) fails at stage " + std::to_string(i));
      for (unsigned k : s.k_set) beta.at(k) = beta.at(k) * st.growth_upper.at(k);
      if (cert.analytic_from && i == last) break;
      if (i > 100000) return detail::fail(cert, "no analytic stage reached");
    }

    cert.tail = detail::ratio_test(s, cert.stages.back(), prec);
    if (!cert.tail) return detail::fail(cert, "tail closure: no k >= 2 passes (C1) at the base stage");
    if (!cert.tail->pass)
      return detail::fail(cert, "tail closure: beta growth not below rhs growth");
  } catch (const ValidationError& e) {
    return detail::fail(cert, e.what());
  } catch (const ResourceError& e) {
    return detail::fail(cert, e.what());
  }
  cert.certified = true;
  cert.reason = "";
  return cert;
}

/// Re-evaluates the schedule at higher precision and compares every verdict.
inline bool recheck(const Certificate& cert, const PrimeTable& table, mpfr_prec_t prec) {
  ScopedPrecision guard(prec);
  Certificate again = certify(cert.schedule, table);
  if (again.certified != cert.certified) return false;
  if (cert.c0.has_value() != again.c0.has_value()) return false;
  if (cert.c0 && cert.c0->pass != again.c0->pass) return false;
  if (cert.stages.size() != again.stages.size()) return false;
  for (std::size_t j = 0; j < cert.stages.size(); ++j)
    if (cert.stages[j].c1.pass != again.stages[j].c1.pass) return false;
  if (cert.tail.has_value() != again.tail.has_value()) return false;
  if (cert.tail && cert.tail->pass != again.tail->pass) return false;
  return true;
}

/// Checks the inequalities stored in a certificate against each other,
/// without recomputing any bound.
inline bool stored_inequalities_hold(const Certificate& cert) {
  if (!cert.c0 || !cert.tail) return false;
  mpfr_prec_t prec = cert.precision;
  if (!below_with_slack(cert.c0->bound, Enclosure::exact(cert.schedule.delta, prec))) return false;
  for (const auto& st : cert.stages)
    if (!st.c1.rhs_unbounded && !below_with_slack(st.c1.lhs_upper, st.c1.rhs_lower)) return false;
  for (std::size_t j = 0; j + 1 < cert.stages.size(); ++j)
    for (const auto& [k, b] : cert.stages[j].beta_upper)
      if (cert.stages[j + 1].beta_upper.at(k).compare_raw(b * cert.stages[j].growth_upper.at(k)) < 0)
        return false;
  return below_with_slack(cert.tail->growth_upper, cert.tail->rhs_growth_lower);
}

/// Table sized for a schedule.
inline PrimeTable prime_table_for(const Schedule& s) {
  return sieve_primes(to_u64(required_table_limit(s)) + 1);
}

}  // namespace covmin
