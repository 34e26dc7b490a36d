#pragma once

// The staged sieve run exactly on small systems: fibre classification,
// measures mu_i, bias statistics and the lemmas relating them.

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "covmin/congruence.hpp"
#include "covmin/covering.hpp"
#include "covmin/errors.hpp"
#include "covmin/factor.hpp"
#include "covmin/filtration.hpp"
#include "covmin/integer.hpp"
#include "covmin/lll.hpp"
#include "covmin/prime_estimates.hpp"
#include "covmin/residue_set.hpp"

namespace covmin {

/// ell_k(m): number of k-tuples with lcm m.
inline BigInt ell_k(unsigned k, u64 m) {
  if (k == 0 || m == 0) throw ValidationError("ell_k needs k >= 1 and m >= 1");
  BigInt out = 1;
  for (const auto& pp : factorize(m).prime_powers) {
    out *= ell_prime_power(k, pp.exponent);
  }
  return out;
}

/// Stage i of a lab run: the support S_i = R*_{i-1} cap R_i mod Q_i and the
/// measure mu_i on it.
struct StageState {
  std::size_t i = 0;
  u64 q = 1;
  ResidueSet support;
  std::map<u64, Rational> mu;
  Rational lambda_exp = 2;

  Rational mass() const {
    Rational out = 0;
    for (const auto& [r, m] : mu) out += m;
    return out;
  }
};

struct LabConfig {
  u64 max_modulus = 100000;
  u64 divisor_limit = u64{1} << 12;
};

/// mu_0 uniform on R_0 = residues mod Q_0 missed by the Q_0-smooth congruences.
inline StageState initial_stage(const StageFiltration& filtration, const Rational& lambda_exp,
                                const LabConfig& config = {}) {
  if (filtration.modulus() > config.max_modulus)
    throw ResourceError("system modulus exceeds lab limit " + std::to_string(config.max_modulus));
  StageState s;
  s.i = 0;
  s.q = filtration.stage_modulus(0);
  s.lambda_exp = lambda_exp;
  s.support = uncovered_residues(CongruenceSystem(filtration.smooth_congruences(0)), s.q);
  if (s.support.empty()) throw ValidationError("R_0 is empty");
  Rational w = make_rational(u64{1}, static_cast<u64>(s.support.size()));
  s.support.for_each([&](u64 r) { s.mu.emplace(r, w); });
  return s;
}

/// The dilation sums of one fibre against 1 - 1/E.
inline bool good_fibre_test(const StageFiltration& filtration, const StageState& state, u64 r) {
  if (!state.support.contains(r)) throw ValidationError("fibre not in R*_{i-1} cap R_i");
  return fibre_weights(filtration, state.i, r, state.lambda_exp).dilation_ok;
}

/// Survivors of R_{i+1} in the fibre above r, as residues mod Q_{i+1}.
inline std::vector<u64> fibre_survivors(const StageFiltration& filtration, std::size_t i, u64 r) {
  u64 qi = filtration.stage_modulus(static_cast<int>(i));
  u64 qn = filtration.stage_modulus(static_cast<int>(i) + 1);
  std::vector<ResidueSet> events;
  for (u64 n : filtration.new_moduli(i)) events.push_back(event_set(filtration, i, n, r));
  std::vector<u64> out;
  for (u64 z = r; z < qn; z += qi) {
    bool hit = false;
    for (const auto& a : events)
      if (a.contains(z % a.modulus())) {
        hit = true;
        break;
      }
    if (!hit) out.push_back(z);
  }
  return out;
}

/// Uniformity of R_{i+1} over classes mod n inside the fibre above r.
inline bool well_distributed_test(const StageFiltration& filtration, const StageState& state,
                                  u64 r, const std::vector<u64>& survivors) {
  if (survivors.empty()) return false;
  for (u64 n : filtration.new_moduli(state.i)) {
    std::vector<u64> counts(n, 0);
    u64 top = 0;
    for (u64 z : survivors) top = std::max(top, ++counts[z % n]);
    Rational ratio = make_rational(top, static_cast<u64>(survivors.size()));
    if (ratio > lambda_power(state.lambda_exp, omega(n)) / n) return false;
  }
  (void)r;
  return true;
}

/// mu_{i+1}(z) = mu_i(z mod Q_i) / |survivors in that fibre|.
inline std::map<u64, Rational> mu_update(const StageState& state,
                                         const std::map<u64, std::vector<u64>>& survivors) {
  std::map<u64, Rational> out;
  for (const auto& [r, zs] : survivors) {
    if (zs.empty())
      throw InvariantViolation("good fibre " + std::to_string(r) + " has no survivors");
    Rational share = state.mu.at(r) / Rational(static_cast<unsigned long>(zs.size()));
    for (u64 z : zs) out.emplace(z, share);
  }
  return out;
}

struct FibreFailure {
  u64 r;
  std::vector<std::pair<u64, Rational>> failing_primes;  // (p, dilation sum)
};

struct StageResult {
  bool ok = true;
  std::string reason;
  std::size_t i = 0;
  ResidueSet r_star;
  Rational pi_good;
  std::vector<FibreFailure> failures;
  std::vector<u64> not_well_distributed;  // good fibres failing uniformity
  StageState next;
};

/// One stage: classify fibres of S_i, keep the good ones, sieve them by
/// N_{i+1} and push mu forward.
inline StageResult run_stage(const StageFiltration& filtration, const StageState& state) {
  if (state.support.empty()) throw ValidationError("R*_{i-1} cap R_i is empty");
  if (state.i + 1 >= filtration.stage_count()) throw ValidationError("no further stage");
  StageResult out;
  out.i = state.i;
  out.r_star = ResidueSet(state.q);
  std::map<u64, std::vector<u64>> survivors;
  Rational good_mass = 0;
  const Rational bound = 1 - 1 / state.lambda_exp;
  state.support.for_each([&](u64 r) {
    FibreWeights w = fibre_weights(filtration, state.i, r, state.lambda_exp);
    if (!w.dilation_ok) {
      FibreFailure f{r, {}};
      for (const auto& [p, s] : w.dilation_sums)
        if (s > bound) f.failing_primes.emplace_back(p, s);
      out.failures.push_back(std::move(f));
      return;
    }
    out.r_star.insert(r);
    good_mass += state.mu.at(r);
    auto zs = fibre_survivors(filtration, state.i, r);
    if (!well_distributed_test(filtration, state, r, zs)) out.not_well_distributed.push_back(r);
    survivors.emplace(r, std::move(zs));
  });
  out.pi_good = good_mass / state.mass();
  out.next.i = state.i + 1;
  out.next.q = filtration.stage_modulus(static_cast<int>(state.i) + 1);
  out.next.lambda_exp = state.lambda_exp;
  out.next.support = ResidueSet(out.next.q);
  if (out.pi_good == 0) {
    out.ok = false;
    out.reason = "no good fibres at stage " + std::to_string(state.i);
    return out;
  }
  out.next.mu = mu_update(state, survivors);
  for (const auto& [z, m] : out.next.mu) out.next.support.insert(z);
  return out;
}

/// max_b mu(S cap b mod m) for every m | Q_i, as integers over a common
/// denominator shared with the total mass.
struct ClassMaxima {
  std::vector<u64> moduli;
  std::vector<BigInt> top;
  BigInt total;
};

inline ClassMaxima class_maxima(const StageState& state, const LabConfig& config = {}) {
  ClassMaxima out;
  out.moduli = divisors(factorize(state.q), config.divisor_limit);
  BigInt den = 1;
  for (const auto& [r, w] : state.mu) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), w.get_den_mpz_t());
  std::vector<std::pair<u64, BigInt>> nums;
  nums.reserve(state.mu.size());
  out.total = 0;
  for (const auto& [r, w] : state.mu) {
    BigInt v = w.get_num() * (den / w.get_den());
    out.total += v;
    nums.emplace_back(r, std::move(v));
  }
  if (out.total == 0) throw ValidationError("measure has no mass");
  for (u64 m : out.moduli) {
    std::vector<BigInt> bucket(m, BigInt(0));
    for (const auto& [r, v] : nums) bucket[r % m] += v;
    out.top.push_back(*std::max_element(bucket.begin(), bucket.end()));
  }
  return out;
}

inline Rational bias_statistic(unsigned k, const ClassMaxima& cm) {
  BigInt acc = 0;
  for (std::size_t j = 0; j < cm.moduli.size(); ++j) acc += ell_k(k, cm.moduli[j]) * cm.top[j];
  Rational out(acc, cm.total);
  out.canonicalize();
  return out;
}

/// beta_k^k(i) = sum_{m | Q_i} ell_k(m) max_b mu(S cap b mod m) / mu(S).
inline Rational bias_statistic(unsigned k, const StageState& state, const LabConfig& config = {}) {
  return bias_statistic(k, class_maxima(state, config));
}

/// M_k^k(i, n) = sum_r mu(r) |A_{n,r}|^k / mu(S).
inline Rational moment(unsigned k, u64 n, const StageFiltration& filtration,
                       const StageState& state) {
  if (!filtration.is_new_modulus(state.i, n)) throw ValidationError("n is not a new modulus");
  Rational out = 0;
  for (const auto& [r, w] : state.mu) {
    Rational a(static_cast<unsigned long>(event_set(filtration, state.i, n, r).size()));
    out += w * pow_rational(a, k);
  }
  return out / state.mass();
}

struct TailCheck {
  Rational bound;     // beta_k^k / B^k * (sum w)^k
  Rational fraction;  // mu-share of fibres with sum w_n |A_{n,r}| > B
};

inline TailCheck convexity_tail(unsigned k, const std::map<u64, Rational>& weights,
                                const Rational& B, const StageFiltration& filtration,
                                const StageState& state, const LabConfig& config = {}) {
  if (B <= 0) throw ValidationError("B must be positive");
  Rational wsum = 0;
  for (const auto& [n, w] : weights) {
    if (w < 0) throw ValidationError("weights must be non-negative");
    if (!filtration.is_new_modulus(state.i, n)) throw ValidationError("weight on a non-new modulus");
    wsum += w;
  }
  if (wsum == 0) throw ValidationError("weights are all zero");
  TailCheck out;
  out.bound = bias_statistic(k, state, config) / pow_rational(B, k) * pow_rational(wsum, k);
  Rational bad = 0;
  for (const auto& [r, mu] : state.mu) {
    Rational s = 0;
    for (const auto& [n, w] : weights)
      if (w != 0)
        s += w * Rational(static_cast<unsigned long>(event_set(filtration, state.i, n, r).size()));
    if (s > B) bad += mu;
  }
  out.fraction = bad / state.mass();
  return out;
}

/// The dilation weights 1{p | n} E^{omega(n)} / n for one new prime p.
inline std::map<u64, Rational> dilation_weights(const StageFiltration& filtration, std::size_t i,
                                                u64 p, const Rational& lambda_exp) {
  std::map<u64, Rational> out;
  for (u64 n : filtration.new_moduli(i))
    if (n % p == 0) out.emplace(n, lambda_power(lambda_exp, omega(n)) / n);
  return out;
}

/// sum_p min_k beta_k^k (W_p / (1 - 1/E))^k with W_p = sum_{p | n} E^{omega(n)}/n:
/// a bound on the mu-share of fibres failing some dilation condition.
inline Rational failing_union_bound(const std::vector<unsigned>& ks,
                                    const StageFiltration& filtration, const StageState& state,
                                    const LabConfig& config = {}) {
  if (ks.empty()) throw ValidationError("need at least one moment order");
  ClassMaxima cm = class_maxima(state, config);
  std::vector<Rational> betas;
  for (unsigned k : ks) betas.push_back(bias_statistic(k, cm));
  const Rational B = 1 - 1 / state.lambda_exp;
  Rational out = 0;
  for (u64 p : filtration.new_primes(state.i)) {
    Rational wp = 0;
    for (const auto& [n, w] : dilation_weights(filtration, state.i, p, state.lambda_exp)) wp += w;
    Rational best;
    for (std::size_t j = 0; j < ks.size(); ++j) {
      Rational term = betas[j] * pow_rational(wp / B, ks[j]);
      if (j == 0 || term < best) best = term;
    }
    out += best;
  }
  return out;
}

/// beta_k^k(i) / pi * prod_{p new} (1 + E sum_{j=1}^{v_p} ell_k(p^j) / p^j).
inline Rational bias_growth_bound(unsigned k, const Rational& beta_kk, const Rational& pi_good,
                                  const StageFiltration& filtration, std::size_t i,
                                  const Rational& lambda_exp) {
  if (pi_good <= 0) throw ValidationError("pi_good must be positive");
  Rational out = beta_kk / pi_good;
  for (const auto& pp : filtration.modulus_factorization().prime_powers) {
    if (std::find(filtration.new_primes(i).begin(), filtration.new_primes(i).end(), pp.prime) ==
        filtration.new_primes(i).end())
      continue;
    Rational s = 0;
    BigInt pj = 1;
    for (unsigned j = 1; j <= pp.exponent; ++j) {
      pj *= static_cast<unsigned long>(pp.prime);
      s += Rational(ell_prime_power(k, j)) / Rational(pj);
    }
    out *= 1 + lambda_exp * s;
  }
  return out;
}

/// A full lab run with per-stage bias statistics.
struct LabStage {
  StageState state;
  std::vector<Rational> beta;  // beta_k^k(i) for each requested k
  std::optional<StageResult> result;  // absent for the final stage
};

inline std::vector<LabStage> run_lab(const CongruenceSystem& system, std::vector<u64> thresholds,
                                     const Rational& lambda_exp, const std::vector<unsigned>& ks,
                                     const LabConfig& config = {}) {
  StageFiltration filtration(system, std::move(thresholds), config.divisor_limit);
  std::vector<LabStage> out;
  StageState state = initial_stage(filtration, lambda_exp, config);
  for (;;) {
    LabStage st;
    st.state = state;
    ClassMaxima cm = class_maxima(state, config);
    for (unsigned k : ks) st.beta.push_back(bias_statistic(k, cm));
    if (state.i + 1 >= filtration.stage_count()) {
      out.push_back(std::move(st));
      break;
    }
    StageResult res = run_stage(filtration, state);
    bool ok = res.ok;
    StageState next = res.next;
    st.result = std::move(res);
    out.push_back(std::move(st));
    if (!ok) break;
    state = std::move(next);
  }
  return out;
}

}  // namespace covmin
