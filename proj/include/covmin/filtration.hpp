#pragma once

// Stage filtration of a congruence system by prime thresholds
// P_0 < P_1 < ... and the per-fibre event sets A_{n,r}.

#include <algorithm>
#include <map>
#include <numeric>
#include <vector>

#include "covmin/congruence.hpp"
#include "covmin/covering.hpp"
#include "covmin/errors.hpp"
#include "covmin/factor.hpp"
#include "covmin/residue_set.hpp"

namespace covmin {

/// m = m0 * n where every prime of m0 divides q and gcd(n, q) = 1.
struct ModulusSplit {
  u64 m0;
  u64 n;
  friend bool operator==(const ModulusSplit&, const ModulusSplit&) = default;
};

inline ModulusSplit split_modulus(u64 m, u64 q) {
  if (m == 0 || q == 0) throw ValidationError("split_modulus: arguments must be positive");
  u64 n = m;
  for (u64 g = std::gcd(n, q); g > 1; g = std::gcd(n, q)) n /= g;
  return {m / n, n};
}

/// Q_i = prod_{p <= P_i} p^{v_p(Q)}, the smooth moduli M_i, and the new
/// moduli N_{i+1}. Thresholds must be strictly increasing and at least 2.
/// If the last threshold is below the largest prime of Q it is extended so
/// that the final stage modulus is Q itself.
class StageFiltration {
 public:
  StageFiltration(const CongruenceSystem& system, std::vector<u64> thresholds,
                  u64 divisor_limit = u64{1} << 16)
      : thresholds_(std::move(thresholds)) {
    if (thresholds_.empty()) throw ValidationError("at least one threshold required");
    if (thresholds_.front() < 2) throw ValidationError("P_0 must be at least 2");
    for (std::size_t i = 1; i < thresholds_.size(); ++i)
      if (thresholds_[i] <= thresholds_[i - 1])
        throw ValidationError("thresholds must be strictly increasing");
    if (system.empty()) throw ValidationError("empty system has no modulus");

    q_ = to_u64(lcm_modulus(system));
    q_factor_ = factorize(q_);
    if (!q_factor_.prime_powers.empty() &&
        q_factor_.prime_powers.back().prime > thresholds_.back()) {
      thresholds_.push_back(q_factor_.prime_powers.back().prime);
    }
    for (u64 bound : thresholds_) {
      u64 qi = 1;
      for (const auto& [p, e] : q_factor_.prime_powers)
        if (p <= bound)
          for (unsigned k = 0; k < e; ++k) qi *= p;
      stage_moduli_.push_back(qi);
    }
    for (const auto& c : system.congruences()) congruences_.push_back(c);

    for (std::size_t i = 0; i + 1 < thresholds_.size(); ++i) {
      Factorization ratio;
      ratio.n = stage_moduli_[i + 1] / stage_moduli_[i];
      for (const auto& pp : q_factor_.prime_powers)
        if (pp.prime > thresholds_[i] && pp.prime <= thresholds_[i + 1])
          ratio.prime_powers.push_back(pp);
      std::vector<u64> ns = divisors(ratio, divisor_limit);
      ns.erase(ns.begin());  // drop n = 1
      new_moduli_.push_back(std::move(ns));
      std::vector<u64> ps;
      for (const auto& pp : ratio.prime_powers) ps.push_back(pp.prime);
      new_primes_.push_back(std::move(ps));
    }
  }

  std::size_t stage_count() const { return thresholds_.size(); }
  const std::vector<u64>& thresholds() const { return thresholds_; }
  u64 modulus() const { return q_; }
  const Factorization& modulus_factorization() const { return q_factor_; }

  /// Q_i; stage_modulus(-1) is 1.
  u64 stage_modulus(int i) const {
    if (i < 0) return 1;
    return stage_moduli_.at(static_cast<std::size_t>(i));
  }

  /// Congruences whose modulus divides Q_i.
  std::vector<Congruence> smooth_congruences(int i) const {
    std::vector<Congruence> out;
    u64 qi = stage_modulus(i);
    for (const auto& c : congruences_)
      if (qi % c.modulus() == 0) out.push_back(c);
    return out;
  }

  /// N_{i+1}: divisors n > 1 of Q_{i+1} with all primes in (P_i, P_{i+1}].
  const std::vector<u64>& new_moduli(std::size_t i) const { return new_moduli_.at(i); }

  /// Primes of Q in (P_i, P_{i+1}].
  const std::vector<u64>& new_primes(std::size_t i) const { return new_primes_.at(i); }

  bool is_new_modulus(std::size_t i, u64 n) const {
    const auto& ns = new_moduli(i);
    return std::binary_search(ns.begin(), ns.end(), n);
  }

  /// Congruences of M_{i+1} \ M_i grouped by their new factor n.
  std::vector<Congruence> congruences_with_new_factor(std::size_t i, u64 n) const {
    std::vector<Congruence> out;
    u64 qi = stage_modulus(static_cast<int>(i));
    u64 qnext = stage_modulus(static_cast<int>(i) + 1);
    for (const auto& c : congruences_) {
      if (qnext % c.modulus() != 0 || qi % c.modulus() == 0) continue;
      if (split_modulus(c.modulus(), qi).n == n) out.push_back(c);
    }
    return out;
  }

  const std::vector<Congruence>& congruences() const { return congruences_; }

 private:
  std::vector<u64> thresholds_;
  u64 q_ = 1;
  Factorization q_factor_;
  std::vector<u64> stage_moduli_;
  std::vector<Congruence> congruences_;
  std::vector<std::vector<u64>> new_moduli_;
  std::vector<std::vector<u64>> new_primes_;
};

/// A_{n,r} as a set of residues mod n*Q_i: the classes of (r mod Q_i) hit by
/// congruences a mod m0*n with m0 | Q_i. Each contributing congruence (those
/// with r = a mod m0) adds the single class fixed by CRT from r mod Q_i and
/// a mod n.
inline ResidueSet event_set(const StageFiltration& filtration, std::size_t i, u64 n, u64 r) {
  if (!filtration.is_new_modulus(i, n))
    throw ValidationError("n=" + std::to_string(n) + " is not a new modulus at stage " +
                          std::to_string(i));
  u64 qi = filtration.stage_modulus(static_cast<int>(i));
  if (r >= qi) throw ValidationError("fibre residue must be reduced modulo Q_i");
  u64 big = n * qi;
  ResidueSet out(big);
  // z = r + qi*w with w mod n solving qi*w = a - r (mod n).
  u64 qi_inv = invmod(qi % n, n);
  for (const auto& c : filtration.congruences_with_new_factor(i, n)) {
    u64 m0 = c.modulus() / n;
    if (r % m0 != c.residue() % m0) continue;
    u64 target = c.residue() % n;
    u64 rn = r % n;
    u64 diff = target >= rn ? target - rn : target + (n - rn);
    u64 w = mulmod(diff, qi_inv, n);
    out.insert(r + qi * w);
  }
  return out;
}

}  // namespace covmin
