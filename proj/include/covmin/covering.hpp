#pragma once

// Covering decision and exact uncovered density by recursive fibre splitting.
//
// For a prime p dividing some modulus, write z = t + p*w with t mod p. A
// congruence a mod m with p | m survives only in the fibre t = a mod p, where
// it becomes (a - t)/p mod m/p; one with p coprime to m becomes
// (a - t) p^-1 mod m. Fibres t that no p-divisible congruence touches all
// have the density of the p-free subsystem, so only |T| + 1 children are
// explored per node.

#include <algorithm>
#include <map>
#include <utility>
#include <vector>

#include "covmin/congruence.hpp"
#include "covmin/errors.hpp"
#include "covmin/factor.hpp"
#include "covmin/integer.hpp"
#include "covmin/residue_set.hpp"

namespace covmin {

struct CoveringConfig {
  /// Nodes of the fibre recursion before a ResourceError.
  u64 node_budget = 10'000'000;
  /// A node whose remaining modulus is at most this is enumerated directly.
  u64 enumeration_threshold = u64{1} << 20;
  /// Largest modulus uncovered_residues will materialize.
  u64 materialize_limit = u64{1} << 26;
};

/// LCM of all moduli. Throws on an empty system.
inline BigInt lcm_modulus(const CongruenceSystem& system) {
  if (system.empty()) throw ValidationError("empty system has no modulus");
  BigInt q = 1;
  for (const auto& c : system.congruences()) {
    BigInt m = to_big(c.modulus());
    mpz_lcm(q.get_mpz_t(), q.get_mpz_t(), m.get_mpz_t());
  }
  return q;
}

namespace detail {

// (modulus, residue); modulus 1 means "everything".
using Clause = std::pair<u64, u64>;
using Clauses = std::vector<Clause>;

inline Clauses canonical(Clauses cs) {
  std::sort(cs.begin(), cs.end());
  cs.erase(std::unique(cs.begin(), cs.end()), cs.end());
  // Drop classes contained in another class (d | m and a = b mod d).
  Clauses kept;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    bool subsumed = false;
    for (std::size_t j = 0; j < cs.size() && !subsumed; ++j) {
      if (i == j) continue;
      auto [d, b] = cs[j];
      auto [m, a] = cs[i];
      if (d != m && m % d == 0 && a % d == b) subsumed = true;
    }
    if (!subsumed) kept.push_back(cs[i]);
  }
  return kept;
}

class FibreRecursion {
 public:
  FibreRecursion(const CongruenceSystem& system, const CoveringConfig& config) : config_(config) {
    std::vector<u64> primes;
    for (const auto& c : system.congruences()) {
      root_.emplace_back(c.modulus(), c.residue());
      for (u64 p : factorize(c.modulus()).primes()) primes.push_back(p);
    }
    std::sort(primes.begin(), primes.end(), std::greater<>());
    primes.erase(std::unique(primes.begin(), primes.end()), primes.end());
    primes_desc_ = std::move(primes);
    root_ = canonical(std::move(root_));
  }

  Rational density() { return density(root_); }
  bool covering() { return covered(root_); }
  u64 nodes() const { return nodes_; }

 private:
  void tick() {
    if (++nodes_ > config_.node_budget) throw ResourceError("fibre recursion node budget exceeded");
  }

  // lcm of the clause moduli, or 0 when it exceeds 64 bits.
  static u64 clause_lcm(const Clauses& cs) {
    u64 l = 1;
    for (const auto& [m, a] : cs) {
      l = lcm_checked(l, m);
      if (l == 0) return 0;
    }
    return l;
  }

  static u64 count_uncovered(const Clauses& cs, u64 l) {
    std::vector<bool> hit(l, false);
    for (const auto& [m, a] : cs)
      for (u64 z = a; z < l; z += m) hit[z] = true;
    return static_cast<u64>(std::count(hit.begin(), hit.end(), false));
  }

  u64 pivot_prime(const Clauses& cs) const {
    for (u64 p : primes_desc_)
      for (const auto& [m, a] : cs)
        if (m % p == 0) return p;
    throw InvariantViolation("no prime divides the remaining moduli");
  }

  struct Split {
    u64 p;
    Clauses rest;            // clauses with p not dividing the modulus
    std::vector<u64> touched;  // residues t mod p hit by p-divisible clauses
  };

  Split split(const Clauses& cs) const {
    Split s;
    s.p = pivot_prime(cs);
    for (const auto& [m, a] : cs) {
      if (m % s.p == 0) {
        s.touched.push_back(a % s.p);
      } else {
        s.rest.emplace_back(m, a);
      }
    }
    std::sort(s.touched.begin(), s.touched.end());
    s.touched.erase(std::unique(s.touched.begin(), s.touched.end()), s.touched.end());
    return s;
  }

  static Clauses fibre(const Clauses& cs, u64 p, u64 t) {
    Clauses out;
    for (const auto& [m, a] : cs) {
      if (m % p == 0) {
        if (a % p != t) continue;
        out.emplace_back(m / p, (a - t) / p);
      } else {
        u64 tm = t % m;
        u64 shifted = a >= tm ? a - tm : a + (m - tm);
        out.emplace_back(m, mulmod(shifted, invmod(p % m, m), m));
      }
    }
    return canonical(std::move(out));
  }

  static bool trivially_covered(const Clauses& cs) {
    return std::any_of(cs.begin(), cs.end(), [](const Clause& c) { return c.first == 1; });
  }

  Rational density(const Clauses& cs) {
    tick();
    if (cs.empty()) return Rational(1);
    if (trivially_covered(cs)) return Rational(0);
    if (auto it = memo_.find(cs); it != memo_.end()) return it->second;
    Rational result;
    u64 l = clause_lcm(cs);
    if (l != 0 && l <= config_.enumeration_threshold) {
      result = make_rational(count_uncovered(cs, l), l);
    } else {
      Split s = split(cs);
      Rational sum = 0;
      for (u64 t : s.touched) sum += density(fibre(cs, s.p, t));
      u64 untouched = s.p - s.touched.size();
      if (untouched > 0) sum += Rational(to_big(untouched)) * density(canonical(s.rest));
      result = sum / Rational(to_big(s.p));
    }
    memo_.emplace(cs, result);
    return result;
  }

  bool covered(const Clauses& cs) {
    tick();
    if (cs.empty()) return false;
    if (trivially_covered(cs)) return true;
    u64 l = clause_lcm(cs);
    if (l != 0 && l <= config_.enumeration_threshold) return count_uncovered(cs, l) == 0;
    Split s = split(cs);
    if (s.touched.size() < s.p && !covered(canonical(s.rest))) return false;
    for (u64 t : s.touched)
      if (!covered(fibre(cs, s.p, t))) return false;
    return true;
  }

  CoveringConfig config_;
  Clauses root_;
  std::vector<u64> primes_desc_;
  std::map<Clauses, Rational> memo_;
  u64 nodes_ = 0;
};

}  // namespace detail

/// True iff every integer lies in some congruence of the system.
inline bool is_covering(const CongruenceSystem& system, const CoveringConfig& config = {}) {
  if (system.empty()) throw ValidationError("empty system has no modulus");
  return detail::FibreRecursion(system, config).covering();
}

/// Exact natural density of the integers covered by no congruence.
inline Rational uncovered_density(const CongruenceSystem& system,
                                  const CoveringConfig& config = {}) {
  if (system.empty()) throw ValidationError("empty system has no modulus");
  return detail::FibreRecursion(system, config).density();
}

/// Uncovered set as residues mod q; q must be a multiple of the system's LCM.
/// An empty system leaves every residue uncovered.
inline ResidueSet uncovered_residues(const CongruenceSystem& system, u64 q,
                                     const CoveringConfig& config = {}) {
  if (q == 0) throw ValidationError("modulus must be positive");
  if (!system.empty()) {
    BigInt l = lcm_modulus(system);
    if (BigInt(to_big(q) % l) != 0)
      throw ValidationError("q=" + std::to_string(q) + " is not a multiple of the system LCM " +
                            l.get_str());
  }
  if (q > config.materialize_limit) throw ResourceError("residue enumeration budget exceeded");
  std::vector<bool> hit(q, false);
  for (const auto& c : system.congruences())
    for (u64 z = c.residue(); z < q; z += c.modulus()) hit[z] = true;
  ResidueSet out(q);
  for (u64 z = 0; z < q; ++z)
    if (!hit[z]) out.insert(z);
  return out;
}

}  // namespace covmin
