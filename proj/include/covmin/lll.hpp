#pragma once

// Relative Lovasz Local Lemma on finite uniform spaces, and the weights it
// is applied with on a single fibre of a stage filtration.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "covmin/directed_real.hpp"
#include "covmin/errors.hpp"
#include "covmin/factor.hpp"
#include "covmin/filtration.hpp"
#include "covmin/integer.hpp"
#include "covmin/residue_set.hpp"

namespace covmin {

/// Events A_u on the uniform space {0, ..., space_size - 1} with a directed
/// dependency graph and weights x_u in [0, 1).
class EventSystem {
 public:
  EventSystem() = default;

  /// With `symmetric` each listed edge is stored in both directions.
  EventSystem(u64 space_size, std::vector<ResidueSet> events,
              std::vector<std::pair<std::size_t, std::size_t>> edges, std::vector<Rational> weights,
              bool symmetric = true)
      : space_size_(space_size), events_(std::move(events)), weights_(std::move(weights)) {
    if (space_size_ == 0) throw ValidationError("space_size must be positive");
    if (weights_.size() != events_.size())
      throw ValidationError("one weight per event required");
    for (const auto& e : events_)
      if (e.modulus() != space_size_) throw ValidationError("event not a subset of the space");
    for (const auto& x : weights_)
      if (x < 0 || x >= 1) throw ValidationError("weights must lie in [0, 1)");
    neighbours_.assign(events_.size(), {});
    for (auto [u, v] : edges) {
      if (u >= events_.size() || v >= events_.size())
        throw ValidationError("edge references a missing event");
      if (u == v) throw ValidationError("self-loop in dependency graph");
      neighbours_[u].push_back(v);
      if (symmetric) neighbours_[v].push_back(u);
    }
    for (auto& nb : neighbours_) {
      std::sort(nb.begin(), nb.end());
      nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
  }

  u64 space_size() const { return space_size_; }
  std::size_t size() const { return events_.size(); }
  const std::vector<ResidueSet>& events() const { return events_; }
  const std::vector<Rational>& weights() const { return weights_; }
  /// v with (u, v) in E.
  const std::vector<std::size_t>& neighbours(std::size_t u) const { return neighbours_.at(u); }

  Rational probability(std::size_t u) const {
    return make_rational(static_cast<u64>(events_.at(u).size()), space_size_);
  }

 private:
  u64 space_size_ = 1;
  std::vector<ResidueSet> events_;
  std::vector<Rational> weights_;
  std::vector<std::vector<std::size_t>> neighbours_;
};

struct CriterionResult {
  bool ok = true;
  Rational worst_slack;              // min over u of rhs - lhs; 0 with no events
  std::vector<Rational> slack;       // per event
};

/// P(A_u) <= x_u prod_{(u,v) in E} (1 - x_v) for every u, exactly.
inline CriterionResult check_lovasz_criterion(const EventSystem& sys) {
  CriterionResult out;
  for (std::size_t u = 0; u < sys.size(); ++u) {
    Rational rhs = sys.weights()[u];
    for (std::size_t v : sys.neighbours(u)) rhs *= 1 - sys.weights()[v];
    Rational s = rhs - sys.probability(u);
    if (u == 0 || s < out.worst_slack) out.worst_slack = s;
    if (s < 0) out.ok = false;
    out.slack.push_back(std::move(s));
  }
  return out;
}

inline constexpr u64 kBruteForceLimit = u64{1} << 20;

namespace detail {
inline void require_small_space(const EventSystem& sys) {
  if (sys.space_size() > kBruteForceLimit)
    throw ResourceError("space too large for enumeration (limit 2^20)");
}
}  // namespace detail

/// Exact P(intersection of complements) by enumeration.
inline Rational brute_force_uncovered(const EventSystem& sys) {
  detail::require_small_space(sys);
  u64 good = 0;
  for (u64 z = 0; z < sys.space_size(); ++z) {
    bool hit = false;
    for (const auto& e : sys.events())
      if (e.contains(z)) {
        hit = true;
        break;
      }
    if (!hit) ++good;
  }
  return make_rational(good, sys.space_size());
}

/// Exact P(intersection over u in U of A_u^c).
inline Rational avoidance_probability(const EventSystem& sys, const std::vector<std::size_t>& U) {
  detail::require_small_space(sys);
  for (std::size_t u : U)
    if (u >= sys.size()) throw ValidationError("U references a missing event");
  u64 good = 0;
  for (u64 z = 0; z < sys.space_size(); ++z) {
    bool hit = std::any_of(U.begin(), U.end(),
                           [&](std::size_t u) { return sys.events()[u].contains(z); });
    if (!hit) ++good;
  }
  return make_rational(good, sys.space_size());
}

/// For every subset U of V (as a bitmask, up to 24 events), the number of
/// points avoiding all A_u with u in U: a histogram of hit-masks followed by
/// a sum over subsets of the complement.
inline std::vector<u64> avoidance_counts(const EventSystem& sys) {
  detail::require_small_space(sys);
  const std::size_t n = sys.size();
  if (n > 24) throw ResourceError("too many events for subset enumeration");
  const std::size_t full = std::size_t{1} << n;
  std::vector<u64> hist(full, 0);
  for (u64 z = 0; z < sys.space_size(); ++z) {
    std::size_t mask = 0;
    for (std::size_t u = 0; u < n; ++u)
      if (sys.events()[u].contains(z)) mask |= std::size_t{1} << u;
    ++hist[mask];
  }
  // zeta transform: hist[S] <- sum of hist[T] over T subset of S
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t s = 0; s < full; ++s)
      if (s & (std::size_t{1} << b)) hist[s] += hist[s ^ (std::size_t{1} << b)];
  std::vector<u64> out(full);
  for (std::size_t U = 0; U < full; ++U) out[U] = hist[(full - 1) ^ U];
  return out;
}

/// prod_u (1 - x_u).
inline Rational weak_lower_bound(const EventSystem& sys) {
  if (!check_lovasz_criterion(sys).ok) throw ValidationError("Lovász criterion not satisfied");
  Rational out = 1;
  for (const auto& x : sys.weights()) out *= 1 - x;
  return out;
}

/// P(cap_U A^c) prod_{v not in U} (1 - x_v) for non-empty U; an empty U gives
/// the weak form. The probability is computed by enumeration when not given.
inline Rational lower_bound(const EventSystem& sys, std::vector<std::size_t> U = {},
                            std::optional<Rational> prob_U = std::nullopt) {
  if (!check_lovasz_criterion(sys).ok) throw ValidationError("Lovász criterion not satisfied");
  if (U.empty()) return weak_lower_bound(sys);
  std::sort(U.begin(), U.end());
  U.erase(std::unique(U.begin(), U.end()), U.end());
  if (U.back() >= sys.size()) throw ValidationError("U references a missing event");
  if (prob_U && (*prob_U < 0 || *prob_U > 1))
    throw ValidationError("probability must lie in [0, 1]");
  Rational out = prob_U ? *prob_U : avoidance_probability(sys, U);
  for (std::size_t v = 0; v < sys.size(); ++v)
    if (!std::binary_search(U.begin(), U.end(), v)) out *= 1 - sys.weights()[v];
  return out;
}

/// Weights x_n = E^{omega(n)} |A_{n,r} mod nQ_i| / n on the fibre above r,
/// with the checks that make them admissible.
struct FibreWeights {
  std::size_t stage = 0;
  u64 r = 0;
  Rational lambda_exp;
  std::vector<u64> moduli;            // N_{i+1}
  std::vector<u64> event_sizes;       // |A_{n,r} mod nQ_i|
  std::vector<Rational> x;
  std::vector<std::pair<u64, Rational>> dilation_sums;  // per new prime p
  bool dilation_ok = true;   // every dilation sum <= 1 - 1/E
  bool chain_ok = true;      // 1 - x_n >= 1/E, convexity, neighbour product >= E^{-omega(n)}
  bool lovasz_ok = true;     // criterion on the gcd graph
  bool criterion_ok = true;  // all three
};

namespace detail {

// 1 - x >= exp(-lambda x / (1 - 1/E)) with lambda = log E; equality at x = 0
// and x = 1 - 1/E is decided exactly, otherwise by enclosures.
inline bool convexity_step(const Rational& x, const Rational& E) {
  Rational edge = 1 - 1 / E;
  if (x == 0 || x == edge) return true;
  if (x > edge) return false;
  for (mpfr_prec_t prec = 128; prec <= 4096; prec *= 2) {
    Enclosure lam = log_rational(E, prec);
    Enclosure rhs = exp(-(lam * Enclosure::exact(x / edge, prec)));
    Enclosure lhs = Enclosure::exact(1 - x, prec);
    if (mpfr_cmp(lhs.lower().get(), rhs.upper().get()) >= 0) return true;
    if (mpfr_cmp(lhs.upper().get(), rhs.lower().get()) < 0) return false;
  }
  throw ResourceError("convexity step undecided at 4096 bits");
}

}  // namespace detail

inline Rational lambda_power(const Rational& E, std::size_t w) {
  return pow_rational(E, static_cast<unsigned>(w));
}

inline FibreWeights fibre_weights(const StageFiltration& filtration, std::size_t i, u64 r,
                                  const Rational& lambda_exp) {
  if (lambda_exp < 1) throw ValidationError("e^lambda must be at least 1");
  FibreWeights out;
  out.stage = i;
  out.r = r;
  out.lambda_exp = lambda_exp;
  out.moduli = filtration.new_moduli(i);
  const Rational bound = 1 - 1 / lambda_exp;
  std::vector<std::size_t> omegas;
  for (u64 n : out.moduli) {
    u64 size = event_set(filtration, i, n, r).size();
    std::size_t w = omega(n);
    omegas.push_back(w);
    out.event_sizes.push_back(size);
    out.x.push_back(lambda_power(lambda_exp, w) * make_rational(size, n));
  }
  for (u64 p : filtration.new_primes(i)) {
    Rational s = 0;
    for (std::size_t j = 0; j < out.moduli.size(); ++j)
      if (out.moduli[j] % p == 0) s += out.x[j];
    if (s > bound) out.dilation_ok = false;
    out.dilation_sums.emplace_back(p, std::move(s));
  }
  for (std::size_t j = 0; j < out.moduli.size(); ++j) {
    const Rational& xn = out.x[j];
    if (1 - xn < 1 / lambda_exp || !detail::convexity_step(xn, lambda_exp)) out.chain_ok = false;
    Rational prod_all = 1, prod_others = 1;
    for (std::size_t l = 0; l < out.moduli.size(); ++l) {
      if (std::gcd(out.moduli[j], out.moduli[l]) == 1) continue;
      prod_all *= 1 - out.x[l];
      if (l != j) prod_others *= 1 - out.x[l];
    }
    if (prod_all * lambda_power(lambda_exp, omegas[j]) < 1) out.chain_ok = false;
    if (xn * prod_others < make_rational(out.event_sizes[j], out.moduli[j])) out.lovasz_ok = false;
  }
  out.criterion_ok = out.dilation_ok && out.chain_ok && out.lovasz_ok;
  return out;
}

/// The fibre above r as a uniform space of size Q_{i+1}/Q_i (w <-> r + Q_i w),
/// with events A_{n,r}, edges between n != n' sharing a prime, and weights x_n.
inline EventSystem fibre_event_system(const StageFiltration& filtration, std::size_t i, u64 r,
                                      const FibreWeights& weights) {
  u64 qi = filtration.stage_modulus(static_cast<int>(i));
  u64 size = filtration.stage_modulus(static_cast<int>(i) + 1) / qi;
  if (size > kBruteForceLimit) throw ResourceError("fibre too large to materialize");
  const auto& ns = weights.moduli;
  std::vector<ResidueSet> events;
  for (u64 n : ns) {
    ResidueSet a = event_set(filtration, i, n, r);
    ResidueSet e(size);
    a.for_each([&](u64 z) {
      for (u64 w = (z - r) / qi; w < size; w += n) e.insert(w);
    });
    events.push_back(std::move(e));
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t a = 0; a < ns.size(); ++a)
    for (std::size_t b = a + 1; b < ns.size(); ++b)
      if (std::gcd(ns[a], ns[b]) > 1) edges.emplace_back(a, b);
  return EventSystem(size, std::move(events), std::move(edges), weights.x, true);
}

}  // namespace covmin
