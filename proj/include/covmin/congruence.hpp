#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "covmin/errors.hpp"
#include "covmin/integer.hpp"

namespace covmin {

/// The residue class `residue mod modulus`, with 0 <= residue < modulus and
/// modulus >= 2.
class Congruence {
 public:
  Congruence(u64 residue, u64 modulus) : residue_(residue), modulus_(modulus) {
    if (modulus < 2) throw ValidationError("congruence modulus must be at least 2");
    if (residue >= modulus)
      throw ValidationError("congruence residue " + std::to_string(residue) +
                            " not reduced modulo " + std::to_string(modulus));
  }

  u64 residue() const { return residue_; }
  u64 modulus() const { return modulus_; }
  bool contains(u64 z) const { return z % modulus_ == residue_; }

  friend bool operator==(const Congruence&, const Congruence&) = default;
  friend auto operator<=>(const Congruence& a, const Congruence& b) {
    if (a.modulus_ != b.modulus_) return a.modulus_ <=> b.modulus_;
    return a.residue_ <=> b.residue_;
  }

 private:
  u64 residue_;
  u64 modulus_;
};

/// A finite list of congruences. When `distinct` is set the moduli must be
/// pairwise distinct; a violation is reported, never silently repaired.
class CongruenceSystem {
 public:
  CongruenceSystem() = default;

  explicit CongruenceSystem(std::vector<Congruence> congruences, bool distinct = false)
      : congruences_(std::move(congruences)), distinct_(distinct) {
    if (distinct_) {
      std::set<u64> seen;
      for (const auto& c : congruences_) {
        if (!seen.insert(c.modulus()).second)
          throw ValidationError("system marked distinct repeats modulus " +
                                std::to_string(c.modulus()));
      }
    }
  }

  const std::vector<Congruence>& congruences() const { return congruences_; }
  bool distinct() const { return distinct_; }
  bool empty() const { return congruences_.empty(); }
  std::size_t size() const { return congruences_.size(); }

  bool covers(u64 z) const {
    return std::any_of(congruences_.begin(), congruences_.end(),
                       [z](const Congruence& c) { return c.contains(z); });
  }

  /// Copy without the given congruence (first match); the distinct flag is kept.
  CongruenceSystem without(const Congruence& drop) const {
    std::vector<Congruence> rest = congruences_;
    auto it = std::find(rest.begin(), rest.end(), drop);
    if (it != rest.end()) rest.erase(it);
    return CongruenceSystem(std::move(rest), distinct_);
  }

 private:
  std::vector<Congruence> congruences_;
  bool distinct_ = false;
};

/// 0 mod 2, 0 mod 3, 1 mod 4, 3 mod 8, 7 mod 12, 23 mod 24.
inline CongruenceSystem erdos_covering_system() {
  return CongruenceSystem({{0, 2}, {0, 3}, {1, 4}, {3, 8}, {7, 12}, {23, 24}}, true);
}

}  // namespace covmin
