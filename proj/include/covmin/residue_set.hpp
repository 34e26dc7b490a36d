#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "covmin/errors.hpp"
#include "covmin/integer.hpp"

namespace covmin {

/// A set of residues modulo an explicit modulus. Dense moduli (up to 2^24)
/// use a bitset, larger ones a sorted vector.
class ResidueSet {
 public:
  static constexpr u64 kBitsetLimit = u64{1} << 24;

  ResidueSet() : ResidueSet(1) {}

  explicit ResidueSet(u64 modulus) : modulus_(modulus), dense_(modulus <= kBitsetLimit) {
    if (modulus == 0) throw ValidationError("ResidueSet modulus must be positive");
    if (dense_) bits_.assign((modulus + 63) / 64, 0);
  }

  static ResidueSet full(u64 modulus) {
    ResidueSet s(modulus);
    for (u64 r = 0; r < modulus; ++r) s.insert(r);
    return s;
  }

  u64 modulus() const { return modulus_; }
  bool dense() const { return dense_; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }

  bool contains(u64 r) const {
    if (r >= modulus_) return false;
    if (dense_) return (bits_[r >> 6] >> (r & 63)) & 1u;
    return std::binary_search(sparse_.begin(), sparse_.end(), r);
  }

  void insert(u64 r) {
    if (r >= modulus_) throw ValidationError("residue out of range for ResidueSet");
    if (dense_) {
      u64& word = bits_[r >> 6];
      u64 bit = u64{1} << (r & 63);
      if (!(word & bit)) {
        word |= bit;
        ++size_;
      }
      return;
    }
    auto it = std::lower_bound(sparse_.begin(), sparse_.end(), r);
    if (it == sparse_.end() || *it != r) {
      sparse_.insert(it, r);
      ++size_;
    }
  }

  void erase(u64 r) {
    if (!contains(r)) return;
    if (dense_) {
      bits_[r >> 6] &= ~(u64{1} << (r & 63));
    } else {
      sparse_.erase(std::lower_bound(sparse_.begin(), sparse_.end(), r));
    }
    --size_;
  }

  /// Calls f(r) for each member in increasing order.
  template <typename F>
  void for_each(F&& f) const {
    if (!dense_) {
      for (u64 r : sparse_) f(r);
      return;
    }
    for (std::size_t w = 0; w < bits_.size(); ++w) {
      u64 word = bits_[w];
      while (word) {
        int b = __builtin_ctzll(word);
        f(static_cast<u64>(w * 64 + b));
        word &= word - 1;
      }
    }
  }

  std::vector<u64> members() const {
    std::vector<u64> out;
    out.reserve(size_);
    for_each([&](u64 r) { out.push_back(r); });
    return out;
  }

  Rational density() const { return make_rational(static_cast<u64>(size_), modulus_); }

  friend bool operator==(const ResidueSet& a, const ResidueSet& b) {
    return a.modulus_ == b.modulus_ && a.members() == b.members();
  }

 private:
  u64 modulus_;
  bool dense_;
  std::size_t size_ = 0;
  std::vector<u64> bits_;
  std::vector<u64> sparse_;
};

}  // namespace covmin
