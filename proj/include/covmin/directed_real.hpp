#pragma once

// Directed-rounding arithmetic on top of MPFR.
//
// A DirectedReal is a one-sided bound on some exact real it tracks: an Upper
// value is >= the tracked real, a Lower value <= it. Every operation rounds
// toward the bound's direction, and operations that cannot preserve the
// bound (adding an upper to a lower, multiplying bounds of unknown sign)
// throw DirectionError.
//
// An Enclosure is a Lower/Upper pair, i.e. ordinary interval arithmetic.

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "covmin/errors.hpp"
#include "covmin/integer.hpp"

namespace covmin {

enum class Direction { Lower, Upper };

inline const char* to_string(Direction d) { return d == Direction::Upper ? "upper" : "lower"; }
inline Direction opposite(Direction d) {
  return d == Direction::Upper ? Direction::Lower : Direction::Upper;
}
inline mpfr_rnd_t rounding(Direction d) { return d == Direction::Upper ? MPFR_RNDU : MPFR_RNDD; }

namespace detail {
inline thread_local mpfr_prec_t current_precision = 128;
}

inline mpfr_prec_t default_precision() { return detail::current_precision; }

/// Sets the default working precision (bits) for the lifetime of the guard.
class ScopedPrecision {
 public:
  explicit ScopedPrecision(mpfr_prec_t bits) : saved_(detail::current_precision) {
    if (bits < MPFR_PREC_MIN || bits > 1 << 20) throw ValidationError("precision out of range");
    detail::current_precision = bits;
  }
  ~ScopedPrecision() { detail::current_precision = saved_; }
  ScopedPrecision(const ScopedPrecision&) = delete;
  ScopedPrecision& operator=(const ScopedPrecision&) = delete;

 private:
  mpfr_prec_t saved_;
};

/// Owning wrapper around mpfr_t.
class Mpfr {
 public:
  explicit Mpfr(mpfr_prec_t prec = default_precision()) {
    mpfr_init2(v_, prec);
    mpfr_set_zero(v_, 1);
  }
  Mpfr(const Mpfr& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  Mpfr(Mpfr&& o) noexcept {
    mpfr_init2(v_, MPFR_PREC_MIN);
    mpfr_swap(v_, o.v_);
  }
  Mpfr& operator=(Mpfr o) noexcept {
    mpfr_swap(v_, o.v_);
    return *this;
  }
  ~Mpfr() { mpfr_clear(v_); }

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }
  mpfr_prec_t precision() const { return mpfr_get_prec(v_); }

 private:
  mpfr_t v_;
};

inline void set_rational(mpfr_ptr out, const Rational& q, mpfr_rnd_t rnd) {
  mpfr_set_q(out, q.get_mpq_t(), rnd);
}

/// Decimal string of x rounded in direction rnd, with enough digits to be
/// faithful at x's precision.
inline std::string decimal_string(mpfr_srcptr x, mpfr_rnd_t rnd, int digits = 0) {
  if (mpfr_nan_p(x)) return "nan";
  if (mpfr_inf_p(x)) return mpfr_sgn(x) > 0 ? "inf" : "-inf";
  if (mpfr_zero_p(x)) return "0";
  if (digits <= 0) digits = static_cast<int>(std::ceil(mpfr_get_prec(x) * 0.30103)) + 2;
  mpfr_exp_t exp10 = 0;
  char* raw = mpfr_get_str(nullptr, &exp10, 10, static_cast<size_t>(digits), x, rnd);
  std::string mant(raw);
  mpfr_free_str(raw);
  bool neg = !mant.empty() && mant[0] == '-';
  if (neg) mant.erase(0, 1);
  // Value is 0.mant * 10^exp10; trim trailing zeros.
  while (mant.size() > 1 && mant.back() == '0') mant.pop_back();
  std::string out;
  long e = static_cast<long>(exp10);
  if (e > 0 && e <= 40) {
    if (static_cast<long>(mant.size()) <= e) {
      out = mant + std::string(static_cast<std::size_t>(e) - mant.size(), '0');
    } else {
      out = mant.substr(0, static_cast<std::size_t>(e)) + "." + mant.substr(static_cast<std::size_t>(e));
    }
  } else if (e <= 0 && e > -10) {
    out = "0." + std::string(static_cast<std::size_t>(-e), '0') + mant;
  } else {
    out = mant.substr(0, 1) + (mant.size() > 1 ? "." + mant.substr(1) : "") + "e" +
          std::to_string(e - 1);
  }
  return neg ? "-" + out : out;
}

class DirectedReal {
 public:
  DirectedReal(Direction dir = Direction::Upper, mpfr_prec_t prec = default_precision())
      : value_(prec), dir_(dir) {}

  static DirectedReal from_rational(const Rational& q, Direction dir,
                                    mpfr_prec_t prec = default_precision()) {
    DirectedReal r(dir, prec);
    set_rational(r.value_.get(), q, rounding(dir));
    r.nonneg_ = sgn(q) >= 0;
    r.positive_ = sgn(q) > 0;
    return r;
  }

  static DirectedReal from_int(long v, Direction dir, mpfr_prec_t prec = default_precision()) {
    return from_rational(Rational(v), dir, prec);
  }

  /// Parses a decimal string (e.g. from a certificate) as a bound in the
  /// given direction; `tracked_positive` records that the bounded real is
  /// known to be positive.
  static DirectedReal from_decimal(const std::string& text, Direction dir,
                                   mpfr_prec_t prec = default_precision(),
                                   bool tracked_positive = false) {
    DirectedReal r(dir, prec);
    if (mpfr_set_str(r.value_.get(), text.c_str(), 10, rounding(dir)) != 0)
      throw ValidationError("cannot parse decimal '" + text + "'");
    r.nonneg_ = tracked_positive;
    r.positive_ = tracked_positive;
    return r;
  }

  Direction direction() const { return dir_; }
  mpfr_prec_t precision() const { return value_.precision(); }
  mpfr_srcptr get() const { return value_.get(); }

  /// The tracked real is known to be >= 0 (resp. > 0).
  bool tracked_nonneg() const {
    return dir_ == Direction::Lower ? mpfr_sgn(value_.get()) >= 0 : nonneg_;
  }
  bool tracked_positive() const {
    return dir_ == Direction::Lower ? mpfr_sgn(value_.get()) > 0 : positive_;
  }

  double to_double() const { return mpfr_get_d(value_.get(), rounding(dir_)); }
  std::string to_decimal(int digits = 0) const {
    return decimal_string(value_.get(), rounding(dir_), digits);
  }

  friend DirectedReal operator+(const DirectedReal& a, const DirectedReal& b) {
    if (a.dir_ != b.dir_) throw DirectionError("adding bounds of opposite direction");
    DirectedReal r(a.dir_, std::max(a.precision(), b.precision()));
    mpfr_add(r.value_.get(), a.get(), b.get(), rounding(a.dir_));
    r.nonneg_ = a.tracked_nonneg() && b.tracked_nonneg();
    r.positive_ = r.nonneg_ && (a.tracked_positive() || b.tracked_positive());
    return r;
  }

  /// upper - lower is an upper bound; lower - upper a lower bound.
  friend DirectedReal operator-(const DirectedReal& a, const DirectedReal& b) {
    if (a.dir_ == b.dir_) throw DirectionError("subtracting bounds of the same direction");
    DirectedReal r(a.dir_, std::max(a.precision(), b.precision()));
    mpfr_sub(r.value_.get(), a.get(), b.get(), rounding(a.dir_));
    return r;
  }

  friend DirectedReal operator-(const DirectedReal& a) {
    DirectedReal r(opposite(a.dir_), a.precision());
    mpfr_neg(r.value_.get(), a.get(), MPFR_RNDN);
    return r;
  }

  friend DirectedReal operator*(const DirectedReal& a, const DirectedReal& b) {
    if (a.dir_ != b.dir_) throw DirectionError("multiplying bounds of opposite direction");
    if (!a.tracked_nonneg() || !b.tracked_nonneg())
      throw DirectionError("product of bounds requires non-negative tracked values");
    DirectedReal r(a.dir_, std::max(a.precision(), b.precision()));
    mpfr_mul(r.value_.get(), a.get(), b.get(), rounding(a.dir_));
    r.nonneg_ = true;
    r.positive_ = a.tracked_positive() && b.tracked_positive();
    return r;
  }

  /// upper / lower is an upper bound (and vice versa) for a non-negative
  /// numerator and a positive denominator.
  friend DirectedReal operator/(const DirectedReal& a, const DirectedReal& b) {
    if (a.dir_ == b.dir_) throw DirectionError("dividing bounds of the same direction");
    if (!a.tracked_nonneg() || !b.tracked_positive())
      throw DirectionError("quotient of bounds requires a >= 0 and b > 0");
    DirectedReal r(a.dir_, std::max(a.precision(), b.precision()));
    mpfr_div(r.value_.get(), a.get(), b.get(), rounding(a.dir_));
    r.nonneg_ = true;
    r.positive_ = a.tracked_positive();
    return r;
  }

  DirectedReal scaled(const Rational& c) const {
    Direction d = sgn(c) >= 0 ? dir_ : opposite(dir_);
    DirectedReal cq = from_rational(c, d, precision());
    DirectedReal r(d, precision());
    mpfr_mul(r.value_.get(), get(), cq.get(), rounding(d));
    r.nonneg_ = sgn(c) >= 0 && tracked_nonneg();
    r.positive_ = sgn(c) > 0 && tracked_positive();
    return r;
  }

  friend DirectedReal exp(const DirectedReal& a) {
    DirectedReal r(a.dir_, a.precision());
    mpfr_exp(r.value_.get(), a.get(), rounding(a.dir_));
    r.nonneg_ = r.positive_ = true;
    return r;
  }

  friend DirectedReal log(const DirectedReal& a) {
    if (!a.tracked_positive()) throw DirectionError("log of a bound not known positive");
    DirectedReal r(a.dir_, a.precision());
    mpfr_log(r.value_.get(), a.get(), rounding(a.dir_));
    return r;
  }

  /// a^(1/k) for a non-negative tracked value.
  friend DirectedReal root(const DirectedReal& a, unsigned long k) {
    if (!a.tracked_nonneg()) throw DirectionError("root of a bound not known non-negative");
    DirectedReal r(a.dir_, a.precision());
    mpfr_rootn_ui(r.value_.get(), a.get(), k, rounding(a.dir_));
    r.nonneg_ = true;
    r.positive_ = a.tracked_positive();
    return r;
  }

  /// 1/a flips the direction; a must be tracked positive.
  friend DirectedReal reciprocal(const DirectedReal& a) {
    if (!a.tracked_positive()) throw DirectionError("reciprocal of a bound not known positive");
    DirectedReal r(opposite(a.dir_), a.precision());
    mpfr_ui_div(r.value_.get(), 1, a.get(), rounding(r.dir_));
    r.nonneg_ = r.positive_ = true;
    return r;
  }

  /// Certified a < b: requires an upper bound a and a lower bound b.
  friend bool certainly_less(const DirectedReal& a, const DirectedReal& b) {
    if (a.dir_ != Direction::Upper || b.dir_ != Direction::Lower)
      throw DirectionError("certainly_less needs (upper, lower)");
    return mpfr_less_p(a.get(), b.get());
  }

  /// Certified a <= b: requires an upper bound a and a lower bound b.
  friend bool certainly_leq(const DirectedReal& a, const DirectedReal& b) {
    if (a.dir_ != Direction::Upper || b.dir_ != Direction::Lower)
      throw DirectionError("certainly_leq needs (upper, lower)");
    return mpfr_lessequal_p(a.get(), b.get());
  }

  /// Compares the stored values only (no bound semantics).
  int compare_raw(const DirectedReal& other) const { return mpfr_cmp(get(), other.get()); }
  int compare_raw(const Rational& q) const { return mpfr_cmp_q(get(), q.get_mpq_t()); }

 private:
  friend class Enclosure;
  Mpfr value_;
  Direction dir_;
  bool nonneg_ = false;
  bool positive_ = false;
};

/// Closed interval [lo, hi] with outward rounding.
class Enclosure {
 public:
  explicit Enclosure(mpfr_prec_t prec = default_precision())
      : lo_(Direction::Lower, prec), hi_(Direction::Upper, prec) {}

  static Enclosure exact(const Rational& q, mpfr_prec_t prec = default_precision()) {
    Enclosure e(prec);
    set_rational(e.lo_ptr(), q, MPFR_RNDD);
    set_rational(e.hi_ptr(), q, MPFR_RNDU);
    e.refresh_flags();
    return e;
  }

  static Enclosure exact(long v, mpfr_prec_t prec = default_precision()) {
    return exact(Rational(v), prec);
  }

  static Enclosure from_bounds(const DirectedReal& lo, const DirectedReal& hi) {
    if (lo.direction() != Direction::Lower || hi.direction() != Direction::Upper)
      throw DirectionError("enclosure needs (lower, upper)");
    if (mpfr_greater_p(lo.get(), hi.get())) throw InvariantViolation("empty enclosure");
    Enclosure e(std::max(lo.precision(), hi.precision()));
    mpfr_set(e.lo_ptr(), lo.get(), MPFR_RNDD);
    mpfr_set(e.hi_ptr(), hi.get(), MPFR_RNDU);
    e.refresh_flags();
    return e;
  }

  static Enclosure pi(mpfr_prec_t prec = default_precision()) {
    Enclosure e(prec);
    mpfr_const_pi(e.lo_ptr(), MPFR_RNDD);
    mpfr_const_pi(e.hi_ptr(), MPFR_RNDU);
    e.refresh_flags();
    return e;
  }

  const DirectedReal& lower() const { return lo_; }
  const DirectedReal& upper() const { return hi_; }
  mpfr_prec_t precision() const { return lo_.precision(); }
  bool contains(const Rational& q) const {
    return mpfr_cmp_q(lo_.get(), q.get_mpq_t()) <= 0 && mpfr_cmp_q(hi_.get(), q.get_mpq_t()) >= 0;
  }
  bool positive() const { return mpfr_sgn(lo_.get()) > 0; }
  bool nonneg() const { return mpfr_sgn(lo_.get()) >= 0; }
  double mid_double() const {
    return 0.5 * (mpfr_get_d(lo_.get(), MPFR_RNDN) + mpfr_get_d(hi_.get(), MPFR_RNDN));
  }
  /// Relative width (hi - lo)/|lo|, as a double; informational.
  double relative_width() const {
    double lo = mpfr_get_d(lo_.get(), MPFR_RNDN), hi = mpfr_get_d(hi_.get(), MPFR_RNDN);
    return lo == 0 ? hi - lo : (hi - lo) / std::fabs(lo);
  }

  friend Enclosure operator+(const Enclosure& a, const Enclosure& b) {
    Enclosure r(std::max(a.precision(), b.precision()));
    mpfr_add(r.lo_ptr(), a.lo_.get(), b.lo_.get(), MPFR_RNDD);
    mpfr_add(r.hi_ptr(), a.hi_.get(), b.hi_.get(), MPFR_RNDU);
    r.refresh_flags();
    return r;
  }

  friend Enclosure operator-(const Enclosure& a, const Enclosure& b) {
    Enclosure r(std::max(a.precision(), b.precision()));
    mpfr_sub(r.lo_ptr(), a.lo_.get(), b.hi_.get(), MPFR_RNDD);
    mpfr_sub(r.hi_ptr(), a.hi_.get(), b.lo_.get(), MPFR_RNDU);
    r.refresh_flags();
    return r;
  }

  friend Enclosure operator-(const Enclosure& a) {
    Enclosure r(a.precision());
    mpfr_neg(r.lo_ptr(), a.hi_.get(), MPFR_RNDD);
    mpfr_neg(r.hi_ptr(), a.lo_.get(), MPFR_RNDU);
    r.refresh_flags();
    return r;
  }

  friend Enclosure operator*(const Enclosure& a, const Enclosure& b) {
    mpfr_prec_t prec = std::max(a.precision(), b.precision());
    Enclosure r(prec);
    if (a.nonneg() && b.nonneg()) {
      mpfr_mul(r.lo_ptr(), a.lo_.get(), b.lo_.get(), MPFR_RNDD);
      mpfr_mul(r.hi_ptr(), a.hi_.get(), b.hi_.get(), MPFR_RNDU);
    } else {
      Mpfr t(prec);
      bool first = true;
      for (mpfr_srcptr x : {a.lo_.get(), a.hi_.get()}) {
        for (mpfr_srcptr y : {b.lo_.get(), b.hi_.get()}) {
          mpfr_mul(t.get(), x, y, MPFR_RNDD);
          if (first || mpfr_less_p(t.get(), r.lo_.get())) mpfr_set(r.lo_ptr(), t.get(), MPFR_RNDD);
          mpfr_mul(t.get(), x, y, MPFR_RNDU);
          if (first || mpfr_greater_p(t.get(), r.hi_.get())) mpfr_set(r.hi_ptr(), t.get(), MPFR_RNDU);
          first = false;
        }
      }
    }
    r.refresh_flags();
    return r;
  }

  friend Enclosure operator/(const Enclosure& a, const Enclosure& b) {
    if (!b.positive() && !(mpfr_sgn(b.hi_.get()) < 0))
      throw DirectionError("division by an enclosure containing zero");
    return a * b.reciprocal();
  }

  Enclosure reciprocal() const {
    if (!positive() && !(mpfr_sgn(hi_.get()) < 0))
      throw DirectionError("reciprocal of an enclosure containing zero");
    Enclosure r(precision());
    mpfr_ui_div(r.lo_ptr(), 1, hi_.get(), MPFR_RNDD);
    mpfr_ui_div(r.hi_ptr(), 1, lo_.get(), MPFR_RNDU);
    r.refresh_flags();
    return r;
  }

  friend Enclosure exp(const Enclosure& a) {
    Enclosure r(a.precision());
    mpfr_exp(r.lo_ptr(), a.lo_.get(), MPFR_RNDD);
    mpfr_exp(r.hi_ptr(), a.hi_.get(), MPFR_RNDU);
    r.refresh_flags();
    return r;
  }

  friend Enclosure log(const Enclosure& a) {
    if (!a.positive()) throw DirectionError("log of an enclosure not known positive");
    Enclosure r(a.precision());
    mpfr_log(r.lo_ptr(), a.lo_.get(), MPFR_RNDD);
    mpfr_log(r.hi_ptr(), a.hi_.get(), MPFR_RNDU);
    r.refresh_flags();
    return r;
  }

  /// log(1 + a) for a > -1.
  friend Enclosure log1p(const Enclosure& a) {
    Enclosure r(a.precision());
    mpfr_log1p(r.lo_ptr(), a.lo_.get(), MPFR_RNDD);
    mpfr_log1p(r.hi_ptr(), a.hi_.get(), MPFR_RNDU);
    r.refresh_flags();
    return r;
  }

  friend Enclosure root(const Enclosure& a, unsigned long k) {
    if (!a.nonneg()) throw DirectionError("root of an enclosure not known non-negative");
    Enclosure r(a.precision());
    mpfr_rootn_ui(r.lo_ptr(), a.lo_.get(), k, MPFR_RNDD);
    mpfr_rootn_ui(r.hi_ptr(), a.hi_.get(), k, MPFR_RNDU);
    r.refresh_flags();
    return r;
  }

  friend Enclosure pow(const Enclosure& a, unsigned long k) {
    if (!a.nonneg()) throw DirectionError("power of an enclosure not known non-negative");
    Enclosure r(a.precision());
    mpfr_pow_ui(r.lo_ptr(), a.lo_.get(), k, MPFR_RNDD);
    mpfr_pow_ui(r.hi_ptr(), a.hi_.get(), k, MPFR_RNDU);
    r.refresh_flags();
    return r;
  }

  friend Enclosure max(const Enclosure& a, const Enclosure& b) {
    Enclosure r(std::max(a.precision(), b.precision()));
    mpfr_max(r.lo_ptr(), a.lo_.get(), b.lo_.get(), MPFR_RNDD);
    mpfr_max(r.hi_ptr(), a.hi_.get(), b.hi_.get(), MPFR_RNDU);
    r.refresh_flags();
    return r;
  }

  /// floor of the enclosed real, if the enclosure decides it.
  bool decided_floor(BigInt& out) const {
    BigInt a, b;
    mpfr_get_z(a.get_mpz_t(), lo_.get(), MPFR_RNDD);
    mpfr_get_z(b.get_mpz_t(), hi_.get(), MPFR_RNDD);
    if (a != b) return false;
    out = a;
    return true;
  }

 private:
  mpfr_ptr lo_ptr() { return lo_.value_.get(); }
  mpfr_ptr hi_ptr() { return hi_.value_.get(); }

  void refresh_flags() {
    hi_.nonneg_ = mpfr_sgn(lo_.get()) >= 0;
    hi_.positive_ = mpfr_sgn(lo_.get()) > 0;
  }

  DirectedReal lo_;
  DirectedReal hi_;
};

/// e^q for rational q.
inline Enclosure exp_rational(const Rational& q, mpfr_prec_t prec = default_precision()) {
  return exp(Enclosure::exact(q, prec));
}

/// log of a positive rational.
inline Enclosure log_rational(const Rational& q, mpfr_prec_t prec = default_precision()) {
  return log(Enclosure::exact(q, prec));
}

}  // namespace covmin
