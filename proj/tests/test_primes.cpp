#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"

using namespace covmin;

namespace {

const PrimeTable& table_e15() {
  static const PrimeTable t = sieve_primes(3'300'000);
  return t;
}

double rel_diff(double a, double b) { return std::fabs(a - b) / std::max(std::fabs(b), 1e-300); }

// Direct double-precision sums over naive primes in (e^n, e^{n+1}].
struct DoubleStats {
  double prod1 = 1, prod2 = 1, sum3 = 0;
};

DoubleStats double_stats(long n, double E) {
  static const std::vector<u64> ps = oracle::primes_naive(1'200'000);
  DoubleStats s;
  const double lo = std::exp(static_cast<double>(n)), hi = std::exp(static_cast<double>(n + 1));
  for (u64 p : ps) {
    if (static_cast<double>(p) <= lo || static_cast<double>(p) > hi) continue;
    double pd = static_cast<double>(p);
    s.prod1 *= 1 + E / (pd - 1);
    double inner = 0, pj = 1;
    for (int j = 1; j < 60; ++j) {
      pj /= pd;
      inner += (std::pow(j + 1, 3) - std::pow(j, 3)) * pj;
    }
    s.prod2 *= 1 + E * inner;
    s.sum3 += 1 / std::pow(pd - 1, 3);
  }
  return s;
}

bool upper_at_most(const Enclosure& x, const Rational& q) { return x.upper().compare_raw(q) <= 0; }

}  // namespace

TEST(SievePrimes, Examples) {
  auto t = sieve_primes(10);
  EXPECT_EQ(std::vector<std::uint32_t>(t.primes().begin(), t.primes().end()),
            (std::vector<std::uint32_t>{2, 3, 5, 7}));
  EXPECT_EQ(sieve_primes(1'000'000).size(), 78498u);
  EXPECT_THROW(sieve_primes(1), ValidationError);
  EXPECT_THROW(sieve_primes(100, 50), ResourceError);
}

TEST(SievePrimes, MatchesTrialDivision) {
  auto t = sieve_primes(20000);
  auto naive = oracle::primes_naive(20000);
  ASSERT_EQ(t.size(), naive.size());
  for (std::size_t j = 0; j < naive.size(); ++j) ASSERT_EQ(t.primes()[j], naive[j]);
  EXPECT_EQ(t.count_upto(10000), 1229u);
  EXPECT_EQ(t.range(10, 30).size(), 6u);
  EXPECT_THROW(t.range(10, 30000), ValidationError);
}

TEST(Theta, Examples) {
  auto t = sieve_primes(1000);
  EXPECT_TRUE(theta(1, t).contains(0));
  Enclosure th10 = theta(10, t);
  EXPECT_LT(rel_diff(th10.mid_double(), std::log(210.0)), 1e-14);
  EXPECT_TRUE(th10.lower().to_double() <= std::log(210.0) + 1e-12);
  EXPECT_THROW(theta(1001, t), ValidationError);
}

TEST(Theta, ErrorBoundAtThreshold) {
  const auto& t = table_e15();
  Enclosure th = theta(678407, t);
  DirectedReal err = theta_error_bound(678407);
  const double x = 678407.0;
  EXPECT_LT(rel_diff(err.to_double(), x / (40 * std::log(x))), 1e-12);
  EXPECT_NEAR(err.to_double(), 1263.0, 0.5);
  // |theta - x| < err, both sides certified
  Enclosure xe = Enclosure::exact(678407);
  EXPECT_LT(mpfr_cmp((xe - th).upper().get(), err.get()), 0);
  EXPECT_LT(mpfr_cmp((th - xe).upper().get(), err.get()), 0);
}

TEST(Theta, ErrorBoundDomain) {
  EXPECT_THROW(theta_error_bound(1000), ValidationError);
  // e^13 lies below 678407, so the bound refuses it; the bare formula gives e^13/520.
  Enclosure e13 = exp_rational(13);
  EXPECT_THROW(theta_error_bound(e13), ValidationError);
  EXPECT_LT(rel_diff(theta_error_formula(e13).mid_double(), std::exp(13.0) / 520), 1e-14);
  Enclosure e14 = exp_rational(14);
  EXPECT_LT(rel_diff(theta_error_bound(e14).to_double(), std::exp(14.0) / 560), 1e-14);
}

TEST(Theta, RosserSchoenfeldGrid) {
  const auto& t = table_e15();
  std::vector<u64> xs;
  for (int j = 0; j < 100; ++j) xs.push_back(678407 + (1'000'000 - 678407) * static_cast<u64>(j) / 99);
  auto th = theta_many(xs, t);
  for (std::size_t j = 0; j < xs.size(); ++j) {
    Enclosure x = Enclosure::exact(Rational(to_big(xs[j])));
    DirectedReal err = theta_error_bound(x);
    EXPECT_LT(mpfr_cmp((x - th[j]).upper().get(), err.get()), 0) << xs[j];
    EXPECT_LT(mpfr_cmp((th[j] - x).upper().get(), err.get()), 0) << xs[j];
  }
}

TEST(Factorize, Examples) {
  auto f12 = factorize(12);
  EXPECT_EQ(f12.prime_powers, (std::vector<PrimePower>{{2, 2}, {3, 1}}));
  EXPECT_EQ(f12.omega(), 2u);
  EXPECT_FALSE(f12.squarefree());
  auto f1 = factorize(1);
  EXPECT_TRUE(f1.prime_powers.empty());
  EXPECT_EQ(f1.omega(), 0u);
  EXPECT_TRUE(f1.squarefree());
  auto f35 = factorize(35);
  EXPECT_EQ(f35.prime_powers, (std::vector<PrimePower>{{5, 1}, {7, 1}}));
  EXPECT_TRUE(f35.squarefree());
}

TEST(Factorize, ProductAndLargeInputs) {
  std::mt19937_64 rng(3);
  for (int j = 0; j < 300; ++j) {
    u64 n = rng() >> (rng() % 40);
    if (n == 0) continue;
    auto f = factorize(n);
    u64 prod = 1;
    for (const auto& [p, e] : f.prime_powers) {
      ASSERT_TRUE(is_prime_u64(p));
      for (unsigned k = 0; k < e; ++k) prod *= p;
    }
    ASSERT_EQ(prod, n);
  }
  auto big = factorize(1'000'000'007ull * 998'244'353ull);
  EXPECT_EQ(big.primes(), (std::vector<u64>{998'244'353ull, 1'000'000'007ull}));
}

TEST(DirectedReal, RandomRationalExpressionsAreBracketed) {
  std::mt19937_64 rng(5);
  auto rnd = [&] {
    long long num = static_cast<long>(rng() % 2001) - 1000;
    long long den = static_cast<long>(rng() % 999) + 1;
    return make_rational(num, den);
  };
  for (int j = 0; j < 2000; ++j) {
    Rational a = rnd(), b = rnd(), c = rnd();
    if (c == 0) c = 1;
    Rational exact = (a + b) * c - a / c;
    for (mpfr_prec_t prec : {24, 53, 128}) {
      Enclosure ea = Enclosure::exact(a, prec), eb = Enclosure::exact(b, prec),
                ec = Enclosure::exact(c, prec);
      Enclosure r = (ea + eb) * ec - ea / ec;
      ASSERT_TRUE(r.contains(exact)) << a << " " << b << " " << c;
      DirectedReal up = DirectedReal::from_rational(a, Direction::Upper, prec) +
                        DirectedReal::from_rational(b, Direction::Upper, prec);
      DirectedReal lo = DirectedReal::from_rational(a, Direction::Lower, prec) +
                        DirectedReal::from_rational(b, Direction::Lower, prec);
      ASSERT_GE(up.compare_raw(a + b), 0);
      ASSERT_LE(lo.compare_raw(a + b), 0);
    }
  }
}

TEST(DirectedReal, MixingDirectionsIsRejected) {
  DirectedReal up = DirectedReal::from_int(1, Direction::Upper);
  DirectedReal lo = DirectedReal::from_int(1, Direction::Lower);
  EXPECT_THROW(up + lo, DirectionError);
  EXPECT_NO_THROW(up - lo);
  EXPECT_EQ((up - lo).direction(), Direction::Upper);
}

TEST(EllSeries, ClosedFormMatchesTruncation) {
  for (unsigned k = 1; k <= 5; ++k)
    for (const Rational& x : {Rational(1, 2), Rational(1, 3), Rational(1, 7), Rational(1, 1000)}) {
      Enclosure ex = Enclosure::exact(x);
      Enclosure a = detail::closed_form_series(k, ex);
      Enclosure b = detail::truncated_series(k, ex);
      EXPECT_LE(mpfr_cmp(a.lower().get(), b.upper().get()), 0) << k;
      EXPECT_LE(mpfr_cmp(b.lower().get(), a.upper().get()), 0) << k;
      EXPECT_LT(rel_diff(a.mid_double(), b.mid_double()), 1e-12);
    }
}

TEST(EllSeries, HighOrderAgainstDirectSum) {
  for (unsigned k : {6u, 9u}) {
    const double x = 0.2;
    double direct = 0, xj = 1;
    for (int j = 0; j < 400; ++j) {
      direct += (std::pow(j + 1, k) - std::pow(j, k)) * xj;
      xj *= x;
    }
    Enclosure s = ell_series(k, Enclosure::exact(Rational(1, 5)));
    EXPECT_LT(rel_diff(s.mid_double(), direct), 1e-10) << k;
  }
  EXPECT_THROW(ell_series(3, Enclosure::exact(Rational(3, 5))), ValidationError);
}

TEST(IntervalPrimeStats, NumericRangeElevenAndTwelve) {
  const auto& t = table_e15();
  for (long n : {11L, 12L}) {
    auto s = interval_prime_stats(n, 3, Rational(2), t);
    DoubleStats d = double_stats(n, 2.0);
    EXPECT_LT(rel_diff(s.prod1.mid_double(), d.prod1), 1e-9);
    EXPECT_LT(rel_diff(s.prod2.mid_double(), d.prod2), 1e-9);
    EXPECT_LT(rel_diff(s.sum_k.mid_double(), d.sum3), 1e-9);
    EXPECT_TRUE(upper_at_most(s.prod1, Rational(6, 5)));
    EXPECT_TRUE(upper_at_most(s.prod2, Rational(17, 5)));
    Enclosure target = (Enclosure::exact(2 * n) * exp_rational(Rational(2 * n))).reciprocal();
    EXPECT_LT(mpfr_cmp(s.sum_k.upper().get(), target.lower().get()), 0);
  }
}

TEST(IntervalPrimeStats, EmptyInterval) {
  auto t = sieve_primes(100);
  // e^3.2 ~ 24.5 and e^3.22 ~ 25.03: no prime in (24, 25]
  auto s = interval_prime_stats(Rational(16, 5), Rational(161, 50), 3, Rational(2), t);
  EXPECT_EQ(s.prime_count, 0u);
  EXPECT_TRUE(s.prod1.contains(1) && upper_at_most(s.prod1, 1));
  EXPECT_TRUE(s.prod2.contains(1) && upper_at_most(s.prod2, 1));
  EXPECT_TRUE(s.sum_k.contains(0) && upper_at_most(s.sum_k, 0));
  EXPECT_THROW(interval_prime_stats(20L, 3, Rational(2), t), ValidationError);
}

TEST(IntervalPrimeStats, HigherPrecisionNeverLoosens) {
  const auto& t = table_e15();
  auto s64 = interval_prime_stats(11L, 3, Rational(2), t, 64);
  auto s128 = interval_prime_stats(11L, 3, Rational(2), t, 128);
  auto s256 = interval_prime_stats(11L, 3, Rational(2), t, 256);
  EXPECT_LE(mpfr_cmp(s128.prod1.upper().get(), s64.prod1.upper().get()), 0);
  EXPECT_LE(mpfr_cmp(s256.prod1.upper().get(), s128.prod1.upper().get()), 0);
  EXPECT_LE(mpfr_cmp(s128.prod2.upper().get(), s64.prod2.upper().get()), 0);
  EXPECT_LE(mpfr_cmp(s256.prod2.upper().get(), s128.prod2.upper().get()), 0);
  EXPECT_LE(mpfr_cmp(s128.sum_k.upper().get(), s64.sum_k.upper().get()), 0);
  EXPECT_LE(mpfr_cmp(s256.sum_k.upper().get(), s128.sum_k.upper().get()), 0);
}

TEST(AnalyticIntervalBounds, ConstantsAtThirteen) {
  auto an = lemma_a1_analytic(13);
  const double direct = std::log(14.0 / 13) + 1 / (40.0 * 196) + 1 / (40.0 * 169) +
                        2 / (40.0 * 13) * std::log(14.0 / 13);
  EXPECT_LT(rel_diff(an.integral.mid_double(), direct), 1e-12);
  EXPECT_TRUE(upper_at_most(an.integral, Rational(3, 40)));
  EXPECT_TRUE(upper_at_most(an.log_prod1, Rational(4, 25)));
  EXPECT_TRUE(upper_at_most(an.prod1, Rational(6, 5)));
  EXPECT_TRUE(upper_at_most(an.log_prod2, Rational(53, 50)));
  EXPECT_LT(mpfr_cmp(an.log_prod2.upper().get(), log_rational(Rational(17, 5)).lower().get()), 0);
  EXPECT_TRUE(upper_at_most(an.sum_k_coefficient, Rational(22, 25)));
  EXPECT_FALSE(an.theta_bound_in_range);
}

TEST(AnalyticIntervalBounds, UniformInN) {
  for (long n : {14L, 20L, 40L}) {
    auto an = lemma_a1_analytic(n);
    EXPECT_TRUE(an.theta_bound_in_range);
    EXPECT_TRUE(upper_at_most(an.prod1, Rational(6, 5))) << n;
    EXPECT_TRUE(upper_at_most(an.prod2, Rational(17, 5))) << n;
    EXPECT_TRUE(upper_at_most(an.sum_k_coefficient, Rational(22, 25))) << n;
  }
  EXPECT_THROW(lemma_a1_analytic(12), ValidationError);
  EXPECT_THROW(analytic_interval_bounds(13, 14, 3, Rational(2), true), ValidationError);
}

TEST(AnalyticIntervalBounds, DominatesNumericWhereBothApply) {
  const auto& t = table_e15();
  for (long n : {13L, 14L}) {
    auto an = lemma_a1_analytic(n);
    auto nu = interval_prime_stats(n, 3, Rational(2), t);
    EXPECT_GE(mpfr_cmp(an.prod1.upper().get(), nu.prod1.upper().get()), 0) << n;
    EXPECT_GE(mpfr_cmp(an.prod2.upper().get(), nu.prod2.upper().get()), 0) << n;
    EXPECT_GE(mpfr_cmp(an.sum_k.upper().get(), nu.sum_k.upper().get()), 0) << n;
  }
}

TEST(FloorExp, SmallValues) {
  EXPECT_EQ(floor_exp(11), 59874);
  EXPECT_EQ(floor_exp(13), 442413);
  EXPECT_EQ(floor_exp(0), 1);
}
