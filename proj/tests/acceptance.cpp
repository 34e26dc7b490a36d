// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "oracles.hpp"
#include "properties.hpp"

using namespace covmin;

namespace {

// Pinned tolerances and limits.
constexpr double kC0RuntimeSeconds = 5;
constexpr double kBeta0RuntimeSeconds = 5;
constexpr double kNumericRuntimeSeconds = 30;
constexpr double kCertifyRuntimeSeconds = 120;
constexpr std::size_t kLllSystems = 1000;
constexpr std::size_t kLllMaxEvents = 12;
constexpr std::size_t kLabSystems = 500;
constexpr u64 kLabMaxQ = 10'000;
constexpr std::size_t kDensitySystems = 1000;
constexpr u64 kDensityMaxQ = 100'000;
constexpr int kThetaGridPoints = 100;

const Rational kC0Target(39, 100);
const Rational kBeta0Target(901, 2);
const Rational kProd1Target(6, 5);
const Rational kProd2Target(17, 5);
const Rational kIntegralTarget(3, 40);
const Rational kCoefficientTarget(22, 25);
const Rational kC1LhsTarget(6, 5);
const Rational kC1RhsTarget(188, 100);

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool below(const Enclosure& x, const Rational& q) {
  return below_with_slack(x, Enclosure::exact(q, x.precision()));
}
bool at_most(const DirectedReal& x, const Rational& q) { return x.compare_raw(q) <= 0; }
bool at_least(const DirectedReal& x, const Rational& q) { return x.compare_raw(q) >= 0; }

struct Line {
  bool pass;
  std::string detail;
};

const PrimeTable& table() {
  static const PrimeTable t = sieve_primes(3'300'000);  // e^15 covers the n = 14 comparison
  return t;
}

Line criterion1() {
  auto t0 = Clock::now();
  Schedule s = reference_schedule();
  auto c0 = rankin_c0(s.M, s.p0_log, s.sigma, s.delta, table());
  double dt = seconds_since(t0);
  bool ok = below(c0.bound, kC0Target) && c0.pass && dt <= kC0RuntimeSeconds;
  char buf[160];
  std::snprintf(buf, sizeof buf, "Rankin bound %.11f < 0.39, C0 %s, %.2fs", c0.bound.mid_double(),
                c0.pass ? "passes" : "fails", dt);
  return {ok, buf};
}

Line criterion2() {
  auto t0 = Clock::now();
  Enclosure b = beta0_bound(3, 11, Rational(2, 5), table());
  double dt = seconds_since(t0);
  bool ok = below(b, kBeta0Target) && dt <= kBeta0RuntimeSeconds;
  char buf[160];
  std::snprintf(buf, sizeof buf, "beta_3(0) upper %.7f < 450.5, %.2fs", b.upper().to_double(), dt);
  return {ok, buf};
}

Line criterion3() {
  auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (long n : {11L, 12L}) {
    auto s = interval_prime_stats(n, 3, Rational(2), table());
    Enclosure target = (Enclosure::exact(2 * n) * exp_rational(Rational(n * 2))).reciprocal();
    bool n_ok = at_most(s.prod1.upper(), kProd1Target) && at_most(s.prod2.upper(), kProd2Target) &&
                below_with_slack(s.sum_k.upper(), target.lower());
    ok = ok && n_ok;
    char buf[160];
    std::snprintf(buf, sizeof buf, "n=%ld prod1 %.6f prod2 %.6f sum3 %.4e; ", n, s.prod1.upper().to_double(),
                  s.prod2.upper().to_double(), s.sum_k.upper().to_double());
    detail += buf;
  }
  double dt = seconds_since(t0);
  ok = ok && dt <= kNumericRuntimeSeconds;
  return {ok, detail + std::to_string(dt).substr(0, 5) + "s"};
}

Line criterion4() {
  bool ok = true;
  std::string detail;
  for (long n : {13L, 14L}) {
    auto an = lemma_a1_analytic(n);
    auto nu = interval_prime_stats(n, 3, Rational(2), table());
    bool holds = at_most(an.prod1.upper(), kProd1Target) && at_most(an.prod2.upper(), kProd2Target) &&
                 at_most(an.sum_k_coefficient.upper(), kCoefficientTarget);
    bool dominates = an.prod1.upper().compare_raw(nu.prod1.upper()) >= 0 &&
                     an.prod2.upper().compare_raw(nu.prod2.upper()) >= 0 &&
                     an.sum_k.upper().compare_raw(nu.sum_k.upper()) >= 0;
    ok = ok && holds && dominates;
    if (n == 13) ok = ok && at_most(an.integral.upper(), kIntegralTarget);
    char buf[200];
    std::snprintf(buf, sizeof buf, "n=%ld integral %.5f coefficient %.5f %s; ", n, an.integral.upper().to_double(),
                  an.sum_k_coefficient.upper().to_double(), dominates ? "dominates numeric" : "BELOW numeric");
    detail += buf;
  }
  return {ok, detail};
}

Line criterion5() {
  Schedule s = reference_schedule();
  std::map<unsigned, DirectedReal> beta{{3, beta0_bound(3, s.p0_log, s.delta, table()).upper()}};
  auto c1 = c1_check(0, beta, s, stage_bounds(s, 0, table()));
  bool ok = at_most(c1.lhs_upper, kC1LhsTarget) && at_least(c1.rhs_lower, kC1RhsTarget) && c1.pass;
  char buf[160];
  std::snprintf(buf, sizeof buf, "lhs %.6f <= 1.2, rhs %.6f >= 1.88, C1 %s", c1.lhs_upper.to_double(),
                c1.rhs_lower.to_double(), c1.pass ? "passes" : "fails");
  return {ok, buf};
}

Line criterion6() {
  auto t0 = Clock::now();
  Schedule s = reference_schedule();
  PrimeTable t = prime_table_for(s);
  Certificate cert = certify(s, t);
  double dt = seconds_since(t0);
  Enclosure cap = root(Enclosure::exact(Rational(17, 5)) * Enclosure::exact(2), 3);
  Enclosure rate = exp(Enclosure::exact(Rational(2, 3)));
  bool growth_ok = !cert.stages.empty();
  double worst = 0;
  for (const auto& st : cert.stages) {
    const DirectedReal& g = st.growth_upper.at(3);
    growth_ok = growth_ok && g.compare_raw(cap.lower()) <= 0 && below_with_slack(g, rate.lower());
    worst = std::max(worst, g.to_double());
  }
  bool tail_ok = cert.tail && cert.tail->pass;
  bool ok = growth_ok && tail_ok && cert.certified && dt <= kCertifyRuntimeSeconds;
  char buf[200];
  std::snprintf(buf, sizeof buf, "max growth %.5f <= %.5f < e^(2/3) = %.5f, tail %s, verdict %s, %.2fs", worst,
                cap.lower().to_double(), rate.lower().to_double(), tail_ok ? "closes" : "open",
                cert.certified ? "certified" : "failed", dt);
  return {ok, buf};
}

Line from_tally(const props::Tally& t, std::size_t wanted, const std::string& what) {
  bool ok = t.cases >= wanted && t.clean();
  std::string detail = std::to_string(t.cases) + " " + what + ", " + std::to_string(t.checks) + " checks, " +
                       std::to_string(t.violations.size()) + " violations";
  if (!t.clean()) detail += " (first: " + t.violations.front() + ")";
  return {ok, detail};
}

Line criterion7() {
  return from_tally(props::lll_soundness(7001, kLllSystems, kLllMaxEvents), kLllSystems, "event systems");
}

Line criterion8() {
  return from_tally(props::sieve_lab_suite(8001, kLabSystems, kLabMaxQ, 20), kLabSystems, "lab systems");
}

Line criterion9() {
  Line l = from_tally(props::density_oracle(9001, kDensitySystems, kDensityMaxQ), kDensitySystems, "systems");
  bool erdos = is_covering(erdos_covering_system());
  Rational d = uncovered_density(erdos_covering_system().without(Congruence(23, 24)));
  l.pass = l.pass && erdos && d == Rational(1, 24);
  l.detail += std::string(", Erdos system ") + (erdos ? "covers" : "does not cover") +
              ", without 23 mod 24 density " + fraction_string(d);
  return l;
}

Line criterion10() {
  std::vector<u64> xs;
  for (int j = 0; j < kThetaGridPoints; ++j)
    xs.push_back(678407 + (1'000'000 - 678407) * static_cast<u64>(j) / (kThetaGridPoints - 1));
  auto th = theta_many(xs, table());
  int good = 0;
  for (std::size_t j = 0; j < xs.size(); ++j) {
    Enclosure x = Enclosure::exact(Rational(to_big(xs[j])));
    DirectedReal err = theta_error_bound(x);
    if ((x - th[j]).upper().compare_raw(err) < 0 && (th[j] - x).upper().compare_raw(err) < 0) ++good;
  }
  return {good == kThetaGridPoints,
          std::to_string(good) + "/" + std::to_string(kThetaGridPoints) + " grid points inside x/(40 log x)"};
}

}  // namespace

int main() {
  const std::vector<std::function<Line()>> criteria{criterion1, criterion2, criterion3, criterion4, criterion5,
                                                    criterion6, criterion7, criterion8, criterion9, criterion10};
  int failures = 0;
  for (std::size_t j = 0; j < criteria.size(); ++j) {
    Line l;
    try {
      l = criteria[j]();
    } catch (const std::exception& e) {
      l = {false, std::string("exception: ") + e.what()};
    }
    if (!l.pass) ++failures;
    std::printf("criterion %zu: %s  %s\n", j + 1, l.pass ? "PASS" : "FAIL", l.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
