#include <gtest/gtest.h>

#include "oracles.hpp"
#include "properties.hpp"

using namespace covmin;

namespace {

CongruenceSystem sys(std::vector<Congruence> cs, bool distinct = false) {
  return CongruenceSystem(std::move(cs), distinct);
}

std::vector<u64> members(const ResidueSet& s) { return s.members(); }

}  // namespace

TEST(Congruence, RejectsBadInput) {
  EXPECT_THROW(Congruence(0, 1), ValidationError);
  EXPECT_THROW(Congruence(5, 5), ValidationError);
  EXPECT_NO_THROW(Congruence(4, 5));
  EXPECT_THROW(sys({{0, 2}, {1, 2}}, true), ValidationError);
  EXPECT_NO_THROW(sys({{0, 2}, {1, 2}}, false));
}

TEST(ResidueSet, DenseAndSparseAgree) {
  ResidueSet dense(100);
  ResidueSet sparse((u64{1} << 30));
  for (u64 z : {3u, 97u, 50u, 3u}) {
    dense.insert(z);
    sparse.insert(z);
  }
  EXPECT_EQ(dense.size(), 3u);
  EXPECT_EQ(sparse.size(), 3u);
  EXPECT_EQ(dense.members(), (std::vector<u64>{3, 50, 97}));
  EXPECT_EQ(sparse.members(), (std::vector<u64>{3, 50, 97}));
  EXPECT_THROW(dense.insert(100), ValidationError);
  dense.erase(50);
  EXPECT_FALSE(dense.contains(50));
  EXPECT_EQ(ResidueSet::full(6).size(), 6u);
}

TEST(LcmModulus, Examples) {
  EXPECT_EQ(lcm_modulus(sys({{0, 2}, {0, 3}})), 6);
  EXPECT_EQ(lcm_modulus(erdos_covering_system()), 24);
  EXPECT_EQ(lcm_modulus(sys({{1, 4}, {3, 8}})), 8);
  EXPECT_THROW(lcm_modulus(CongruenceSystem()), ValidationError);
}

TEST(IsCovering, Examples) {
  EXPECT_TRUE(is_covering(erdos_covering_system()));
  EXPECT_TRUE(is_covering(sys({{0, 2}, {1, 2}})));
  EXPECT_FALSE(is_covering(sys({{0, 2}, {1, 4}})));
  EXPECT_THROW(is_covering(CongruenceSystem()), ValidationError);
}

TEST(IsCovering, RecursionWithoutEnumeration) {
  CoveringConfig cfg;
  cfg.enumeration_threshold = 1;
  EXPECT_TRUE(is_covering(erdos_covering_system(), cfg));
  auto minus = erdos_covering_system().without(Congruence(23, 24));
  EXPECT_FALSE(is_covering(minus, cfg));
  EXPECT_EQ(uncovered_density(minus, cfg), Rational(1, 24));
}

TEST(IsCovering, LargeModulusUsesRecursion) {
  // 0 mod 2, 1 mod 2*p for a large prime p: density 1/2 - 1/(2p), lcm far
  // above the enumeration threshold.
  const u64 p = 1'000'000'007;
  auto s = sys({{0, 2}, {1, 2 * p}});
  EXPECT_FALSE(is_covering(s));
  EXPECT_EQ(uncovered_density(s), Rational(1, 2) - Rational(1, 2) / Rational(static_cast<unsigned long>(p)));
}

TEST(IsCovering, NodeBudget) {
  CoveringConfig cfg;
  cfg.enumeration_threshold = 1;
  cfg.node_budget = 2;
  EXPECT_THROW(uncovered_density(erdos_covering_system(), cfg), ResourceError);
}

TEST(UncoveredDensity, Examples) {
  EXPECT_EQ(uncovered_density(sys({{0, 2}})), Rational(1, 2));
  EXPECT_EQ(uncovered_density(erdos_covering_system()), 0);
  auto minus = erdos_covering_system().without(Congruence(23, 24));
  const Rational scanned = make_rational(oracle::uncovered_count(minus, 24), 24);
  EXPECT_EQ(uncovered_density(minus), scanned);
  EXPECT_EQ(uncovered_density(minus), Rational(1, 24));
}

TEST(UncoveredResidues, Examples) {
  EXPECT_EQ(members(uncovered_residues(sys({{0, 2}}), 4)), (std::vector<u64>{1, 3}));
  auto minus = erdos_covering_system().without(Congruence(23, 24));
  EXPECT_EQ(members(uncovered_residues(minus, 24)), (std::vector<u64>{23}));
  EXPECT_EQ(uncovered_residues(CongruenceSystem(), 6).size(), 6u);
  EXPECT_THROW(uncovered_residues(sys({{0, 4}}), 6), ValidationError);
  CoveringConfig tiny;
  tiny.materialize_limit = 10;
  EXPECT_THROW(uncovered_residues(sys({{0, 2}}), 12, tiny), ResourceError);
}

TEST(SplitModulus, Examples) {
  EXPECT_EQ(split_modulus(30, 6), (ModulusSplit{6, 5}));
  EXPECT_EQ(split_modulus(7, 1), (ModulusSplit{1, 7}));
  EXPECT_EQ(split_modulus(24, 24), (ModulusSplit{24, 1}));
}

TEST(SplitModulus, PropertyOverSmallRange) {
  for (u64 q = 1; q <= 60; ++q)
    for (u64 m = 1; m <= 200; ++m) {
      auto [m0, n] = split_modulus(m, q);
      ASSERT_EQ(m0 * n, m);
      ASSERT_EQ(std::gcd(n, q), 1u);
      for (u64 p : factorize(m0).primes()) ASSERT_EQ(q % p, 0u);
    }
}

TEST(StageFiltration, Invariants) {
  auto s = sys({{1, 10}, {3, 5}, {0, 4}, {5, 14}, {2, 21}}, true);
  StageFiltration f(s, {2, 5, 7});
  EXPECT_EQ(f.modulus(), 420u);
  ASSERT_EQ(f.stage_count(), 3u);
  EXPECT_EQ(f.stage_modulus(-1), 1u);
  EXPECT_EQ(f.stage_modulus(0), 4u);
  EXPECT_EQ(f.stage_modulus(1), 60u);  // 21 contributes its factor 3 once P_1 = 5
  EXPECT_EQ(f.stage_modulus(2), 420u);
  // every n > 1 dividing Q_{i+1} and coprime to Q_i
  EXPECT_EQ(f.new_moduli(0), (std::vector<u64>{3, 5, 15}));
  EXPECT_EQ(f.new_moduli(1), (std::vector<u64>{7}));
  for (std::size_t i = 0; i + 1 < f.stage_count(); ++i) {
    u64 qi = f.stage_modulus(static_cast<int>(i));
    u64 qn = f.stage_modulus(static_cast<int>(i) + 1);
    EXPECT_EQ(qn % qi, 0u);
    for (const auto& c : f.smooth_congruences(static_cast<int>(i))) EXPECT_EQ(qi % c.modulus(), 0u);
    for (u64 n : f.new_moduli(i)) {
      EXPECT_GT(n, 1u);
      EXPECT_EQ(qn % n, 0u);
      EXPECT_EQ(std::gcd(n, qi), 1u);
      for (u64 p : factorize(n).primes()) {
        EXPECT_GT(p, f.thresholds()[i]);
        EXPECT_LE(p, f.thresholds()[i + 1]);
      }
    }
  }
}

TEST(StageFiltration, ExtendsLastThreshold) {
  StageFiltration f(sys({{1, 10}, {0, 7}}), {2, 5});
  EXPECT_EQ(f.stage_count(), 3u);
  EXPECT_EQ(f.stage_modulus(2), 70u);
}

TEST(StageFiltration, RejectsBadThresholds) {
  EXPECT_THROW(StageFiltration(sys({{0, 2}}), {}), ValidationError);
  EXPECT_THROW(StageFiltration(sys({{0, 2}}), {1}), ValidationError);
  EXPECT_THROW(StageFiltration(sys({{0, 6}}), {3, 3}), ValidationError);
}

TEST(EventSet, Examples) {
  StageFiltration f1(sys({{1, 10}}), {2, 5});
  EXPECT_EQ(members(event_set(f1, 0, 5, 1)), (std::vector<u64>{1}));
  EXPECT_EQ(event_set(f1, 0, 5, 1).modulus(), 10u);
  EXPECT_TRUE(event_set(f1, 0, 5, 0).empty());

  StageFiltration f2(sys({{1, 10}, {3, 5}}), {2, 5});
  auto a = event_set(f2, 0, 5, 1);
  // direct enumeration of z = 1 mod 2 hit by 1 mod 10 or 3 mod 5
  std::vector<u64> expect;
  for (u64 z = 1; z < 10; z += 2)
    if (z % 10 == 1 || z % 5 == 3) expect.push_back(z);
  EXPECT_EQ(members(a), expect);
  EXPECT_EQ(a.size(), 2u);
  EXPECT_THROW(event_set(f2, 0, 3, 1), ValidationError);
  EXPECT_THROW(event_set(f2, 0, 5, 2), ValidationError);
}

TEST(EventSet, ReconstructsTheSieveOnRandomSystems) {
  std::mt19937_64 rng(7);
  int checked = 0;
  for (int trial = 0; trial < 400 && checked < 150; ++trial) {
    auto lc = oracle::random_lab_case(rng, 2000, 16);
    if (!lc) continue;
    StageFiltration f(lc->system, lc->thresholds);
    for (std::size_t i = 0; i + 1 < f.stage_count(); ++i) {
      u64 qi = f.stage_modulus(static_cast<int>(i));
      u64 qn = f.stage_modulus(static_cast<int>(i) + 1);
      CongruenceSystem si(f.smooth_congruences(static_cast<int>(i)));
      CongruenceSystem sn(f.smooth_congruences(static_cast<int>(i) + 1));
      for (u64 r = 0; r < qi; ++r) {
        if (si.covers(r)) continue;
        std::vector<ResidueSet> events;
        for (u64 n : f.new_moduli(i)) {
          auto e = event_set(f, i, n, r);
          // union bound: at most one class per contributing modulus m0*n
          std::size_t contributors = f.congruences_with_new_factor(i, n).size();
          ASSERT_LE(e.size(), contributors);
          events.push_back(std::move(e));
        }
        for (u64 z = r; z < qn; z += qi) {
          bool hit = false;
          for (std::size_t j = 0; j < events.size(); ++j) {
            u64 n = f.new_moduli(i)[j];
            hit = hit || events[j].contains(z % (n * qi));
          }
          ASSERT_EQ(hit, sn.covers(z)) << "z=" << z << " r=" << r;
        }
      }
    }
    ++checked;
  }
  EXPECT_GE(checked, 100);
}

TEST(DensityOracle, RandomSystemsAgreeWithScan) {
  auto t = props::density_oracle(11, 300, 100000);
  EXPECT_EQ(t.cases, 300u);
  EXPECT_TRUE(t.clean()) << t.violations.front();
}

TEST(DensityOracle, SmallDistinctCovering) {
  // 0 mod 2, 0 mod 3, 1 mod 4, 5 mod 6, 7 mod 12 covers.
  auto s = sys({{0, 2}, {0, 3}, {1, 4}, {5, 6}, {7, 12}}, true);
  EXPECT_EQ(oracle::uncovered_count(s, 12), 0u);
  EXPECT_TRUE(is_covering(s));
  EXPECT_EQ(uncovered_density(s), 0);
}
