#pragma once

// Coordinate search over schedule parameters for the smallest certified M.

#include <algorithm>
#include <array>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "covmin/certifier.hpp"

namespace covmin {

/// Candidate values per parameter; a single value pins the coordinate.
struct SearchBox {
  std::vector<Rational> sigma{Rational(9, 50)};
  std::vector<Rational> delta{Rational(2, 5)};
  std::vector<Rational> lambda_exp{Rational(2)};
  std::vector<Rational> pi_good{Rational(1, 2)};
  std::vector<Rational> p0_log{Rational(11)};
  std::vector<Rational> stage_step{Rational(1)};
  std::vector<std::vector<unsigned>> k_sets{{3}};
  ExponentMode exponent_mode = ExponentMode::Infinite;
  TailMode tail_mode = TailMode::Ratio;
  Rational numeric_cap_log = 14;
  unsigned tail_horizon = 8;
  u64 budget = 200;  // schedule evaluations
  u64 seed = 0;      // 0 starts from the middle of every list

  void validate() const {
    if (sigma.empty() || delta.empty() || lambda_exp.empty() || pi_good.empty() ||
        p0_log.empty() || stage_step.empty() || k_sets.empty())
      throw ValidationError("every search coordinate needs at least one value");
    if (budget == 0) throw ValidationError("search budget must be positive");
  }
};

struct SearchResult {
  bool found = false;
  Certificate best;         // best certified, or the failed attempt that got furthest
  std::size_t evaluations = 0;
  std::size_t progress = 0;  // checks passed by `best` when nothing certified
};

namespace detail {

inline std::size_t progress_of(const Certificate& c) {
  std::size_t n = 0;
  if (c.c0 && c.c0->pass) ++n;
  for (const auto& st : c.stages) n += st.c1.pass ? 1 : 0;
  if (c.tail && c.tail->pass) ++n;
  return n;
}

}  // namespace detail

inline PrimeTable prime_table_for(const SearchBox& box) {
  Rational top = box.numeric_cap_log;
  for (const auto& p : box.p0_log) top = std::max(top, p);
  return sieve_primes(to_u64(floor_exp(top)) + 1);
}

inline SearchResult optimize_schedule(const SearchBox& box, const PrimeTable& table) {
  box.validate();
  constexpr std::size_t kDims = 7;
  const std::array<std::size_t, kDims> sizes{box.sigma.size(),  box.delta.size(),
                                             box.lambda_exp.size(), box.pi_good.size(),
                                             box.p0_log.size(), box.stage_step.size(),
                                             box.k_sets.size()};
  using Point = std::array<std::size_t, kDims>;

  Point start{};
  std::mt19937_64 rng(box.seed);
  for (std::size_t d = 0; d < kDims; ++d)
    start[d] = box.seed == 0 ? sizes[d] / 2 : static_cast<std::size_t>(rng() % sizes[d]);

  SearchResult result;
  StatsCache cache;
  std::map<std::pair<std::string, std::string>, Enclosure> euler;  // (p0_log, sigma)
  std::map<Point, Certificate> seen;

  auto evaluate = [&](const Point& pt) -> const Certificate* {
    if (auto it = seen.find(pt); it != seen.end()) return &it->second;
    if (result.evaluations >= box.budget) return nullptr;
    ++result.evaluations;
    Schedule s;
    s.sigma = box.sigma[pt[0]];
    s.delta = box.delta[pt[1]];
    s.lambda_exp = box.lambda_exp[pt[2]];
    s.pi_good = box.pi_good[pt[3]];
    s.p0_log = box.p0_log[pt[4]];
    s.stage_step = box.stage_step[pt[5]];
    s.k_set = box.k_sets[pt[6]];
    s.exponent_mode = box.exponent_mode;
    s.tail_mode = box.tail_mode;
    s.numeric_cap_log = box.numeric_cap_log;
    s.tail_horizon = box.tail_horizon;
    Certificate cert;
    cert.schedule = s;
    try {
      s.validate();
      auto key = std::make_pair(s.p0_log.get_str(), s.sigma.get_str());
      if (!euler.count(key)) euler.emplace(key, rankin_euler_log(s.p0_log, s.sigma, table));
      s.M = minimal_m_from_euler_log(s.sigma, s.delta, euler.at(key));
      cert = certify(s, table, &cache);
    } catch (const std::exception& e) {
      cert.certified = false;
      cert.reason = e.what();
    }
    return &seen.emplace(pt, std::move(cert)).first->second;
  };

  auto better = [](const Certificate& a, const Certificate& b) {
    if (a.certified != b.certified) return a.certified;
    if (a.certified) return a.schedule.M < b.schedule.M;
    return detail::progress_of(a) > detail::progress_of(b);
  };

  Point current = start;
  const Certificate* cur = evaluate(current);
  if (!cur) throw ResourceError("search budget exhausted before the first evaluation");
  for (bool improved = true; improved;) {
    improved = false;
    for (std::size_t d = 0; d < kDims; ++d) {
      for (std::size_t v = 0; v < sizes[d]; ++v) {
        if (v == current[d]) continue;
        Point cand = current;
        cand[d] = v;
        const Certificate* c = evaluate(cand);
        if (!c) break;
        if (better(*c, *cur)) {
          current = cand;
          cur = c;
          improved = true;
        }
      }
    }
    if (result.evaluations >= box.budget) break;
  }
  result.best = *cur;
  result.found = cur->certified;
  result.progress = detail::progress_of(*cur);
  if (!result.found && result.best.reason.empty()) result.best.reason = "no certifiable point in box";
  return result;
}

}  // namespace covmin
