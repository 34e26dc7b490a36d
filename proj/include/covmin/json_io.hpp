#pragma once

// JSON forms of systems, schedules, event systems and reports. Reals are
// written as {"dir": "upper"|"lower", "value": "<decimal>"}; exact values
// as "p/q" strings.

#include <string>
#include <vector>

#include <json.hpp>

#include "covmin/certifier.hpp"
#include "covmin/congruence.hpp"
#include "covmin/lll.hpp"
#include "covmin/optimizer.hpp"
#include "covmin/prime_estimates.hpp"
#include "covmin/sieve_lab.hpp"

#ifndef COVMIN_VERSION
#define COVMIN_VERSION "0.0.0"
#endif

namespace covmin {

using json = nlohmann::json;

inline json tool_info() { return {{"name", "covmin"}, {"version", COVMIN_VERSION}}; }

inline json to_json(const DirectedReal& x, int digits = 20) {
  return {{"dir", to_string(x.direction())}, {"value", x.to_decimal(digits)}};
}

inline std::string exact_string(const Rational& q) { return fraction_string(q); }

/// Integers as JSON numbers or strings; strings may use "a^b" or "aeb".
inline BigInt bigint_from_json(const json& j, const char* what) {
  if (j.is_number_unsigned()) return to_big(j.get<u64>());
  if (j.is_number_integer()) return BigInt(std::to_string(j.get<long long>()), 10);
  if (!j.is_string()) throw ValidationError(std::string(what) + " must be an integer or string");
  std::string s = j.get<std::string>();
  auto pow_form = [&](char sep) -> std::optional<BigInt> {
    auto pos = s.find(sep);
    if (pos == std::string::npos) return std::nullopt;
    BigInt base(s.substr(0, pos), 10);
    unsigned long e = std::stoul(s.substr(pos + 1));
    if (e > 100000) throw ValidationError(std::string(what) + " exponent too large");
    BigInt out;
    if (sep == '^') {
      mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), e);
    } else {
      mpz_ui_pow_ui(out.get_mpz_t(), 10, e);
      out *= base;
    }
    return out;
  };
  try {
    if (auto v = pow_form('^')) return *v;
    if (auto v = pow_form('e')) return *v;
    if (auto v = pow_form('E')) return *v;
    return BigInt(s, 10);
  } catch (const std::invalid_argument&) {
    throw ValidationError(std::string(what) + ": cannot parse integer '" + s + "'");
  }
}

inline u64 u64_from_json(const json& j, const char* what) {
  BigInt v = bigint_from_json(j, what);
  if (v < 0 || !fits_u64(v)) throw ValidationError(std::string(what) + " out of range");
  return to_u64(v);
}

/// Rationals as integers, "p/q" or decimal strings; a JSON float is read
/// through its shortest decimal form.
inline Rational rational_from_json(const json& j, const char* what) {
  try {
    if (j.is_number_integer()) return Rational(BigInt(j.dump(), 10));
    if (j.is_number_float()) return parse_rational(j.dump());
    if (j.is_string()) return parse_rational(j.get<std::string>());
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(what) + ": " + e.what());
  }
  throw ValidationError(std::string(what) + " must be a number or string");
}

template <typename T>
T field(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

inline const json& required(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw ValidationError(std::string("missing field '") + key + "'");
  return j.at(key);
}

// --- congruence systems -----------------------------------------------------

inline CongruenceSystem system_from_json(const json& j) {
  const json& cs = required(j, "congruences");
  if (!cs.is_array()) throw ValidationError("'congruences' must be an array");
  std::vector<Congruence> out;
  for (const auto& c : cs) {
    u64 m = u64_from_json(required(c, "m"), "modulus");
    BigInt a = bigint_from_json(required(c, "a"), "residue");
    if (m < 2) throw ValidationError("congruence modulus must be at least 2");
    // negative or unreduced residues are not silently reduced
    if (a < 0 || !fits_u64(a)) throw ValidationError("residue must be in [0, m)");
    out.emplace_back(to_u64(a), m);
  }
  return CongruenceSystem(std::move(out), field<bool>(j, "distinct", false));
}

inline json to_json(const CongruenceSystem& s) {
  json cs = json::array();
  for (const auto& c : s.congruences()) cs.push_back({{"a", c.residue()}, {"m", c.modulus()}});
  return {{"congruences", cs}, {"distinct", s.distinct()}};
}

// --- schedules ----------------------------------------------------------------

inline std::vector<unsigned> kset_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ValidationError("k_set must be a non-empty array");
  std::vector<unsigned> out;
  for (const auto& k : j) {
    if (!k.is_number_unsigned()) throw ValidationError("moment orders must be positive integers");
    out.push_back(k.get<unsigned>());
  }
  return out;
}

inline ExponentMode exponent_mode_from(const std::string& s) {
  if (s == "infinite") return ExponentMode::Infinite;
  if (s == "squarefree") return ExponentMode::Squarefree;
  throw ValidationError("exponent_mode must be 'infinite' or 'squarefree'");
}

inline TailMode tail_mode_from(const std::string& s) {
  if (s == "ratio") return TailMode::Ratio;
  if (s == "cumulative") return TailMode::Cumulative;
  throw ValidationError("tail_mode must be 'ratio' or 'cumulative'");
}

inline Schedule schedule_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("schedule must be an object");
  Schedule s;
  s.M = bigint_from_json(required(j, "M"), "M");
  s.p0_log = rational_from_json(required(j, "P0_log"), "P0_log");
  s.stage_step = rational_from_json(required(j, "stage_step"), "stage_step");
  s.lambda_exp = rational_from_json(required(j, "lambda_exp"), "lambda_exp");
  s.pi_good = rational_from_json(required(j, "pi_good"), "pi_good");
  s.delta = rational_from_json(required(j, "delta"), "delta");
  s.sigma = rational_from_json(required(j, "sigma"), "sigma");
  s.k_set = kset_from_json(required(j, "k_set"));
  if (j.contains("exponent_mode")) s.exponent_mode = exponent_mode_from(j.at("exponent_mode"));
  if (j.contains("tail_mode")) s.tail_mode = tail_mode_from(j.at("tail_mode"));
  if (j.contains("numeric_cap_log"))
    s.numeric_cap_log = rational_from_json(j.at("numeric_cap_log"), "numeric_cap_log");
  if (j.contains("tail_horizon")) s.tail_horizon = j.at("tail_horizon").get<unsigned>();
  s.validate();
  return s;
}

inline json to_json(const Schedule& s) {
  return {{"M", s.M.get_str()},
          {"P0_log", exact_string(s.p0_log)},
          {"stage_step", exact_string(s.stage_step)},
          {"lambda_exp", exact_string(s.lambda_exp)},
          {"pi_good", exact_string(s.pi_good)},
          {"delta", exact_string(s.delta)},
          {"sigma", exact_string(s.sigma)},
          {"k_set", s.k_set},
          {"exponent_mode", to_string(s.exponent_mode)},
          {"tail_mode", to_string(s.tail_mode)},
          {"numeric_cap_log", exact_string(s.numeric_cap_log)},
          {"tail_horizon", s.tail_horizon}};
}

inline json to_json(const Certificate& c) {
  json out;
  out["schedule"] = to_json(c.schedule);
  out["precision_bits"] = c.precision;
  out["verdict"] = c.certified ? "certified" : "failed";
  if (!c.certified) out["reason"] = c.reason;
  if (c.c0) out["c0"] = {{"rankin_upper", to_json(c.c0->bound.upper())}, {"pass", c.c0->pass}};
  json beta0 = json::object();
  for (const auto& [k, b] : c.beta0_upper) beta0[std::to_string(k)] = to_json(b);
  out["beta0_upper"] = beta0;
  json stages = json::array();
  for (const auto& st : c.stages) {
    json e{{"i", st.i},
           {"interval_log", {exact_string(st.a), exact_string(st.b)}},
           {"method", st.method},
           {"c1_lhs_upper", to_json(st.c1.lhs_upper)},
           {"pass", st.c1.pass},
           {"best_k", st.c1.best_k}};
    if (st.c1.rhs_unbounded) {
      e["c1_rhs_lower"] = nullptr;
    } else {
      e["c1_rhs_lower"] = to_json(st.c1.rhs_lower);
    }
    json by_k = json::object(), beta = json::object(), growth = json::object();
    for (const auto& [k, r] : st.c1.rhs_lower_by_k) by_k[std::to_string(k)] = to_json(r);
    for (const auto& [k, b] : st.beta_upper) beta[std::to_string(k)] = to_json(b);
    for (const auto& [k, g] : st.growth_upper) growth[std::to_string(k)] = to_json(g);
    e["c1_rhs_lower_by_k"] = by_k;
    e["beta_upper"] = beta;
    e["growth_upper"] = growth;
    stages.push_back(e);
  }
  out["stage_checks"] = stages;
  out["analytic_from"] = c.analytic_from ? json(*c.analytic_from) : json(nullptr);
  if (c.tail) {
    out["tail"] = {{"mode", c.tail->mode},
                   {"base_index", c.tail->base_index},
                   {"k", c.tail->k},
                   {"growth_upper", to_json(c.tail->growth_upper)},
                   {"rhs_growth_lower", to_json(c.tail->rhs_growth_lower)},
                   {"pass", c.tail->pass}};
  } else {
    out["tail"] = nullptr;
  }
  return out;
}

inline SearchBox search_box_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("search box must be an object");
  SearchBox box;
  auto list = [&](const char* key, std::vector<Rational>& dst) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    dst.clear();
    if (v.is_array()) {
      for (const auto& x : v) dst.push_back(rational_from_json(x, key));
    } else {
      dst.push_back(rational_from_json(v, key));
    }
  };
  list("sigma", box.sigma);
  list("delta", box.delta);
  list("lambda_exp", box.lambda_exp);
  list("pi_good", box.pi_good);
  list("P0_log", box.p0_log);
  list("stage_step", box.stage_step);
  if (j.contains("k_sets")) {
    box.k_sets.clear();
    for (const auto& ks : j.at("k_sets")) box.k_sets.push_back(kset_from_json(ks));
  }
  if (j.contains("exponent_mode")) box.exponent_mode = exponent_mode_from(j.at("exponent_mode"));
  if (j.contains("tail_mode")) box.tail_mode = tail_mode_from(j.at("tail_mode"));
  if (j.contains("numeric_cap_log"))
    box.numeric_cap_log = rational_from_json(j.at("numeric_cap_log"), "numeric_cap_log");
  if (j.contains("tail_horizon")) box.tail_horizon = j.at("tail_horizon").get<unsigned>();
  if (j.contains("budget")) box.budget = u64_from_json(j.at("budget"), "budget");
  if (j.contains("seed")) box.seed = u64_from_json(j.at("seed"), "seed");
  box.validate();
  return box;
}

inline json to_json(const SearchBox& box) {
  auto strs = [](const std::vector<Rational>& v) {
    json a = json::array();
    for (const auto& q : v) a.push_back(exact_string(q));
    return a;
  };
  return {{"sigma", strs(box.sigma)},
          {"delta", strs(box.delta)},
          {"lambda_exp", strs(box.lambda_exp)},
          {"pi_good", strs(box.pi_good)},
          {"P0_log", strs(box.p0_log)},
          {"stage_step", strs(box.stage_step)},
          {"k_sets", box.k_sets},
          {"exponent_mode", to_string(box.exponent_mode)},
          {"tail_mode", to_string(box.tail_mode)},
          {"numeric_cap_log", exact_string(box.numeric_cap_log)},
          {"tail_horizon", box.tail_horizon},
          {"budget", box.budget},
          {"seed", box.seed}};
}

// --- event systems --------------------------------------------------------------

inline EventSystem event_system_from_json(const json& j) {
  u64 space = u64_from_json(required(j, "space_size"), "space_size");
  if (space == 0) throw ValidationError("space_size must be positive");
  if (space > (u64{1} << 26)) throw ResourceError("space_size too large");
  std::vector<ResidueSet> events;
  for (const auto& e : required(j, "events")) {
    ResidueSet s(space);
    for (const auto& z : e) s.insert(u64_from_json(z, "event member"));
    events.push_back(std::move(s));
  }
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  if (j.contains("edges"))
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw ValidationError("edges are [u, v] pairs");
      edges.emplace_back(e[0].get<std::size_t>(), e[1].get<std::size_t>());
    }
  std::vector<Rational> weights;
  for (const auto& w : required(j, "weights")) weights.push_back(rational_from_json(w, "weight"));
  return EventSystem(space, std::move(events), std::move(edges), std::move(weights),
                     !field<bool>(j, "directed", false));
}

}  // namespace covmin
