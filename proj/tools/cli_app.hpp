#pragma once

// The covmin command line, callable in-process.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "covmin/covmin.hpp"
#include "covmin/json_io.hpp"

namespace covmin::cli {

enum Exit : int { kOk = 0, kDomainFailure = 1, kUsage = 2, kResource = 3 };

struct RunConfig {
  std::string subcommand;
  std::string input_path = "-";
  std::string output_path;
  unsigned precision_bits = 128;
  u64 budget_nodes = 10'000'000;
  std::optional<u64> seed;
  bool quiet = false;
  bool minimal_m = false;  // certify: replace M by the smallest M passing (C0)
};

namespace detail {

inline json read_input(const std::string& path, std::istream& in) {
  try {
    if (path == "-") return json::parse(in);
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot open input file '" + path + "'");
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("invalid JSON: ") + e.what());
  }
}

inline json verify(const json& input, const RunConfig& cfg, int& code) {
  CongruenceSystem sys = system_from_json(input);
  CoveringConfig cc;
  cc.node_budget = cfg.budget_nodes;
  bool covering = is_covering(sys, cc);
  code = covering ? kOk : kDomainFailure;
  return {{"covering", covering}, {"modulus", lcm_modulus(sys).get_str()}};
}

inline json density(const json& input, const RunConfig& cfg, int& code) {
  CongruenceSystem sys = system_from_json(input);
  CoveringConfig cc;
  cc.node_budget = cfg.budget_nodes;
  Rational d = uncovered_density(sys, cc);
  code = kOk;
  return {{"density", exact_string(d)}, {"modulus", lcm_modulus(sys).get_str()}};
}

inline json lab(const json& input, const RunConfig&, int& code) {
  CongruenceSystem sys = system_from_json(required(input, "system"));
  std::vector<u64> thresholds;
  for (const auto& t : required(input, "thresholds")) thresholds.push_back(u64_from_json(t, "threshold"));
  Rational lambda_exp = rational_from_json(required(input, "lambda_exp"), "lambda_exp");
  std::vector<unsigned> ks = input.contains("k") ? kset_from_json(input.at("k")) : std::vector<unsigned>{1, 2, 3};
  LabConfig lc;
  if (input.contains("max_modulus")) lc.max_modulus = u64_from_json(input.at("max_modulus"), "max_modulus");
  auto run = run_lab(sys, thresholds, lambda_exp, ks, lc);
  json stages = json::array();
  bool ok = true;
  for (const auto& st : run) {
    json beta = json::object();
    for (std::size_t j = 0; j < ks.size(); ++j) beta[std::to_string(ks[j])] = exact_string(st.beta[j]);
    json e{{"i", st.state.i},
           {"Q_i", st.state.q},
           {"support_size", st.state.support.size()},
           {"mass", exact_string(st.state.mass())},
           {"beta_k", beta}};
    if (st.result) {
      const StageResult& r = *st.result;
      e["pi_good"] = exact_string(r.pi_good);
      e["good_fibres"] = r.r_star.size();
      json fails = json::array();
      for (const auto& f : r.failures) {
        json ps = json::array();
        for (const auto& [p, s] : f.failing_primes) ps.push_back({{"p", p}, {"dilation_sum", exact_string(s)}});
        fails.push_back({{"r", f.r}, {"primes", ps}});
      }
      e["failures"] = fails;
      e["not_well_distributed"] = r.not_well_distributed;
      if (!r.ok) {
        e["stage_failure"] = r.reason;
        ok = false;
      }
    }
    stages.push_back(e);
  }
  code = ok ? kOk : kDomainFailure;
  return {{"stages", stages}, {"ok", ok}};
}

inline json lll(const json& input, const RunConfig&, int& code) {
  EventSystem sys = event_system_from_json(input);
  CriterionResult cr = check_lovasz_criterion(sys);
  json out{{"criterion_ok", cr.ok}, {"worst_slack", exact_string(cr.worst_slack)}};
  bool small = sys.space_size() <= kBruteForceLimit;
  out["exact"] = small ? json(exact_string(brute_force_uncovered(sys))) : json(nullptr);
  if (!cr.ok) {
    out["weak_bound"] = nullptr;
    out["relative_bounds"] = json::object();
    code = kDomainFailure;
    return out;
  }
  out["weak_bound"] = exact_string(weak_lower_bound(sys));
  json rel = json::object();
  if (input.contains("U")) {
    for (const auto& u : input.at("U")) {
      std::vector<std::size_t> U = u.get<std::vector<std::size_t>>();
      std::string key;
      for (std::size_t x : U) key += (key.empty() ? "" : ",") + std::to_string(x);
      rel[key] = exact_string(lower_bound(sys, U));
    }
  }
  out["relative_bounds"] = rel;
  code = kOk;
  return out;
}

inline json primes(const json& input, const RunConfig&, int& code) {
  long n = required(input, "n").get<long>();
  unsigned k = input.contains("k") ? input.at("k").get<unsigned>() : 3;
  Rational e = input.contains("lambda_exp") ? rational_from_json(input.at("lambda_exp"), "lambda_exp") : Rational(2);
  std::string method = input.contains("method") ? input.at("method").get<std::string>() : "auto";
  if (method == "auto") method = n + 1 <= 14 ? "numeric" : "analytic";
  if (n < 1) throw ValidationError("n must be at least 1");
  std::string sum_key = "sum" + std::to_string(k) + "_upper";
  json out{{"n", n}, {"k", k}, {"lambda_exp", exact_string(e)}, {"method", method}};
  if (method == "numeric") {
    if (n + 1 > 18) throw ResourceError("numeric path limited to n + 1 <= 18");
    PrimeTable table = sieve_primes(to_u64(floor_exp(Rational(n + 1))) + 1);
    IntervalPrimeStats st = interval_prime_stats(n, k, e, table);
    out["prod1_upper"] = to_json(st.prod1.upper());
    out["prod2_upper"] = to_json(st.prod2.upper());
    out["prod2_squarefree_upper"] = to_json(st.prod2_squarefree.upper());
    out[sum_key] = to_json(st.sum_k.upper());
    out["prime_count"] = st.prime_count;
  } else if (method == "analytic") {
    AnalyticBounds an = analytic_interval_bounds(Rational(n), Rational(n + 1), k, e, false);
    out["prod1_upper"] = to_json(an.prod1.upper());
    out["prod2_upper"] = to_json(an.prod2.upper());
    out[sum_key] = to_json(an.sum_k.upper());
    out["integral_upper"] = to_json(an.integral.upper());
    out["sum_coefficient_upper"] = to_json(an.sum_k_coefficient.upper());
    out["theta_range_valid"] = an.theta_bound_in_range;
  } else {
    throw ValidationError("method must be numeric, analytic or auto");
  }
  code = kOk;
  return out;
}

inline json certify_cmd(const json& input, const RunConfig& cfg, int& code) {
  Schedule s = schedule_from_json(input);
  PrimeTable table = prime_table_for(s);
  if (cfg.minimal_m) s.M = minimal_m(s.p0_log, s.sigma, s.delta, table);
  Certificate c = certify(s, table);
  code = c.certified ? kOk : kDomainFailure;
  return {{"certificate", to_json(c)}};
}

inline json search(const json& input, const RunConfig& cfg, int& code) {
  SearchBox box = search_box_from_json(input);
  if (cfg.seed) box.seed = *cfg.seed;
  PrimeTable table = prime_table_for(box);
  SearchResult r = optimize_schedule(box, table);
  code = r.found ? kOk : kDomainFailure;
  return {{"found", r.found},
          {"evaluations", r.evaluations},
          {"progress", r.progress},
          {"best", to_json(r.best)}};
}

}  // namespace detail

/// Executes one subcommand and returns the report and exit code.
inline int run(const RunConfig& cfg, std::istream& in, json& report) {
  report = json::object();
  report["tool"] = tool_info();
  report["command"] = cfg.subcommand;
  report["precision_bits"] = cfg.precision_bits;
  int code = kOk;
  try {
    if (cfg.precision_bits < 32 || cfg.precision_bits > 65536)
      throw ValidationError("precision must lie in [32, 65536] bits");
    if (cfg.budget_nodes == 0) throw ValidationError("budgets must be positive");
    ScopedPrecision guard(static_cast<mpfr_prec_t>(cfg.precision_bits));
    json input = detail::read_input(cfg.input_path, in);
    report["input"] = input;
    json body;
    if (cfg.subcommand == "verify") body = detail::verify(input, cfg, code);
    else if (cfg.subcommand == "density") body = detail::density(input, cfg, code);
    else if (cfg.subcommand == "lab") body = detail::lab(input, cfg, code);
    else if (cfg.subcommand == "lll") body = detail::lll(input, cfg, code);
    else if (cfg.subcommand == "primes") body = detail::primes(input, cfg, code);
    else if (cfg.subcommand == "certify") body = detail::certify_cmd(input, cfg, code);
    else if (cfg.subcommand == "search") body = detail::search(input, cfg, code);
    else throw ValidationError("unknown subcommand '" + cfg.subcommand + "'");
    for (auto& [key, value] : body.items()) report[key] = value;
  } catch (const ResourceError& e) {
    report["error"] = {{"kind", "resource"}, {"message", e.what()}};
    code = kResource;
  } catch (const ValidationError& e) {
    report["error"] = {{"kind", "validation"}, {"message", e.what()}};
    code = kUsage;
  } catch (const json::exception& e) {
    report["error"] = {{"kind", "validation"}, {"message", e.what()}};
    code = kUsage;
  } catch (const std::exception& e) {
    report["error"] = {{"kind", "internal"}, {"message", e.what()}};
    code = kDomainFailure;
  }
  return code;
}

/// Full argv handling: parse flags, run, write the report.
inline int main(int argc, char** argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"covmin: covering systems, local lemma and minimum-modulus certificates"};
  app.set_version_flag("--version", std::string(COVMIN_VERSION));
  app.require_subcommand(1);
  RunConfig cfg;
  u64 seed = 0;
  app.add_option("--precision", cfg.precision_bits, "working precision in bits")
      ->envname("COVMIN_PRECISION");
  app.add_option("--budget-nodes", cfg.budget_nodes, "fibre recursion node budget")
      ->envname("COVMIN_BUDGET_NODES");
  auto* seed_opt = app.add_option("--seed", seed, "search seed")->envname("COVMIN_SEED");
  app.add_flag("--quiet", cfg.quiet, "do not print the report")->envname("COVMIN_QUIET");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"verify", "decide whether a congruence system covers the integers"},
      {"density", "exact density of the uncovered set"},
      {"lab", "run the staged sieve exactly on a small system"},
      {"lll", "local lemma criterion and bounds for an event system"},
      {"primes", "certified prime products and sums over (e^n, e^(n+1)]"},
      {"certify", "certify a schedule"},
      {"search", "search a parameter box for the smallest certified M"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("input", cfg.input_path, "input JSON file, - for stdin");
    sub->add_option("-o,--output", cfg.output_path, "write the report to this file");
    if (name == "certify") sub->add_flag("--minimal-m", cfg.minimal_m, "use the smallest M passing (C0)");
    sub->callback([&cfg, name = name] { cfg.subcommand = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    json report{{"tool", tool_info()}, {"error", {{"kind", "usage"}, {"message", e.what()}}}};
    err << report.dump(2) << "\n";
    return kUsage;
  }
  if (seed_opt->count() > 0) cfg.seed = seed;

  json report;
  int code = run(cfg, in, report);
  std::string text = report.dump(2) + "\n";
  if (!cfg.output_path.empty()) {
    std::ofstream f(cfg.output_path);
    if (!f) {
      err << json{{"tool", tool_info()}, {"error", {{"kind", "usage"}, {"message", "cannot write output file"}}}}.dump(2)
          << "\n";
      return kUsage;
    }
    f << text;
  }
  if (!cfg.quiet && cfg.output_path.empty()) out << text;
  if (report.contains("error") && !cfg.quiet) err << report.at("error").dump() << "\n";
  return code;
}

}  // namespace covmin::cli
