#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <future>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "amrvns/evaluation.hpp"
#include "amrvns/io.hpp"
#include "amrvns/model.hpp"
#include "amrvns/oracle.hpp"
#include "amrvns/vns.hpp"

namespace amrvns {

enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitInfeasible = 2, kExitStructural = 3 };

struct RunConfig {
  std::string command;
  std::string instance_path;
  std::string format = "json";
  std::string profile = "small";
  std::size_t iterations = 1000;
  std::vector<std::size_t> bench_iterations{800, 1000, 2000, 4000, 5000};
  std::uint64_t seed = 1;
  std::size_t repeats = 10;
  std::size_t jobs = 1;
  bool best_only = false;
  std::optional<double> epsilon, delta, xi1, xi2, xi3;
  double scale_distance = 1.0;
  double scale_variance = 1.0;
  std::size_t mc_samples = 100000;
  std::string plan_path;
  std::string output_path;
  bool verbose = false;
};

namespace detail {

inline Instance configured_instance(const RunConfig& cfg) {
  const auto profile = cfg.profile == "large" ? SolomonProfile::Large : SolomonProfile::Small;
  if (cfg.profile != "small" && cfg.profile != "large")
    throw InputError("unknown profile '" + cfg.profile + "'");
  Instance inst = load_instance_file(cfg.instance_path, parse_format(cfg.format), profile);
  if (cfg.epsilon) inst.cost.epsilon = *cfg.epsilon;
  if (cfg.delta) inst.cost.shake_delta = *cfg.delta;
  if (cfg.xi1) inst.cost.fixed_per_amr = *cfg.xi1;
  if (cfg.xi2) inst.cost.per_meter = *cfg.xi2;
  if (cfg.xi3) inst.cost.tw_penalty = *cfg.xi3;
  if (cfg.scale_distance != 1.0) inst = scale_distance(std::move(inst), cfg.scale_distance);
  if (cfg.scale_variance != 1.0) inst = scale_variance(std::move(inst), cfg.scale_variance);
  require_valid(inst);
  return inst;
}

inline void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw InputError("cannot write '" + path + "'");
  f << text;
}

inline std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

inline int cmd_solve(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const Instance inst = configured_instance(cfg);
  SolveOptions opt;
  opt.iterations = cfg.iterations;
  opt.seed = cfg.seed;
  if (cfg.verbose) opt.trace = &err;
  const SolveResult res = solve(inst, opt);
  const std::string json = solution_to_json(inst, res.solution, res.evaluation).dump(2) + "\n";

  out << route_table(inst, res.solution, res.evaluation);
  out << "m=" << res.evaluation.amr_count << " distance=" << res.evaluation.total_distance
      << " f=" << fixed(res.evaluation.objective, 2)
      << " feasible=" << (res.feasible ? "true" : "false") << '\n';
  write_text(cfg.output_path, json, out);
  return res.feasible ? kExitOk : kExitInfeasible;
}

inline int cmd_validate(const RunConfig& cfg, std::ostream& out) {
  if (cfg.plan_path.empty()) throw InputError("validate: --plan is required");
  const Instance inst = configured_instance(cfg);
  const Solution sol = load_solution_file(cfg.plan_path);
  const auto ev = evaluate_solution(inst, sol);
  const auto rep = mc_validate(inst, sol, cfg.mc_samples, cfg.seed, 1);
  Json j = mc_report_json(rep);
  j["objective"] = ev.objective;
  j["feasible"] = ev.feasible;
  write_text(cfg.output_path, j.dump(2) + "\n", out);
  return ev.feasible ? kExitOk : kExitInfeasible;
}

inline int cmd_oracle(const RunConfig& cfg, std::ostream& out) {
  const Instance inst = configured_instance(cfg);
  ExactResult res;
  try {
    res = exact_solve(inst);
  } catch (const std::invalid_argument& e) {
    throw InputError(e.what());
  }
  if (!res.feasible) {
    out << "no feasible solution\n";
    return kExitInfeasible;
  }
  const auto ev = evaluate_solution(inst, res.solution);
  Json j = solution_to_json(inst, res.solution, ev);
  j["leaves"] = res.leaves;
  write_text(cfg.output_path, j.dump(2) + "\n", out);
  return kExitOk;
}

inline int cmd_convert(const RunConfig& cfg, std::ostream& out) {
  RunConfig c = cfg;
  c.format = "solomon";
  const Instance inst = configured_instance(c);
  write_text(cfg.output_path, instance_to_json(inst).dump(1) + "\n", out);
  return kExitOk;
}

struct BenchRow {
  std::size_t iterations = 0;
  std::uint64_t seed = 0;
  int m = 0;
  double distance = 0.0;
  double objective = 0.0;
  bool feasible = false;
  double seconds = 0.0;
};

inline BenchRow bench_one(const Instance& inst, std::size_t n, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveOptions opt;
  opt.iterations = n;
  opt.seed = seed;
  const auto res = solve(inst, opt);
  const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
  return {n, seed, res.evaluation.amr_count, res.evaluation.total_distance,
          res.feasible ? res.evaluation.objective : res.evaluation.penalized, res.feasible,
          dt.count()};
}

inline int cmd_bench(const RunConfig& cfg, std::ostream& out) {
  const Instance inst = configured_instance(cfg);
  std::vector<std::pair<std::size_t, std::uint64_t>> runs;
  for (std::size_t n : cfg.bench_iterations)
    for (std::size_t r = 0; r < cfg.repeats; ++r) runs.emplace_back(n, cfg.seed + r);

  std::vector<BenchRow> rows(runs.size());
  const std::size_t jobs = std::max<std::size_t>(1, cfg.jobs);
  for (std::size_t next = 0; next < runs.size();) {
    std::vector<std::future<BenchRow>> running;
    const std::size_t start = next;
    for (; next < runs.size() && running.size() < jobs; ++next)
      running.push_back(std::async(std::launch::async, bench_one, std::cref(inst),
                                   runs[next].first, runs[next].second));
    for (std::size_t k = 0; k < running.size(); ++k) rows[start + k] = running[k].get();
  }

  std::string csv = "N,m,sum_distance,f,time_seconds,seed\n";
  auto emit = [&](const BenchRow& r) {
    csv += std::to_string(r.iterations) + "," + std::to_string(r.m) + "," +
           fixed(r.distance, 2) + "," + fixed(r.objective, 2) + "," + fixed(r.seconds, 3) + "," +
           std::to_string(r.seed) + "\n";
  };
  bool any_infeasible = false;
  for (std::size_t i = 0; i < rows.size(); i += cfg.repeats) {
    const auto begin = rows.begin() + static_cast<std::ptrdiff_t>(i);
    const auto end = begin + static_cast<std::ptrdiff_t>(cfg.repeats);
    if (cfg.best_only) {
      auto best = std::min_element(begin, end, [](const BenchRow& a, const BenchRow& b) {
        if (a.feasible != b.feasible) return a.feasible;
        return a.objective < b.objective;
      });
      emit(*best);
      any_infeasible = any_infeasible || !best->feasible;
    } else {
      std::for_each(begin, end, emit);
    }
  }
  write_text(cfg.output_path, csv, out);
  return any_infeasible ? kExitInfeasible : kExitOk;
}

inline std::vector<std::size_t> parse_size_list(const std::string& s) {
  std::vector<std::size_t> v;
  std::stringstream ss(s);
  for (std::string tok; std::getline(ss, tok, ',');) {
    std::size_t used = 0;
    long long x = 0;
    try {
      x = std::stoll(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size() || x < 1) throw InputError("bad iteration list '" + s + "'");
    v.push_back(static_cast<std::size_t>(x));
  }
  if (v.empty()) throw InputError("empty iteration list");
  return v;
}

} // namespace detail

inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.iterations < 1) throw InputError("--iterations must be at least 1");
    if (cfg.repeats < 1) throw InputError("--repeats must be at least 1");
    if (cfg.command == "solve") return detail::cmd_solve(cfg, out, err);
    if (cfg.command == "validate") return detail::cmd_validate(cfg, out);
    if (cfg.command == "oracle") return detail::cmd_oracle(cfg, out);
    if (cfg.command == "convert") return detail::cmd_convert(cfg, out);
    if (cfg.command == "bench") return detail::cmd_bench(cfg, out);
    throw InputError("unknown command '" + cfg.command + "'");
  } catch (const StructuralError& e) {
    err << "error: " << e.what() << '\n';
    return kExitStructural;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-trip AMR routing under stochastic travel and service times"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string iteration_list;

  auto common = [&](CLI::App* sub, bool solving) {
    sub->add_option("instance", cfg.instance_path, "Instance file")->required();
    sub->add_option("--format", cfg.format, "json or solomon");
    sub->add_option("--profile", cfg.profile, "Solomon profile: small (15 customers) or large");
    sub->add_option("--seed", cfg.seed, "Random seed");
    sub->add_option("--epsilon", cfg.epsilon, "Chance-constraint risk level");
    sub->add_option("--delta", cfg.delta, "Shaking acceptance ratio");
    sub->add_option("--xi1", cfg.xi1, "Fixed cost per AMR");
    sub->add_option("--xi2", cfg.xi2, "Cost per meter");
    sub->add_option("--xi3", cfg.xi3, "Penalty per violation");
    sub->add_option("--scale-distance", cfg.scale_distance, "Multiply all distances");
    sub->add_option("--scale-variance", cfg.scale_variance, "Multiply all variances");
    sub->add_option("--out", cfg.output_path, "Output file (default stdout)");
    sub->add_flag("--verbose", cfg.verbose, "Progress on stderr");
    if (solving) sub->add_option("--iterations", cfg.iterations, "VNS iterations N");
  };

  auto* solve_cmd = app.add_subcommand("solve", "Run VNS and print the route table");
  common(solve_cmd, true);
  auto* validate_cmd = app.add_subcommand("validate", "Monte Carlo check of a plan");
  common(validate_cmd, false);
  validate_cmd->add_option("--plan", cfg.plan_path, "Solution JSON")->required();
  validate_cmd->add_option("--mc-samples", cfg.mc_samples, "Number of samples");
  auto* oracle_cmd = app.add_subcommand("oracle", "Exact optimum for small instances");
  common(oracle_cmd, false);
  auto* convert_cmd = app.add_subcommand("convert", "Solomon text to instance JSON");
  common(convert_cmd, false);
  auto* bench_cmd = app.add_subcommand("bench", "Repeat solve over seeds and iteration counts");
  common(bench_cmd, false);
  bench_cmd->add_option("--iterations", iteration_list, "Comma-separated N values");
  bench_cmd->add_option("--repeats", cfg.repeats, "Seeds per N");
  bench_cmd->add_option("--jobs", cfg.jobs, "Parallel runs");
  bench_cmd->add_flag("--best-only", cfg.best_only, "One row per N, the best seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  if (cfg.command == "bench" && !iteration_list.empty()) {
    try {
      cfg.bench_iterations = detail::parse_size_list(iteration_list);
    } catch (const InputError& e) {
      err << "error: " << e.what() << '\n';
      return kExitInput;
    }
  }
  return run(cfg, out, err);
}

} // namespace amrvns
