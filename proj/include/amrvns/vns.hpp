#pragma once

// Greedy construction, local search over the three starred neighborhoods,
// 2-opt-L* shaking, the repair pipeline and the outer VNS loop.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <vector>

#include "amrvns/evaluation.hpp"
#include "amrvns/model.hpp"
#include "amrvns/operators.hpp"

namespace amrvns {

/// Nearest-neighbor construction. Each AMR extends its current trip with the
/// closest unserved request that keeps load and lateness within limits,
/// starts a new trip when nothing fits, and hands over to a fresh AMR when
/// even a new trip can take nothing. A fresh AMR that cannot take anything on
/// time is given the nearest request regardless.
inline Solution greedy_initial(const Instance& inst) {
  const std::size_t n = inst.request_count();
  std::vector<bool> served(n + 1, false);
  std::size_t remaining = n;
  const double z = chance_quantile(inst.cost.epsilon);
  Solution sol;

  auto by_distance_from = [&](Node from) {
    std::vector<int> ids;
    for (std::size_t id = 1; id <= n; ++id)
      if (!served[id]) ids.push_back(static_cast<int>(id));
    std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) {
      return inst.dist(from, Node::request(a)) < inst.dist(from, Node::request(b));
    });
    return ids;
  };

  auto append = [](AmrPlan& plan, int id) {
    auto& nodes = plan.trips.back().nodes;
    nodes.insert(nodes.end() - 1, Node::request(id));
  };

  while (remaining > 0) {
    AmrPlan plan;
    plan.trips.emplace_back();
    while (remaining > 0) {
      const auto& nodes = plan.trips.back().nodes;
      const Node last = nodes[nodes.size() - 2];
      bool placed = false;
      for (int id : by_distance_from(last)) {
        AmrPlan trial = plan;
        append(trial, id);
        const auto evs = evaluate_amr(inst, trial, z);
        const bool fits = std::all_of(evs.begin(), evs.end(), [](const TripEvaluation& t) {
          return t.capacity_ok && t.tw_ok;
        });
        if (!fits) continue;
        plan = std::move(trial);
        served[static_cast<std::size_t>(id)] = true;
        --remaining;
        placed = true;
        break;
      }
      if (placed) continue;

      if (plan.trips.back().request_count() > 0) {
        plan.trips.emplace_back();
        continue;
      }
      plan.trips.pop_back();
      if (!plan.trips.empty()) break;

      const int id = by_distance_from(Node::depot()).front();
      plan.trips.push_back(Trip::of_requests({id}));
      served[static_cast<std::size_t>(id)] = true;
      --remaining;
      plan.trips.emplace_back();
    }
    std::erase_if(plan.trips, [](const Trip& t) { return t.request_count() == 0; });
    sol.amrs.push_back(std::move(plan));
  }
  return charging_insert_repair(inst, sol);
}

struct LocalSearchStats {
  std::size_t probes = 0;
  std::size_t improvements = 0;
};

/// Cycles through swap*, 2-opt* and relocation*, restarting from the first
/// neighborhood after every strict improvement in penalized cost and stopping
/// once all three fail in a row.
inline Solution local_search(const Instance& inst, const Solution& x, Rng& rng,
                             LocalSearchStats* stats = nullptr) {
  Solution cur = x;
  SolutionEvaluation cur_ev = evaluate_solution(inst, cur);
  int k = 1;
  while (k <= 3) {
    Solution cand;
    switch (k) {
    case 1: cand = swap_star(inst, cur, cur_ev, rng); break;
    case 2: cand = two_opt_star(inst, cur, cur_ev, rng); break;
    default: cand = relocation_star(inst, cur, cur_ev, rng); break;
    }
    if (stats) ++stats->probes;
    SolutionEvaluation cand_ev = evaluate_solution(inst, cand);
    if (cand_ev.penalized < cur_ev.penalized) {
      cur = std::move(cand);
      cur_ev = std::move(cand_ev);
      if (stats) ++stats->improvements;
      k = 1;
    } else {
      ++k;
    }
  }
  return cur;
}

/// A perturbed candidate is taken when it costs less than `delta` times the
/// current cost.
inline bool accept_shake(double candidate_cost, double current_cost, double delta) {
  return candidate_cost < current_cost * delta;
}

inline Solution shaking(const Instance& inst, const Solution& xl, Rng& rng, double delta,
                        std::size_t candidates = 20) {
  Solution cand = shake_2opt_l(inst, xl, rng, candidates);
  // the test is on the objective; lateness is left for the next local search
  const double cand_cost = evaluate_solution(inst, cand).objective;
  const double cur_cost = evaluate_solution(inst, xl).objective;
  return accept_shake(cand_cost, cur_cost, delta) ? cand : xl;
}

/// Depot and charging repairs until load and battery hold everywhere, then
/// AMR merging. Lateness the repairs cannot fix stays in the penalty.
inline Solution feasible_operation(const Instance& inst, const Solution& x) {
  Solution y = x;
  normalize(y);
  const std::size_t cap = 2 * inst.request_count() + 2;
  std::size_t rounds = 0;
  for (;;) {
    const auto ev = evaluate_solution(inst, y);
    if (ev.capacity_failures == 0 && ev.battery_failures == 0) break;
    if (rounds++ == cap) throw StructuralError("repairs did not converge");
    y = charging_insert_repair(inst, depot_insert_repair(inst, y));
  }
  return amr_decrease(inst, y);
}

struct SolveOptions {
  std::size_t iterations = 1000;
  std::uint64_t seed = 1;
  std::size_t shake_candidates = 20;
  // CSV progress lines `iteration,best_objective,incumbent_penalized`.
  std::ostream* trace = nullptr;
};

struct TraceRow {
  std::size_t iteration = 0;
  double best_objective = std::numeric_limits<double>::infinity();
  double incumbent_penalized = 0.0;
};

struct SolveResult {
  Solution solution;
  SolutionEvaluation evaluation;
  std::vector<TraceRow> history;
  // False when no zero-penalty solution was met; `solution` is then the
  // least-penalized incumbent.
  bool feasible = false;
};

/// State carried across VNS iterations.
struct SearchState {
  Solution incumbent;
  SolutionEvaluation incumbent_eval;
  std::optional<Solution> best;
  SolutionEvaluation best_eval;
  std::size_t iteration = 0;
  Rng rng;
  std::vector<TraceRow> history;

  double best_objective() const {
    return best ? best_eval.objective : std::numeric_limits<double>::infinity();
  }

  void consider(const Solution& s, const SolutionEvaluation& ev) {
    if (ev.zero_penalty() && ev.objective < best_objective()) {
      best = s;
      best_eval = ev;
    }
  }

  void offer(const Solution& s, SolutionEvaluation ev) {
    consider(s, ev);
    incumbent = s;
    incumbent_eval = std::move(ev);
  }
};

inline SolveResult solve(const Instance& inst, const SolveOptions& opt) {
  SearchState st;
  st.rng.seed(opt.seed);
  st.incumbent = feasible_operation(inst, greedy_initial(inst));
  st.incumbent_eval = evaluate_solution(inst, st.incumbent);
  if (st.incumbent_eval.zero_penalty()) {
    st.best = st.incumbent;
    st.best_eval = st.incumbent_eval;
  }

  const double delta = inst.cost.shake_delta;
  st.history.reserve(opt.iterations);
  if (opt.trace) *opt.trace << "iteration,best_objective,incumbent_penalized\n";

  for (st.iteration = 1; st.iteration <= opt.iterations; ++st.iteration) {
    try {
      Solution xl = local_search(inst, st.incumbent, st.rng);
      xl = feasible_operation(inst, xl);
      st.consider(xl, evaluate_solution(inst, xl));
      Solution xs = shaking(inst, xl, st.rng, delta, opt.shake_candidates);
      auto ev = evaluate_solution(inst, xs);
      st.offer(xs, std::move(ev));
    } catch (const StructuralError&) {
      // unrepairable neighbor; keep the incumbent
    }
    st.history.push_back({st.iteration, st.best_objective(), st.incumbent_eval.penalized});
    if (opt.trace)
      *opt.trace << st.iteration << ',' << st.best_objective() << ','
                 << st.incumbent_eval.penalized << '\n';
  }

  SolveResult res;
  res.history = std::move(st.history);
  if (st.best) {
    res.solution = std::move(*st.best);
    res.evaluation = std::move(st.best_eval);
    res.feasible = true;
  } else {
    res.solution = std::move(st.incumbent);
    res.evaluation = std::move(st.incumbent_eval);
  }
  return res;
}

} // namespace amrvns
