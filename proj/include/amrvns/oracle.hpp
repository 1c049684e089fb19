#pragma once

// Independent checks: exhaustive search on tiny instances and Monte Carlo
// simulation of a fixed plan.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <future>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include "amrvns/evaluation.hpp"
#include "amrvns/model.hpp"
#include "amrvns/operators.hpp"

namespace amrvns {

struct ExactResult {
  bool feasible = false;
  Solution solution;
  double objective = std::numeric_limits<double>::infinity();
  std::size_t leaves = 0;
};

namespace detail {

class ExactSearch {
public:
  explicit ExactSearch(const Instance& inst)
      : inst_(inst), z_(chance_quantile(inst.cost.epsilon)), served_(inst.request_count() + 1) {}

  ExactResult run() {
    if (inst_.request_count() == 0) {
      result_.feasible = true;
      result_.objective = 0.0;
      return result_;
    }
    for (std::size_t id = 1; id <= inst_.request_count(); ++id) open_amr(static_cast<int>(id));
    return result_;
  }

private:
  // Charging visits are placed by the same canonical rule the repair uses.
  std::optional<AmrPlan> with_charging(const AmrPlan& plan) const {
    Solution s;
    s.amrs.push_back(plan);
    try {
      return charging_insert_repair(inst_, s).amrs.front();
    } catch (const StructuralError&) {
      return std::nullopt;
    }
  }

  // Distance driven up to the last request of the open trip, excluding the
  // closing leg. Extending the plan never lowers it.
  double committed_distance(const AmrPlan& plan, const std::vector<TripEvaluation>& evs) const {
    double d = 0.0;
    for (std::size_t p = 0; p + 1 < evs.size(); ++p) d += evs[p].distance;
    const auto& nodes = plan.trips.back().nodes;
    std::size_t last = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].is_request()) last = i;
    for (std::size_t i = 1; i <= last; ++i) d += inst_.dist(nodes[i - 1], nodes[i]);
    return d;
  }

  double bound(double amr_count, double distance) const {
    return inst_.cost.fixed_per_amr * amr_count + inst_.cost.per_meter * distance;
  }

  void open_amr(int first) {
    if (served_[static_cast<std::size_t>(first)]) return;
    AmrPlan plan;
    plan.trips.push_back(Trip::of_requests({first}));
    first_ids_.push_back(first);
    visit(std::move(plan), first);
    first_ids_.pop_back();
  }

  // `plan` is the AMR being built; its last trip is open.
  void visit(AmrPlan plan, int added) {
    auto charged = with_charging(plan);
    if (!charged) return;
    const auto evs = evaluate_amr(inst_, *charged, z_);
    for (const auto& t : evs)
      if (!t.tw_ok || !t.capacity_ok) return;

    const double amr_count = static_cast<double>(done_.size() + 1);
    if (bound(amr_count, done_distance_ + committed_distance(*charged, evs)) >=
        result_.objective - 1e-9)
      return;

    served_[static_cast<std::size_t>(added)] = true;
    ++served_count_;

    if (served_count_ == inst_.request_count()) {
      leaf(*charged);
    } else {
      double open_load = 0.0;
      for (int id : plan.trips.back().request_ids()) open_load += inst_.request(id).demand;
      for (std::size_t id = 1; id <= inst_.request_count(); ++id) {
        if (served_[id]) continue;
        if (open_load + inst_.request(static_cast<int>(id)).demand >
            inst_.amr.capacity + kLoadSlack)
          continue;
        AmrPlan next = plan;
        auto& nodes = next.trips.back().nodes;
        nodes.insert(nodes.end() - 1, Node::request(static_cast<int>(id)));
        visit(std::move(next), static_cast<int>(id));
      }
      for (std::size_t id = 1; id <= inst_.request_count(); ++id) {
        if (served_[id]) continue;
        AmrPlan next = plan;
        next.trips.push_back(Trip::of_requests({static_cast<int>(id)}));
        visit(std::move(next), static_cast<int>(id));
      }
      double closed = 0.0;
      for (const auto& t : evs) closed += t.distance;
      done_.push_back(*charged);
      done_distance_ += closed;
      for (std::size_t id = static_cast<std::size_t>(first_ids_.back()) + 1;
           id <= inst_.request_count(); ++id)
        open_amr(static_cast<int>(id));
      done_distance_ -= closed;
      done_.pop_back();
    }

    --served_count_;
    served_[static_cast<std::size_t>(added)] = false;
  }

  void leaf(const AmrPlan& last) {
    ++result_.leaves;
    Solution s;
    s.amrs = done_;
    s.amrs.push_back(last);
    const auto ev = evaluate_solution(inst_, s);
    if (ev.feasible && ev.objective < result_.objective) {
      result_.feasible = true;
      result_.objective = ev.objective;
      result_.solution = std::move(s);
    }
  }

  const Instance& inst_;
  double z_;
  std::vector<bool> served_;
  std::size_t served_count_ = 0;
  std::vector<AmrPlan> done_;
  double done_distance_ = 0.0;
  std::vector<int> first_ids_;
  ExactResult result_;
};

} // namespace detail

/// Branch and bound over every assignment of requests to AMRs, split into
/// trips and ordered within them. AMRs are interchangeable, so they are
/// enumerated in increasing order of their first request. Charging stops are
/// placed by the canonical repair rule; evaluation is `evaluate_solution`.
inline ExactResult exact_solve(const Instance& inst, std::size_t max_requests = 9) {
  if (max_requests > 9) throw std::invalid_argument("exact_solve: max_requests is capped at 9");
  if (inst.request_count() > max_requests)
    throw std::invalid_argument("exact_solve: instance has " +
                                std::to_string(inst.request_count()) + " requests, limit is " +
                                std::to_string(max_requests));
  return detail::ExactSearch(inst).run();
}

struct McRequestStats {
  int id = 0;
  double violation_frequency = 0.0;
  double mean_arrival = 0.0;
};

struct McReport {
  std::size_t samples = 0;
  std::vector<McRequestStats> per_request;
  double max_violation = 0.0;
};

namespace detail {

struct McCounts {
  std::vector<std::size_t> late;
  std::vector<double> arrival_sum;
};

inline McCounts simulate_batch(const Instance& inst, const Solution& sol, std::size_t samples,
                               std::uint64_t seed, std::uint64_t batch) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(batch), static_cast<std::uint32_t>(batch >> 32)};
  Rng rng(seq);
  std::normal_distribution<double> unit(0.0, 1.0);
  auto draw = [&](Gaussian g) { return std::max(0.0, g.mean + g.stddev() * unit(rng)); };

  const std::size_t n = inst.request_count();
  McCounts c{std::vector<std::size_t>(n + 1, 0), std::vector<double>(n + 1, 0.0)};
  const auto& amr = inst.amr;
  const Seconds t0 = shift_start(inst);

  for (std::size_t s = 0; s < samples; ++s) {
    for (const auto& plan : sol.amrs) {
      Seconds depart = t0;
      double battery = amr.battery_init;
      for (const auto& trip : plan.trips) {
        const auto& nodes = trip.nodes;
        for (std::size_t k = 1; k < nodes.size(); ++k) {
          const Node from = nodes[k - 1];
          const Node to = nodes[k];
          const Seconds arrival = depart + draw(travel_params(inst, from, to));
          battery -= amr.consume_rate * inst.dist(from, to);
          if (to.is_request()) {
            const Request& r = inst.request(to.index);
            const auto id = static_cast<std::size_t>(to.index);
            c.arrival_sum[id] += arrival;
            if (arrival > r.window_close) ++c.late[id];
            depart = std::max(arrival, r.window_open) + draw(r.service);
          } else if (to.is_charging()) {
            const ChargeStop stop = charging_departure(arrival, battery, amr);
            depart = stop.departure;
            battery = stop.battery;
          } else {
            depart = arrival;
          }
        }
      }
    }
  }
  return c;
}

} // namespace detail

/// Simulates the plan with sampled travel and service times (negative draws
/// clamped at zero): waiting at window openings, deterministic charging, and
/// each trip leaving at the realized return time of the previous one.
/// Batches use independent streams derived from (seed, batch), so the result
/// does not depend on `threads`.
inline McReport mc_validate(const Instance& inst, const Solution& sol, std::size_t samples,
                            std::uint64_t seed, unsigned threads = 0) {
  if (samples == 0) throw std::invalid_argument("mc_validate: samples must be at least 1");
  check_structure(inst, sol);

  constexpr std::size_t kBatch = 8192;
  const std::size_t batches = (samples + kBatch - 1) / kBatch;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());

  std::vector<detail::McCounts> parts(batches);
  std::size_t next = 0;
  while (next < batches) {
    std::vector<std::future<detail::McCounts>> running;
    const std::size_t start = next;
    for (; next < batches && running.size() < threads; ++next) {
      const std::size_t count = std::min(kBatch, samples - next * kBatch);
      running.push_back(std::async(std::launch::async, detail::simulate_batch, std::cref(inst),
                                   std::cref(sol), count, seed, static_cast<std::uint64_t>(next)));
    }
    for (std::size_t k = 0; k < running.size(); ++k) parts[start + k] = running[k].get();
  }

  const std::size_t n = inst.request_count();
  std::vector<std::size_t> late(n + 1, 0);
  std::vector<double> sum(n + 1, 0.0);
  for (const auto& p : parts)
    for (std::size_t id = 1; id <= n; ++id) {
      late[id] += p.late[id];
      sum[id] += p.arrival_sum[id];
    }

  McReport rep;
  rep.samples = samples;
  for (std::size_t id = 1; id <= n; ++id) {
    const double freq = static_cast<double>(late[id]) / static_cast<double>(samples);
    rep.per_request.push_back({static_cast<int>(id), freq, sum[id] / static_cast<double>(samples)});
    rep.max_violation = std::max(rep.max_violation, freq);
  }
  return rep;
}

} // namespace amrvns
