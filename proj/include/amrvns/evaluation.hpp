#pragma once

#include <cstddef>
#include <vector>

#include "amrvns/model.hpp"
#include "amrvns/stochastic.hpp"

namespace amrvns {

struct NodeTiming {
  Gaussian arrival;
  Gaussian start;
  Seconds departure_mean = 0.0;
};

/// Profiles along one trip, one entry per node. `battery_after` is the level
/// on arrival at the node, before any charging there; `load_after` is the
/// load left once the node is served.
struct TripEvaluation {
  std::vector<NodeTiming> timings;
  std::vector<double> load_after;
  std::vector<double> battery_after;
  std::vector<bool> on_time;
  double distance = 0.0;
  bool capacity_ok = true;
  bool battery_ok = true;
  bool tw_ok = true;
  int tw_violations = 0;
  int charges = 0;

  Seconds end_time() const { return timings.back().arrival.mean; }
  double end_battery() const { return battery_after.back(); }
  bool ok() const { return capacity_ok && battery_ok && tw_ok; }
};

struct TripRef {
  std::size_t amr = 0;
  std::size_t trip = 0;
};

struct SolutionEvaluation {
  int amr_count = 0;
  double total_distance = 0.0;
  double objective = 0.0;
  double penalized = 0.0;
  bool feasible = true;
  int tw_violations = 0;
  int capacity_failures = 0;
  int battery_failures = 0;
  int charging_visits = 0;
  std::vector<TripEvaluation> per_trip;
  std::vector<TripRef> trip_refs;

  double penalty() const { return penalized - objective; }
  bool zero_penalty() const {
    return tw_violations == 0 && capacity_failures == 0 && battery_failures == 0;
  }
};

namespace detail {
constexpr double kLoadSlack = 1e-9;
constexpr double kBatterySlack = 1e-12;
} // namespace detail

/// Walks one trip from its departure at `start_time`. Infeasibility is
/// reported through the flags; nothing throws.
inline TripEvaluation evaluate_trip(const Instance& inst, const Trip& trip, Seconds start_time,
                                    double start_battery, double start_load, double z) {
  TripEvaluation ev;
  const auto& nodes = trip.nodes;
  const std::size_t n = nodes.size();
  ev.timings.resize(n);
  ev.load_after.resize(n);
  ev.battery_after.resize(n);
  ev.on_time.assign(n, true);
  if (n == 0) return ev;

  const auto& amr = inst.amr;
  ev.timings[0] = {{start_time, 0.0}, {start_time, 0.0}, start_time};
  ev.load_after[0] = start_load;
  ev.battery_after[0] = start_battery;

  Gaussian start{start_time, 0.0};
  Gaussian service{0.0, 0.0};
  double load = start_load;
  double battery = start_battery;

  for (std::size_t k = 1; k < n; ++k) {
    const Node from = nodes[k - 1];
    const Node to = nodes[k];
    const double d = inst.dist(from, to);
    ev.distance += d;
    battery -= amr.consume_rate * d;
    if (battery < amr.battery_low - detail::kBatterySlack) ev.battery_ok = false;
    ev.battery_after[k] = battery;

    const Gaussian arrival = propagate(start, service, travel_params(inst, from, to));
    NodeTiming& t = ev.timings[k];
    t.arrival = arrival;

    switch (to.kind) {
    case NodeKind::Request: {
      const Request& r = inst.request(to.index);
      if (!within_window(arrival, r.window_close, z)) {
        ev.on_time[k] = false;
        ev.tw_ok = false;
        ++ev.tw_violations;
      }
      start = truncated_start(arrival, r.window_open);
      service = r.service;
      load -= r.demand;
      if (load < -detail::kLoadSlack) ev.capacity_ok = false;
      t.start = start;
      t.departure_mean = start.mean + service.mean;
      break;
    }
    case NodeKind::Charging: {
      const ChargeStop stop = charging_departure(arrival.mean, battery, amr);
      start = arrival;
      service = {stop.departure - arrival.mean, 0.0};
      battery = stop.battery;
      ++ev.charges;
      t.start = start;
      t.departure_mean = stop.departure;
      break;
    }
    case NodeKind::Depot:
      start = arrival;
      service = {0.0, 0.0};
      t.start = arrival;
      t.departure_mean = arrival.mean;
      break;
    }
    ev.load_after[k] = load;
  }
  return ev;
}

inline TripEvaluation evaluate_trip(const Instance& inst, const Trip& trip, Seconds start_time,
                                    double start_battery, double start_load) {
  return evaluate_trip(inst, trip, start_time, start_battery, start_load,
                       chance_quantile(inst.cost.epsilon));
}

/// Chains one AMR's trips: each trip leaves when the previous one is back at
/// the depot (mean time), with the battery it returned with and a full load.
inline std::vector<TripEvaluation> evaluate_amr(const Instance& inst, const AmrPlan& plan,
                                                double z) {
  std::vector<TripEvaluation> out;
  out.reserve(plan.trips.size());
  Seconds t = shift_start(inst);
  double battery = inst.amr.battery_init;
  for (const auto& trip : plan.trips) {
    out.push_back(evaluate_trip(inst, trip, t, battery, inst.amr.capacity, z));
    t = out.back().end_time();
    battery = out.back().end_battery();
  }
  return out;
}

inline std::vector<TripEvaluation> evaluate_amr(const Instance& inst, const AmrPlan& plan) {
  return evaluate_amr(inst, plan, chance_quantile(inst.cost.epsilon));
}

inline bool all_ok(const std::vector<TripEvaluation>& trips) {
  for (const auto& t : trips)
    if (!t.ok()) return false;
  return true;
}

/// Objective plus penalties. Throws StructuralError when the plan does not
/// cover each request exactly once.
inline SolutionEvaluation evaluate_solution(const Instance& inst, const Solution& sol) {
  check_structure(inst, sol);
  const double z = chance_quantile(inst.cost.epsilon);

  SolutionEvaluation ev;
  for (std::size_t a = 0; a < sol.amrs.size(); ++a) {
    auto trips = evaluate_amr(inst, sol.amrs[a], z);
    bool serves = false;
    for (std::size_t p = 0; p < trips.size(); ++p) {
      auto& te = trips[p];
      serves = serves || sol.amrs[a].trips[p].request_count() > 0;
      ev.total_distance += te.distance;
      ev.tw_violations += te.tw_violations;
      ev.capacity_failures += te.capacity_ok ? 0 : 1;
      ev.battery_failures += te.battery_ok ? 0 : 1;
      ev.charging_visits += te.charges;
      ev.per_trip.push_back(std::move(te));
      ev.trip_refs.push_back({a, p});
    }
    if (serves) ++ev.amr_count;
  }

  const auto& c = inst.cost;
  ev.objective = c.fixed_per_amr * ev.amr_count + c.per_meter * ev.total_distance;
  ev.penalized =
      ev.objective + c.tw_penalty * (ev.tw_violations + ev.capacity_failures + ev.battery_failures);
  ev.feasible = ev.zero_penalty();
  return ev;
}

/// Per-request arrival statistics recovered from an evaluation.
struct RequestArrival {
  int id = 0;
  Gaussian arrival;
  double violation_prob = 0.0;
  bool on_time = true;
};

inline std::vector<RequestArrival> request_arrivals(const Instance& inst, const Solution& sol,
                                                    const SolutionEvaluation& ev) {
  std::vector<RequestArrival> out(inst.request_count());
  for (std::size_t k = 0; k < ev.per_trip.size(); ++k) {
    const auto& ref = ev.trip_refs[k];
    const auto& nodes = sol.amrs[ref.amr].trips[ref.trip].nodes;
    const auto& te = ev.per_trip[k];
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (!nodes[i].is_request()) continue;
      const int id = nodes[i].index;
      auto& ra = out[static_cast<std::size_t>(id - 1)];
      ra.id = id;
      ra.arrival = te.timings[i].arrival;
      ra.violation_prob = violation_probability(ra.arrival, inst.request(id).window_close);
      ra.on_time = te.on_time[i];
    }
  }
  return out;
}

} // namespace amrvns
