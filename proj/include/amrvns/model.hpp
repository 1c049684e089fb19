#pragma once

// Domain types for multi-trip AMR routing with time windows, capacity and
// battery limits under normally distributed travel and service times.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace amrvns {

using Seconds = double;

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input files or instances that break a domain invariant.
class InputError : public Error {
public:
  using Error::Error;
};

/// Plans that are not well-formed (duplicate or missing requests, trips that
/// do not start and end at the depot) or that no repair can make feasible.
class StructuralError : public Error {
public:
  using Error::Error;
};

struct Gaussian {
  double mean = 0.0;
  double variance = 0.0;

  double stddev() const { return std::sqrt(std::max(variance, 0.0)); }
  friend bool operator==(const Gaussian&, const Gaussian&) = default;
};

struct Request {
  int id = 0;
  double demand = 0.0;
  Seconds window_open = 0.0;
  Seconds window_close = 0.0;
  Gaussian service;
  int floor = 0;

  friend bool operator==(const Request&, const Request&) = default;
};

struct AmrParams {
  double capacity = 20.0;
  double speed = 1.0;
  // battery fraction per meter driven
  double consume_rate = 1.0 / 21600.0;
  // battery fraction per second on a charger
  double charge_rate = 1.0 / 16200.0;
  double battery_low = 0.0;
  double battery_high = 0.8;
  double battery_init = 0.8;

  friend bool operator==(const AmrParams&, const AmrParams&) = default;
};

struct CostParams {
  double fixed_per_amr = 30.0;
  double per_meter = 0.01;
  double tw_penalty = 1000.0;
  double epsilon = 0.05;
  double shake_delta = 1.1;

  friend bool operator==(const CostParams&, const CostParams&) = default;
};

struct StochasticParams {
  Seconds floor_time_mean = 51.25;
  Seconds stop_overhead = 6.0;
  double sigma0_sq = 4.0;
  double sigmaf_sq = 16.0;

  friend bool operator==(const StochasticParams&, const StochasticParams&) = default;
};

/// Dense square matrix, row-major.
class Matrix {
public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

enum class NodeKind { Depot, Charging, Request };

/// A stop on a trip. `index` is the request id for requests, the 0-based
/// station number for charging stations, and unused for the depot.
struct Node {
  NodeKind kind = NodeKind::Depot;
  int index = 0;

  static Node depot() { return {NodeKind::Depot, 0}; }
  static Node charging(int station) { return {NodeKind::Charging, station}; }
  static Node request(int id) { return {NodeKind::Request, id}; }

  bool is_depot() const { return kind == NodeKind::Depot; }
  bool is_charging() const { return kind == NodeKind::Charging; }
  bool is_request() const { return kind == NodeKind::Request; }

  friend bool operator==(const Node&, const Node&) = default;
};

/// Matrices are indexed depot first (0), then requests 1..n in id order,
/// then charging stations.
struct Instance {
  std::vector<Request> requests;
  int depot_floor = 0;
  std::vector<int> charging_floors;
  Matrix distance;
  Matrix floor_diff;
  AmrParams amr;
  CostParams cost;
  StochasticParams stoch;
  // Departure time of every AMR's first trip; derived from the windows when absent.
  std::optional<Seconds> shift_start;

  std::size_t request_count() const { return requests.size(); }
  std::size_t station_count() const { return charging_floors.size(); }
  std::size_t node_count() const { return 1 + requests.size() + charging_floors.size(); }

  std::size_t matrix_index(Node n) const {
    switch (n.kind) {
    case NodeKind::Depot: return 0;
    case NodeKind::Request: return static_cast<std::size_t>(n.index);
    case NodeKind::Charging: return 1 + requests.size() + static_cast<std::size_t>(n.index);
    }
    return 0;
  }

  const Request& request(int id) const { return requests.at(static_cast<std::size_t>(id - 1)); }
  double dist(Node a, Node b) const { return distance(matrix_index(a), matrix_index(b)); }
  double floors(Node a, Node b) const { return floor_diff(matrix_index(a), matrix_index(b)); }

  friend bool operator==(const Instance&, const Instance&) = default;
};

struct Trip {
  std::vector<Node> nodes{Node::depot(), Node::depot()};

  static Trip of_requests(const std::vector<int>& ids) {
    Trip t;
    t.nodes.clear();
    t.nodes.push_back(Node::depot());
    for (int id : ids) t.nodes.push_back(Node::request(id));
    t.nodes.push_back(Node::depot());
    return t;
  }

  std::size_t request_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return n.is_request(); }));
  }

  std::vector<int> request_ids() const {
    std::vector<int> ids;
    for (const auto& n : nodes)
      if (n.is_request()) ids.push_back(n.index);
    return ids;
  }

  friend bool operator==(const Trip&, const Trip&) = default;
};

/// The ordered trips run by one AMR over the day.
struct AmrPlan {
  std::vector<Trip> trips;
  friend bool operator==(const AmrPlan&, const AmrPlan&) = default;
};

struct Solution {
  std::vector<AmrPlan> amrs;

  std::size_t trip_count() const {
    std::size_t n = 0;
    for (const auto& a : amrs) n += a.trips.size();
    return n;
  }
  std::size_t request_count() const {
    std::size_t n = 0;
    for (const auto& a : amrs)
      for (const auto& t : a.trips) n += t.request_count();
    return n;
  }

  friend bool operator==(const Solution&, const Solution&) = default;
};

/// Drops trips that serve no request and AMRs left without trips.
inline void normalize(Solution& sol) {
  for (auto& amr : sol.amrs)
    std::erase_if(amr.trips, [](const Trip& t) { return t.request_count() == 0; });
  std::erase_if(sol.amrs, [](const AmrPlan& a) { return a.trips.empty(); });
}

/// Returns one message per broken invariant; empty when the instance is valid.
inline std::vector<std::string> validate_instance(const Instance& inst) {
  std::vector<std::string> out;
  auto add = [&](std::string s) { out.push_back(std::move(s)); };

  for (std::size_t k = 0; k < inst.requests.size(); ++k) {
    const auto& r = inst.requests[k];
    const std::string path = "requests[" + std::to_string(k) + "]";
    if (r.id != static_cast<int>(k) + 1)
      add(path + ".id: expected " + std::to_string(k + 1) + ", got " + std::to_string(r.id));
    if (!(r.window_open < r.window_close))
      add(path + ".window: open must be strictly before close");
    if (!(r.demand > 0.0)) add(path + ".demand: must be positive");
    if (r.demand > inst.amr.capacity) add(path + ".demand: exceeds AMR capacity");
    if (r.service.variance < 0.0) add(path + ".service_var: must be nonnegative");
    if (r.service.mean < 0.0) add(path + ".service_mean: must be nonnegative");
  }

  const auto& a = inst.amr;
  if (!(a.battery_low >= 0.0 && a.battery_low < a.battery_high && a.battery_high <= 1.0))
    add("amr.alpha/beta: need 0 <= alpha < beta <= 1");
  if (!(a.capacity > 0.0)) add("amr.capacity: must be positive");
  if (!(a.speed > 0.0)) add("amr.speed: must be positive");
  if (!(a.consume_rate > 0.0)) add("amr.consume_rate: must be positive");
  if (!(a.charge_rate > 0.0)) add("amr.charge_rate: must be positive");
  if (!(a.battery_init >= 0.0 && a.battery_init <= 1.0)) add("amr.battery_init: must lie in [0, 1]");

  const auto& c = inst.cost;
  if (c.fixed_per_amr < 0.0) add("cost.xi1: must be nonnegative");
  if (c.per_meter < 0.0) add("cost.xi2: must be nonnegative");
  if (c.tw_penalty < 0.0) add("cost.xi3: must be nonnegative");
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) add("cost.epsilon: must lie in (0, 1)");
  if (!(c.shake_delta > 1.0)) add("cost.delta: must exceed 1");

  if (inst.stoch.sigma0_sq < 0.0) add("stoch.sigma0_sq: must be nonnegative");
  if (inst.stoch.sigmaf_sq < 0.0) add("stoch.sigmaf_sq: must be nonnegative");

  const std::size_t n = inst.node_count();
  auto check_matrix = [&](const Matrix& m, const char* name) {
    if (m.size() != n) {
      add(std::string(name) + ": dimension " + std::to_string(m.size()) + ", expected " +
          std::to_string(n));
      return;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (m(i, i) != 0.0) add(std::string(name) + "[" + std::to_string(i) + "][" +
                              std::to_string(i) + "]: diagonal must be zero");
      for (std::size_t j = 0; j < n; ++j) {
        if (m(i, j) < 0.0 || !std::isfinite(m(i, j)))
          add(std::string(name) + "[" + std::to_string(i) + "][" + std::to_string(j) +
              "]: must be finite and nonnegative");
        if (j > i && m(i, j) != m(j, i))
          add(std::string(name) + "[" + std::to_string(i) + "][" + std::to_string(j) +
              "]: matrix must be symmetric");
      }
    }
  };
  check_matrix(inst.distance, "distance");
  check_matrix(inst.floor_diff, "floor_diff");
  return out;
}

/// Throws StructuralError unless every trip runs depot-to-depot with no inner
/// depot, and every request is served exactly once.
inline void check_structure(const Instance& inst, const Solution& sol) {
  std::vector<int> seen(inst.request_count() + 1, 0);
  for (std::size_t a = 0; a < sol.amrs.size(); ++a) {
    for (std::size_t p = 0; p < sol.amrs[a].trips.size(); ++p) {
      const auto& nodes = sol.amrs[a].trips[p].nodes;
      const std::string where = "amr " + std::to_string(a) + " trip " + std::to_string(p);
      if (nodes.size() < 2 || !nodes.front().is_depot() || !nodes.back().is_depot())
        throw StructuralError(where + ": must start and end at the depot");
      for (std::size_t k = 1; k + 1 < nodes.size(); ++k) {
        const Node& nd = nodes[k];
        if (nd.is_depot()) throw StructuralError(where + ": depot inside trip");
        if (nd.is_charging() &&
            (nd.index < 0 || static_cast<std::size_t>(nd.index) >= inst.station_count()))
          throw StructuralError(where + ": unknown charging station " + std::to_string(nd.index));
        if (nd.is_request()) {
          if (nd.index < 1 || static_cast<std::size_t>(nd.index) > inst.request_count())
            throw StructuralError(where + ": unknown request " + std::to_string(nd.index));
          if (++seen[static_cast<std::size_t>(nd.index)] > 1)
            throw StructuralError("request " + std::to_string(nd.index) + " served twice");
        }
      }
    }
  }
  for (std::size_t id = 1; id <= inst.request_count(); ++id)
    if (seen[id] == 0) throw StructuralError("request " + std::to_string(id) + " not served");
}

} // namespace amrvns
