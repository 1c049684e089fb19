#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "amrvns.hpp"

namespace amrvns::testing {

inline std::string data_path(const std::string& name) { return std::string(AMRVNS_DATA_DIR) + "/" + name; }

inline Instance hospital() {
  static const Instance inst = load_instance_file(data_path("hospital12.json"), InstanceFormat::Json);
  return inst;
}

inline Solution known_optimum() {
  Solution s;
  s.amrs.push_back({{Trip::of_requests({1, 3, 6, 7}), Trip::of_requests({9, 11, 10})}});
  s.amrs.push_back({{Trip::of_requests({4, 2, 5, 8, 12})}});
  return s;
}

struct RandomSpec {
  std::size_t requests = 6;
  std::size_t stations = 1;
  double area = 200.0;
  int floors = 3;
  // Consumption per meter; large values force charging.
  double consume_rate = 1.0 / 21600;
  double horizon = 4 * 3600.0;
  double var_scale = 1.0;
};

/// Random instance on a rectangle with a few floors; windows are spread over
/// the horizon with widths between 10 and 60 minutes.
inline Instance random_instance(std::mt19937_64& rng, const RandomSpec& spec = {}) {
  std::uniform_real_distribution<double> coord(0.0, spec.area);
  std::uniform_int_distribution<int> floor(0, spec.floors - 1);
  std::uniform_int_distribution<int> demand(1, 8);
  std::uniform_real_distribution<double> open(0.0, spec.horizon);
  std::uniform_real_distribution<double> width(600.0, 3600.0);
  std::uniform_real_distribution<double> service(60.0, 400.0);

  Instance inst;
  const std::size_t n = 1 + spec.requests + spec.stations;
  std::vector<double> x(n), y(n);
  std::vector<int> f(n);
  x[0] = spec.area / 2;
  y[0] = spec.area / 2;
  f[0] = 0;
  const double base = 8 * 3600.0;
  for (std::size_t i = 1; i <= spec.requests; ++i) {
    x[i] = coord(rng);
    y[i] = coord(rng);
    f[i] = floor(rng);
    Request r;
    r.id = static_cast<int>(i);
    r.demand = demand(rng);
    r.window_open = base + std::round(open(rng));
    r.window_close = r.window_open + std::round(width(rng));
    r.service = {std::round(service(rng)), 36.0 * spec.var_scale};
    r.floor = f[i];
    inst.requests.push_back(r);
  }
  for (std::size_t c = 0; c < spec.stations; ++c) {
    const std::size_t k = 1 + spec.requests + c;
    x[k] = coord(rng);
    y[k] = coord(rng);
    f[k] = floor(rng);
    inst.charging_floors.push_back(f[k]);
  }
  inst.distance = Matrix(n);
  inst.floor_diff = Matrix(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      inst.distance(a, b) = std::round(std::hypot(x[a] - x[b], y[a] - y[b]));
      inst.floor_diff(a, b) = std::abs(f[a] - f[b]);
    }
  inst.amr.capacity = 20;
  inst.amr.consume_rate = spec.consume_rate;
  inst.stoch.sigma0_sq *= spec.var_scale;
  inst.stoch.sigmaf_sq *= spec.var_scale;
  return inst;
}

/// Random covering plan: a random permutation cut into random trips and
/// AMRs, with stray charging visits sprinkled in.
inline Solution random_solution(std::mt19937_64& rng, const Instance& inst) {
  std::vector<int> ids;
  for (std::size_t i = 1; i <= inst.request_count(); ++i) ids.push_back(static_cast<int>(i));
  std::shuffle(ids.begin(), ids.end(), rng);
  std::bernoulli_distribution cut_trip(0.25), cut_amr(0.3), charger(0.1);
  Solution s;
  s.amrs.emplace_back();
  s.amrs.back().trips.emplace_back();
  for (std::size_t k = 0; k < ids.size(); ++k) {
    auto& nodes = s.amrs.back().trips.back().nodes;
    if (inst.station_count() > 0 && charger(rng))
      nodes.insert(nodes.end() - 1,
                   Node::charging(static_cast<int>(uniform_index(rng, inst.station_count()))));
    nodes.insert(nodes.end() - 1, Node::request(ids[k]));
    if (k + 1 == ids.size()) break;
    if (cut_amr(rng)) {
      s.amrs.emplace_back();
      s.amrs.back().trips.emplace_back();
    } else if (cut_trip(rng)) {
      s.amrs.back().trips.emplace_back();
    }
  }
  return s;
}

inline std::multiset<int> request_multiset(const Solution& s) {
  std::multiset<int> m;
  for (const auto& a : s.amrs)
    for (const auto& t : a.trips)
      for (int id : t.request_ids()) m.insert(id);
  return m;
}

} // namespace amrvns::testing
