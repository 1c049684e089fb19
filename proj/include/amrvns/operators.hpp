#pragma once

// Neighborhood moves, repairs and the AMR-merge operator. Every operator
// takes its input by const reference and returns a new Solution.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "amrvns/evaluation.hpp"
#include "amrvns/model.hpp"

namespace amrvns {

using Rng = std::mt19937_64;

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

/// Coordinates of a node inside a Solution.
struct Position {
  std::size_t amr = 0;
  std::size_t trip = 0;
  std::size_t index = 0;

  bool same_trip(const Position& o) const { return amr == o.amr && trip == o.trip; }
  friend bool operator==(const Position&, const Position&) = default;
};

enum class MoveKind { SwapStar, TwoOptStar, RelocationStar, Shake2OptL };

/// What an operator did; filled when the caller asks for it.
struct Move {
  MoveKind kind = MoveKind::SwapStar;
  bool targeted = false;
  std::vector<Position> positions;
};

inline Node& node_at(Solution& s, const Position& p) {
  return s.amrs[p.amr].trips[p.trip].nodes[p.index];
}
inline const Node& node_at(const Solution& s, const Position& p) {
  return s.amrs[p.amr].trips[p.trip].nodes[p.index];
}

inline std::vector<Position> request_positions(const Solution& sol) {
  std::vector<Position> out;
  for (std::size_t a = 0; a < sol.amrs.size(); ++a)
    for (std::size_t p = 0; p < sol.amrs[a].trips.size(); ++p) {
      const auto& nodes = sol.amrs[a].trips[p].nodes;
      for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].is_request()) out.push_back({a, p, i});
    }
  return out;
}

namespace detail {

inline double close_of(const Instance& inst, const Node& n) {
  return inst.request(n.index).window_close;
}

// Offsets of each AMR's trips inside SolutionEvaluation::per_trip.
inline std::vector<std::size_t> trip_offsets(const Solution& sol) {
  std::vector<std::size_t> off(sol.amrs.size() + 1, 0);
  for (std::size_t a = 0; a < sol.amrs.size(); ++a) off[a + 1] = off[a] + sol.amrs[a].trips.size();
  return off;
}

// First late request of each trip that has one, in solution order.
inline std::vector<Position> first_violators(const Solution& sol, const SolutionEvaluation& ev) {
  std::vector<Position> out;
  const auto off = trip_offsets(sol);
  for (std::size_t a = 0; a < sol.amrs.size(); ++a)
    for (std::size_t p = 0; p < sol.amrs[a].trips.size(); ++p) {
      const auto& te = ev.per_trip[off[a] + p];
      const auto& nodes = sol.amrs[a].trips[p].nodes;
      for (std::size_t i = 0; i < nodes.size(); ++i)
        if (nodes[i].is_request() && !te.on_time[i]) {
          out.push_back({a, p, i});
          break;
        }
    }
  return out;
}

// Earliest request ahead of `v` on its trip whose window closes later.
inline std::optional<std::size_t> earlier_looser(const Instance& inst, const Trip& trip,
                                                 std::size_t v) {
  const double h = close_of(inst, trip.nodes[v]);
  for (std::size_t i = 1; i < v; ++i)
    if (trip.nodes[i].is_request() && close_of(inst, trip.nodes[i]) > h) return i;
  return std::nullopt;
}

inline bool evaluation_matches(const Solution& sol, const SolutionEvaluation& ev) {
  return ev.per_trip.size() == sol.trip_count();
}

// The plan with robot order forgotten.
inline std::vector<std::vector<std::vector<Node>>> plan_key(const Solution& sol) {
  std::vector<std::vector<std::vector<Node>>> key;
  for (const auto& a : sol.amrs) {
    key.emplace_back();
    for (const auto& t : a.trips) key.back().push_back(t.nodes);
  }
  std::sort(key.begin(), key.end(), [](const auto& x, const auto& y) {
    return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end(),
                                        [](const auto& p, const auto& q) {
                                          return std::lexicographical_compare(
                                              p.begin(), p.end(), q.begin(), q.end(),
                                              [](const Node& m, const Node& n) {
                                                return std::pair(static_cast<int>(m.kind), m.index) <
                                                       std::pair(static_cast<int>(n.kind), n.index);
                                              });
                                        });
  });
  return key;
}

} // namespace detail

/// Exchanges two requests. A late request is swapped with the earliest
/// request ahead of it on its trip whose window closes later, falling back to
/// the loosest request elsewhere; with no late request, two random requests
/// trade places.
inline Solution swap_star(const Instance& inst, const Solution& sol, const SolutionEvaluation& ev,
                          Rng& rng, Move* applied = nullptr) {
  const auto all = request_positions(sol);
  if (all.size() < 2) return sol;
  Solution out = sol;

  auto do_swap = [&](Position a, Position b, bool targeted) {
    std::swap(node_at(out, a), node_at(out, b));
    if (applied) *applied = {MoveKind::SwapStar, targeted, {a, b}};
    return out;
  };

  if (detail::evaluation_matches(sol, ev)) {
    const auto violators = detail::first_violators(sol, ev);
    if (!violators.empty()) {
      const Position v = violators[uniform_index(rng, violators.size())];
      const Trip& trip = sol.amrs[v.amr].trips[v.trip];
      if (auto i = detail::earlier_looser(inst, trip, v.index))
        return do_swap(v, {v.amr, v.trip, *i}, true);

      const double h = detail::close_of(inst, node_at(sol, v));
      std::optional<Position> partner;
      for (const auto& p : all) {
        if (p.same_trip(v)) continue;
        const Node& n = node_at(sol, p);
        const double hp = detail::close_of(inst, n);
        if (hp <= h) continue;
        if (!partner) {
          partner = p;
          continue;
        }
        const Node& best = node_at(sol, *partner);
        const double hb = detail::close_of(inst, best);
        if (hp > hb || (hp == hb && n.index < best.index)) partner = p;
      }
      if (partner) return do_swap(v, *partner, true);
    }
  }

  const std::size_t i = uniform_index(rng, all.size());
  std::size_t j = uniform_index(rng, all.size() - 1);
  if (j >= i) ++j;
  return do_swap(all[i], all[j], false);
}

/// Reverses a run of a trip. On a trip with a late request, a maximal run of
/// consecutive requests with strictly decreasing window close is reversed;
/// otherwise the span between two random requests of one trip.
inline Solution two_opt_star(const Instance& inst, const Solution& sol,
                             const SolutionEvaluation& ev, Rng& rng, Move* applied = nullptr) {
  struct Run {
    std::size_t amr, trip, first, last;
  };

  std::vector<std::pair<std::size_t, std::size_t>> eligible;
  for (std::size_t a = 0; a < sol.amrs.size(); ++a)
    for (std::size_t p = 0; p < sol.amrs[a].trips.size(); ++p)
      if (sol.amrs[a].trips[p].request_count() >= 2) eligible.emplace_back(a, p);
  if (eligible.empty()) return sol;

  Solution out = sol;
  auto reverse_span = [&](std::size_t a, std::size_t p, std::size_t first, std::size_t last,
                          bool targeted) {
    auto& nodes = out.amrs[a].trips[p].nodes;
    std::reverse(nodes.begin() + static_cast<std::ptrdiff_t>(first),
                 nodes.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    if (applied) *applied = {MoveKind::TwoOptStar, targeted, {{a, p, first}, {a, p, last}}};
    return out;
  };

  if (detail::evaluation_matches(sol, ev)) {
    std::vector<Run> runs;
    for (const auto& v : detail::first_violators(sol, ev)) {
      const auto& nodes = sol.amrs[v.amr].trips[v.trip].nodes;
      std::size_t i = 1;
      while (i + 1 < nodes.size()) {
        std::size_t j = i;
        while (j + 2 < nodes.size() && nodes[j].is_request() && nodes[j + 1].is_request() &&
               detail::close_of(inst, nodes[j + 1]) < detail::close_of(inst, nodes[j]))
          ++j;
        if (j > i) runs.push_back({v.amr, v.trip, i, j});
        i = j + 1;
      }
    }
    if (!runs.empty()) {
      const Run& r = runs[uniform_index(rng, runs.size())];
      return reverse_span(r.amr, r.trip, r.first, r.last, true);
    }
  }

  const auto [a, p] = eligible[uniform_index(rng, eligible.size())];
  std::vector<std::size_t> idx;
  const auto& nodes = sol.amrs[a].trips[p].nodes;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].is_request()) idx.push_back(i);
  std::size_t x = uniform_index(rng, idx.size());
  std::size_t y = uniform_index(rng, idx.size() - 1);
  if (y >= x) ++y;
  if (x > y) std::swap(x, y);
  return reverse_span(a, p, idx[x], idx[y], false);
}

/// Moves one request. A late request goes in front of the earliest request
/// ahead of it whose window closes later; otherwise a random request is
/// reinserted at a random slot of a random trip.
inline Solution relocation_star(const Instance& inst, const Solution& sol,
                                const SolutionEvaluation& ev, Rng& rng, Move* applied = nullptr) {
  const auto all = request_positions(sol);
  if (all.size() < 2) return sol;
  Solution out = sol;

  if (detail::evaluation_matches(sol, ev)) {
    const auto violators = detail::first_violators(sol, ev);
    if (!violators.empty()) {
      const Position v = violators[uniform_index(rng, violators.size())];
      const Trip& trip = sol.amrs[v.amr].trips[v.trip];
      if (auto i = detail::earlier_looser(inst, trip, v.index)) {
        auto& nodes = out.amrs[v.amr].trips[v.trip].nodes;
        const Node moved = nodes[v.index];
        nodes.erase(nodes.begin() + static_cast<std::ptrdiff_t>(v.index));
        nodes.insert(nodes.begin() + static_cast<std::ptrdiff_t>(*i), moved);
        if (applied) *applied = {MoveKind::RelocationStar, true, {v, {v.amr, v.trip, *i}}};
        return out;
      }
    }
  }

  const Position from = all[uniform_index(rng, all.size())];
  auto& src = out.amrs[from.amr].trips[from.trip].nodes;
  const Node moved = src[from.index];
  src.erase(src.begin() + static_cast<std::ptrdiff_t>(from.index));

  std::vector<std::pair<std::size_t, std::size_t>> trips;
  for (std::size_t a = 0; a < out.amrs.size(); ++a)
    for (std::size_t p = 0; p < out.amrs[a].trips.size(); ++p) trips.emplace_back(a, p);
  const auto [a, p] = trips[uniform_index(rng, trips.size())];
  auto& dst = out.amrs[a].trips[p].nodes;
  const std::size_t slot = 1 + uniform_index(rng, dst.size() - 1);
  dst.insert(dst.begin() + static_cast<std::ptrdiff_t>(slot), moved);
  if (applied) *applied = {MoveKind::RelocationStar, false, {from, {a, p, slot}}};
  normalize(out);
  return out;
}

/// Splits every overloaded trip with a depot visit in front of the first
/// request the remaining load cannot cover. Request order is preserved.
inline Solution depot_insert_repair(const Instance& inst, const Solution& sol) {
  Solution out = sol;
  const double cap = inst.amr.capacity;
  for (auto& amr : out.amrs) {
    std::vector<Trip> trips;
    for (const auto& trip : amr.trips) {
      Trip cur;
      cur.nodes = {Node::depot()};
      double load = 0.0;
      bool has_request = false;
      for (std::size_t k = 1; k + 1 < trip.nodes.size(); ++k) {
        const Node& n = trip.nodes[k];
        if (n.is_request()) {
          const double q = inst.request(n.index).demand;
          if (q > cap + detail::kLoadSlack)
            throw StructuralError("request " + std::to_string(n.index) + " exceeds AMR capacity");
          if (has_request && load + q > cap + detail::kLoadSlack) {
            cur.nodes.push_back(Node::depot());
            trips.push_back(std::move(cur));
            cur.nodes = {Node::depot()};
            load = 0.0;
          }
          load += q;
          has_request = true;
        }
        cur.nodes.push_back(n);
      }
      cur.nodes.push_back(Node::depot());
      trips.push_back(std::move(cur));
    }
    amr.trips = std::move(trips);
  }
  return out;
}

/// Rebuilds the charging visits of every AMR whose battery would fall below
/// the low threshold: chargers are stripped, then the station nearest to the
/// preceding stop is inserted in front of each stop the battery cannot reach
/// (or earlier, when that stop is already too far from every station).
/// AMRs that never run low are returned untouched.
inline Solution charging_insert_repair(const Instance& inst, const Solution& sol) {
  Solution out = sol;
  const auto& amr = inst.amr;
  const double z = chance_quantile(inst.cost.epsilon);

  auto nearest_station = [&](Node from) -> std::optional<Node> {
    std::optional<Node> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < inst.station_count(); ++c) {
      const Node s = Node::charging(static_cast<int>(c));
      const double d = inst.dist(from, s);
      if (d < best_d) {
        best_d = d;
        best = s;
      }
    }
    return best;
  };

  for (auto& plan : out.amrs) {
    const auto evs = evaluate_amr(inst, plan, z);
    if (std::all_of(evs.begin(), evs.end(), [](const TripEvaluation& t) { return t.battery_ok; }))
      continue;

    // the whole trip chain is rebuilt at once so a charge can move into an
    // earlier trip when a later one starts too low
    std::vector<Node> stops;
    std::vector<std::size_t> stop_trip;
    for (std::size_t p = 0; p < plan.trips.size(); ++p)
      for (const auto& n : plan.trips[p].nodes)
        if (!n.is_charging()) {
          stops.push_back(n);
          stop_trip.push_back(p);
        }
    double battery = amr.battery_init;
    std::vector<Node> rebuilt{stops.front()};
    std::vector<std::size_t> tag{stop_trip.front()};
    std::vector<double> level{battery};
    std::size_t k = 1;
    auto push = [&](Node n, std::size_t t) {
      rebuilt.push_back(n);
      tag.push_back(t);
      level.push_back(battery);
    };
    while (k < stops.size()) {
      const Node next = stops[k];
      double need = amr.consume_rate * inst.dist(rebuilt.back(), next);
      if (battery - need >= amr.battery_low - detail::kBatterySlack) {
        battery -= need;
        push(next, stop_trip[k]);
        ++k;
        continue;
      }
      if (inst.station_count() == 0)
        throw StructuralError("battery runs low and the instance has no charger");
      // charge after the latest stop that can still reach a station; the
      // stops behind it are replayed from the charger
      bool placed = false;
      for (std::size_t j = rebuilt.size(); j-- > 0;) {
        if (rebuilt[j].is_charging()) break;
        const Node station = *nearest_station(rebuilt[j]);
        const double at_station = level[j] - amr.consume_rate * inst.dist(rebuilt[j], station);
        if (at_station < amr.battery_low - detail::kBatterySlack) continue;
        k -= rebuilt.size() - 1 - j;
        rebuilt.resize(j + 1);
        tag.resize(j + 1);
        level.resize(j + 1);
        battery = level[j];
        if (rebuilt[j].is_depot() && stop_trip[k] != tag[j]) {
          // j closes a trip: the charger opens the next one
          battery -= amr.consume_rate * inst.dist(rebuilt[j], stops[k]);
          push(stops[k], stop_trip[k]);
          ++k;
        }
        battery = charging_departure(0.0, at_station, amr).battery;
        push(station, stop_trip[k]);
        placed = true;
        break;
      }
      if (!placed) throw StructuralError("no charging station reachable within the battery budget");
      need = amr.consume_rate * inst.dist(rebuilt.back(), stops[k]);
      if (battery - need < amr.battery_low - detail::kBatterySlack)
        throw StructuralError("arc consumption exceeds the usable battery range");
    }
    for (auto& trip : plan.trips) trip.nodes.clear();
    for (std::size_t i = 0; i < rebuilt.size(); ++i) plan.trips[tag[i]].nodes.push_back(rebuilt[i]);
  }
  return out;
}

/// Repeatedly hands one AMR's whole trip list to another, appended after its
/// own trips, whenever the combined schedule keeps every trip on time and
/// within battery and capacity limits.
inline Solution amr_decrease(const Instance& inst, const Solution& sol) {
  Solution out = sol;
  normalize(out);
  const double z = chance_quantile(inst.cost.epsilon);

  bool merged = true;
  while (merged && out.amrs.size() > 1) {
    merged = false;
    for (std::size_t a = 0; a < out.amrs.size() && !merged; ++a) {
      for (std::size_t b = 0; b < out.amrs.size() && !merged; ++b) {
        if (a == b) continue;
        AmrPlan combined = out.amrs[a];
        combined.trips.insert(combined.trips.end(), out.amrs[b].trips.begin(),
                              out.amrs[b].trips.end());
        if (!all_ok(evaluate_amr(inst, combined, z))) continue;
        out.amrs[a] = std::move(combined);
        out.amrs.erase(out.amrs.begin() + static_cast<std::ptrdiff_t>(b));
        merged = true;
      }
    }
  }
  return out;
}

/// Swaps the tails of two trips: nodes after `cut_a` on the first and after
/// `cut_b` on the second (the closing depot stays). A cut at the last
/// request leaves an empty tail.
inline Solution exchange_tails(const Solution& sol, TripRef first, std::size_t cut_a,
                               TripRef second, std::size_t cut_b) {
  Solution out = sol;
  const auto& ta = sol.amrs[first.amr].trips[first.trip].nodes;
  const auto& tb = sol.amrs[second.amr].trips[second.trip].nodes;
  auto splice = [](const std::vector<Node>& head, std::size_t cut, const std::vector<Node>& tail_src,
                   std::size_t tail_cut) {
    std::vector<Node> nodes(head.begin(), head.begin() + static_cast<std::ptrdiff_t>(cut) + 1);
    nodes.insert(nodes.end(), tail_src.begin() + static_cast<std::ptrdiff_t>(tail_cut) + 1,
                 tail_src.end() - 1);
    nodes.push_back(Node::depot());
    return nodes;
  };
  out.amrs[first.amr].trips[first.trip].nodes = splice(ta, cut_a, tb, cut_b);
  out.amrs[second.amr].trips[second.trip].nodes = splice(tb, cut_b, ta, cut_a);
  normalize(out);
  return out;
}

/// Best of `candidates` random tail exchanges between two distinct trips,
/// ranked by penalized cost; candidates that leave the plan unchanged are
/// skipped. With a single trip, random reversals of that
/// trip are drawn instead.
inline Solution shake_2opt_l(const Instance& inst, const Solution& sol, Rng& rng,
                             std::size_t candidates = 20) {
  std::vector<TripRef> refs;
  for (std::size_t a = 0; a < sol.amrs.size(); ++a)
    for (std::size_t p = 0; p < sol.amrs[a].trips.size(); ++p) refs.push_back({a, p});
  if (candidates == 0 || refs.empty()) return sol;

  std::vector<Solution> pool;
  pool.reserve(candidates);
  if (refs.size() >= 2) {
    for (std::size_t l = 0; l < candidates; ++l) {
      const std::size_t i = uniform_index(rng, refs.size());
      std::size_t j = uniform_index(rng, refs.size() - 1);
      if (j >= i) ++j;
      const auto& na = sol.amrs[refs[i].amr].trips[refs[i].trip].nodes;
      const auto& nb = sol.amrs[refs[j].amr].trips[refs[j].trip].nodes;
      const std::size_t cut_a = uniform_index(rng, na.size() - 1);
      const std::size_t cut_b = uniform_index(rng, nb.size() - 1);
      pool.push_back(exchange_tails(sol, refs[i], cut_a, refs[j], cut_b));
    }
  } else {
    const auto& nodes = sol.amrs[refs[0].amr].trips[refs[0].trip].nodes;
    const std::size_t interior = nodes.size() - 2;
    if (interior < 2) return sol;
    for (std::size_t l = 0; l < candidates; ++l) {
      std::size_t x = 1 + uniform_index(rng, interior);
      std::size_t y = 1 + uniform_index(rng, interior - 1);
      if (y >= x) ++y;
      if (x > y) std::swap(x, y);
      Solution cand = sol;
      auto& cn = cand.amrs[refs[0].amr].trips[refs[0].trip].nodes;
      std::reverse(cn.begin() + static_cast<std::ptrdiff_t>(x),
                   cn.begin() + static_cast<std::ptrdiff_t>(y) + 1);
      pool.push_back(std::move(cand));
    }
  }

  // exchanging empty tails, or whole single trips between robots, only
  // relabels the plan and would always win at a local optimum
  const auto key = detail::plan_key(sol);
  std::size_t best = pool.size();
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < pool.size(); ++k) {
    if (detail::plan_key(pool[k]) == key) continue;
    const double c = evaluate_solution(inst, pool[k]).penalized;
    if (c < best_cost) {
      best_cost = c;
      best = k;
    }
  }
  return best < pool.size() ? pool[best] : sol;
}

} // namespace amrvns
