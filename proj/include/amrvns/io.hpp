#pragma once

// Instance and solution files: JSON schema, Solomon VRPTW text, and the
// human-readable route table.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "amrvns/evaluation.hpp"
#include "amrvns/model.hpp"
#include "amrvns/oracle.hpp"

namespace amrvns {

using Json = nlohmann::json;

enum class InstanceFormat { Json, Solomon };
enum class SolomonProfile { Small, Large };

/// "8:10" or "8:10:30" to seconds of day.
inline Seconds parse_clock(const std::string& s) {
  int h = 0, m = 0, sec = 0;
  char extra = 0;
  const int got = std::sscanf(s.c_str(), "%d:%d:%d%c", &h, &m, &sec, &extra);
  if (got < 2 || got > 3 || h < 0 || m < 0 || m >= 60 || sec < 0 || sec >= 60)
    throw InputError("bad clock value '" + s + "'");
  return h * 3600.0 + m * 60.0 + sec;
}

/// Seconds of day to H:MM:SS, rounded to the nearest second.
inline std::string format_clock(Seconds t) {
  const long total = std::lround(t);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%ld:%02ld:%02ld", total / 3600, (total / 60) % 60, total % 60);
  return buf;
}

namespace detail {

inline const Json& field(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw InputError(path + "." + key + ": missing");
  return j.at(key);
}

inline double number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw InputError(path + ": expected a number");
  return j.get<double>();
}

inline double number_or(const Json& j, const char* key, double fallback, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return number(j.at(key), path + "." + key);
}

inline int integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw InputError(path + ": expected an integer");
  return j.get<int>();
}

inline Seconds time_value(const Json& j, const std::string& path) {
  if (j.is_string()) {
    try {
      return parse_clock(j.get<std::string>());
    } catch (const InputError& e) {
      throw InputError(path + ": " + e.what());
    }
  }
  return number(j, path);
}

inline Matrix matrix(const Json& j, std::size_t n, const std::string& path) {
  if (!j.is_array() || j.size() != n)
    throw InputError(path + ": expected " + std::to_string(n) + " rows");
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = j[i];
    const std::string rp = path + "[" + std::to_string(i) + "]";
    if (!row.is_array() || row.size() != n)
      throw InputError(rp + ": expected " + std::to_string(n) + " columns");
    for (std::size_t k = 0; k < n; ++k) m(i, k) = number(row[k], rp + "[" + std::to_string(k) + "]");
  }
  return m;
}

inline Json matrix_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    Json row = Json::array();
    for (std::size_t k = 0; k < m.size(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline void require_valid(const Instance& inst) {
  const auto issues = validate_instance(inst);
  if (issues.empty()) return;
  std::string msg = "invalid instance:";
  for (const auto& s : issues) msg += "\n  " + s;
  throw InputError(msg);
}

} // namespace detail

inline Instance instance_from_json(const Json& j) {
  using namespace detail;
  if (!j.is_object()) throw InputError("instance: expected a JSON object");
  Instance inst;

  const auto& reqs = field(j, "requests", "instance");
  if (!reqs.is_array()) throw InputError("instance.requests: expected an array");
  for (std::size_t k = 0; k < reqs.size(); ++k) {
    const auto& r = reqs[k];
    const std::string path = "requests[" + std::to_string(k) + "]";
    Request q;
    q.id = integer(field(r, "id", path), path + ".id");
    q.demand = number(field(r, "demand", path), path + ".demand");
    const auto& w = field(r, "window", path);
    if (!w.is_array() || w.size() != 2) throw InputError(path + ".window: expected [open, close]");
    q.window_open = time_value(w[0], path + ".window[0]");
    q.window_close = time_value(w[1], path + ".window[1]");
    q.service.mean = number(field(r, "service_mean", path), path + ".service_mean");
    q.service.variance = number_or(r, "service_var", 0.0, path);
    q.floor = r.contains("floor") ? integer(r.at("floor"), path + ".floor") : 0;
    inst.requests.push_back(q);
  }

  if (j.contains("depot") && j.at("depot").contains("floor"))
    inst.depot_floor = integer(j.at("depot").at("floor"), "depot.floor");
  if (j.contains("charging")) {
    const auto& cs = j.at("charging");
    if (!cs.is_array()) throw InputError("instance.charging: expected an array");
    for (std::size_t k = 0; k < cs.size(); ++k) {
      const std::string path = "charging[" + std::to_string(k) + "]";
      inst.charging_floors.push_back(
          cs[k].contains("floor") ? integer(cs[k].at("floor"), path + ".floor") : 0);
    }
  }

  const std::size_t n = inst.node_count();
  std::vector<int> floors{inst.depot_floor};
  for (const auto& r : inst.requests) floors.push_back(r.floor);
  floors.insert(floors.end(), inst.charging_floors.begin(), inst.charging_floors.end());

  if (j.contains("distance")) {
    inst.distance = matrix(j.at("distance"), n, "distance");
  } else if (j.contains("coordinates")) {
    const auto& c = j.at("coordinates");
    if (!c.is_array() || c.size() != n)
      throw InputError("coordinates: expected " + std::to_string(n) + " points");
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < n; ++k) {
      const std::string path = "coordinates[" + std::to_string(k) + "]";
      if (!c[k].is_array() || c[k].size() != 2) throw InputError(path + ": expected [x, y]");
      pts.emplace_back(number(c[k][0], path + "[0]"), number(c[k][1], path + "[1]"));
    }
    inst.distance = Matrix(n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        inst.distance(a, b) = std::hypot(pts[a].first - pts[b].first, pts[a].second - pts[b].second);
  } else {
    throw InputError("instance: needs distance or coordinates");
  }

  if (j.contains("floor_diff")) {
    inst.floor_diff = matrix(j.at("floor_diff"), n, "floor_diff");
  } else {
    inst.floor_diff = Matrix(n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) inst.floor_diff(a, b) = std::abs(floors[a] - floors[b]);
  }

  const Json empty = Json::object();
  const auto& amr = j.contains("amr") ? j.at("amr") : empty;
  AmrParams ap;
  ap.capacity = number_or(amr, "capacity", ap.capacity, "amr");
  ap.speed = number_or(amr, "speed", ap.speed, "amr");
  ap.consume_rate = number_or(amr, "consume_rate", ap.consume_rate, "amr");
  ap.charge_rate = number_or(amr, "charge_rate", ap.charge_rate, "amr");
  ap.battery_low = number_or(amr, "alpha", ap.battery_low, "amr");
  ap.battery_high = number_or(amr, "beta", ap.battery_high, "amr");
  ap.battery_init = number_or(amr, "battery_init", ap.battery_init, "amr");
  inst.amr = ap;

  const auto& cost = j.contains("cost") ? j.at("cost") : empty;
  CostParams cp;
  cp.fixed_per_amr = number_or(cost, "xi1", cp.fixed_per_amr, "cost");
  cp.per_meter = number_or(cost, "xi2", cp.per_meter, "cost");
  cp.tw_penalty = number_or(cost, "xi3", cp.tw_penalty, "cost");
  cp.epsilon = number_or(cost, "epsilon", cp.epsilon, "cost");
  cp.shake_delta = number_or(cost, "delta", cp.shake_delta, "cost");
  inst.cost = cp;

  const auto& st = j.contains("stoch") ? j.at("stoch") : empty;
  StochasticParams sp;
  sp.floor_time_mean = number_or(st, "floor_time_mean", sp.floor_time_mean, "stoch");
  sp.stop_overhead = number_or(st, "stop_overhead", sp.stop_overhead, "stoch");
  sp.sigma0_sq = number_or(st, "sigma0_sq", sp.sigma0_sq, "stoch");
  sp.sigmaf_sq = number_or(st, "sigmaf_sq", sp.sigmaf_sq, "stoch");
  inst.stoch = sp;

  if (j.contains("shift_start")) inst.shift_start = time_value(j.at("shift_start"), "shift_start");

  require_valid(inst);
  return inst;
}

inline Json instance_to_json(const Instance& inst) {
  Json j;
  Json reqs = Json::array();
  for (const auto& r : inst.requests)
    reqs.push_back({{"id", r.id},
                    {"demand", r.demand},
                    {"window", {r.window_open, r.window_close}},
                    {"service_mean", r.service.mean},
                    {"service_var", r.service.variance},
                    {"floor", r.floor}});
  j["requests"] = std::move(reqs);
  j["depot"] = {{"floor", inst.depot_floor}};
  Json cs = Json::array();
  for (int f : inst.charging_floors) cs.push_back({{"floor", f}});
  j["charging"] = std::move(cs);
  j["distance"] = detail::matrix_json(inst.distance);
  j["floor_diff"] = detail::matrix_json(inst.floor_diff);
  const auto& a = inst.amr;
  j["amr"] = {{"capacity", a.capacity},       {"speed", a.speed},
              {"consume_rate", a.consume_rate}, {"charge_rate", a.charge_rate},
              {"alpha", a.battery_low},         {"beta", a.battery_high},
              {"battery_init", a.battery_init}};
  const auto& c = inst.cost;
  j["cost"] = {{"xi1", c.fixed_per_amr}, {"xi2", c.per_meter}, {"xi3", c.tw_penalty},
               {"epsilon", c.epsilon},   {"delta", c.shake_delta}};
  const auto& s = inst.stoch;
  j["stoch"] = {{"floor_time_mean", s.floor_time_mean},
                {"stop_overhead", s.stop_overhead},
                {"sigma0_sq", s.sigma0_sq},
                {"sigmaf_sq", s.sigmaf_sq}};
  if (inst.shift_start) j["shift_start"] = *inst.shift_start;
  return j;
}

/// Standard Solomon VRPTW text. The small profile keeps the first 15
/// customers. Request i sits on floor ceil(i/5), the depot on floor 0, and a
/// charging station shares the depot's location.
inline Instance load_solomon(std::istream& in, SolomonProfile profile) {
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);

  double capacity = -1.0;
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    std::istringstream ls(lines[k]);
    std::vector<double> vals;
    std::string tok;
    bool numeric = true;
    while (ls >> tok) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(tok, &used));
        if (used != tok.size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric || vals.empty()) continue;
    if (vals.size() == 2 && capacity < 0.0 && rows.empty()) capacity = vals[1];
    else if (vals.size() == 7) rows.push_back(vals);
  }
  if (capacity < 0.0) throw InputError("solomon: missing vehicle NUMBER/CAPACITY line");
  if (rows.size() < 1) throw InputError("solomon: no customer rows");

  std::size_t keep = rows.size() - 1;
  if (profile == SolomonProfile::Small) keep = std::min<std::size_t>(keep, 15);

  Instance inst;
  inst.amr.capacity = capacity;
  inst.depot_floor = 0;
  inst.charging_floors = {0};
  std::vector<std::pair<double, double>> pts{{rows[0][1], rows[0][2]}};
  std::vector<int> floors{0};
  for (std::size_t i = 1; i <= keep; ++i) {
    const auto& r = rows[i];
    Request q;
    q.id = static_cast<int>(i);
    q.demand = r[3];
    q.window_open = r[4];
    q.window_close = r[5];
    q.service = {r[6], 36.0};
    q.floor = static_cast<int>((i + 4) / 5);
    inst.requests.push_back(q);
    pts.emplace_back(r[1], r[2]);
    floors.push_back(q.floor);
  }
  pts.push_back(pts.front());
  floors.push_back(0);

  const std::size_t n = pts.size();
  inst.distance = Matrix(n);
  inst.floor_diff = Matrix(n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      inst.distance(a, b) = std::hypot(pts[a].first - pts[b].first, pts[a].second - pts[b].second);
      inst.floor_diff(a, b) = std::abs(floors[a] - floors[b]);
    }
  inst.shift_start = rows[0][4];
  detail::require_valid(inst);
  return inst;
}

inline Instance load_instance(std::istream& in, InstanceFormat format,
                              SolomonProfile profile = SolomonProfile::Small) {
  switch (format) {
  case InstanceFormat::Json: {
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw InputError(std::string("instance JSON: ") + e.what());
    }
    return instance_from_json(j);
  }
  case InstanceFormat::Solomon: return load_solomon(in, profile);
  }
  throw InputError("unknown instance format");
}

inline InstanceFormat parse_format(const std::string& s) {
  if (s == "json") return InstanceFormat::Json;
  if (s == "solomon") return InstanceFormat::Solomon;
  throw InputError("unknown instance format '" + s + "'");
}

inline Instance load_instance_file(const std::string& path, InstanceFormat format,
                                   SolomonProfile profile = SolomonProfile::Small) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return load_instance(in, format, profile);
}

/// Multiplies every distance by `k`.
inline Instance scale_distance(Instance inst, double k) {
  const std::size_t n = inst.distance.size();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) inst.distance(a, b) *= k;
  return inst;
}

/// Multiplies the travel variance terms and every service variance by `n`.
inline Instance scale_variance(Instance inst, double n) {
  inst.stoch.sigma0_sq *= n;
  inst.stoch.sigmaf_sq *= n;
  for (auto& r : inst.requests) r.service.variance *= n;
  return inst;
}

// ---- solutions ----------------------------------------------------------

inline Json node_json(const Node& n) {
  switch (n.kind) {
  case NodeKind::Depot: return "d";
  case NodeKind::Charging: return "c" + std::to_string(n.index);
  case NodeKind::Request: return n.index;
  }
  return nullptr;
}

inline Node node_from_json(const Json& j) {
  if (j.is_number_integer()) return Node::request(j.get<int>());
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "d") return Node::depot();
    if (s.size() > 1 && s[0] == 'c') {
      try {
        return Node::charging(std::stoi(s.substr(1)));
      } catch (const std::exception&) {
      }
    }
  }
  throw InputError("solution: bad node " + j.dump());
}

inline Json solution_to_json(const Instance& inst, const Solution& sol,
                             const SolutionEvaluation& ev) {
  Json amrs = Json::array();
  for (const auto& plan : sol.amrs) {
    Json trips = Json::array();
    for (const auto& t : plan.trips) {
      Json nodes = Json::array();
      for (const auto& n : t.nodes) nodes.push_back(node_json(n));
      trips.push_back(std::move(nodes));
    }
    amrs.push_back({{"trips", std::move(trips)}});
  }
  Json per = Json::array();
  for (const auto& ra : request_arrivals(inst, sol, ev))
    per.push_back({{"id", ra.id},
                   {"arrival_mean", ra.arrival.mean},
                   {"arrival_std", ra.arrival.stddev()},
                   {"violation_prob", ra.violation_prob}});
  Json j;
  j["amrs"] = std::move(amrs);
  j["objective"] = ev.objective;
  j["distance"] = ev.total_distance;
  j["m"] = ev.amr_count;
  j["penalized"] = ev.penalized;
  j["feasible"] = ev.feasible;
  j["charging_visits"] = ev.charging_visits;
  j["per_request"] = std::move(per);
  return j;
}

inline Solution solution_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("amrs") || !j.at("amrs").is_array())
    throw InputError("solution: expected an object with an 'amrs' array");
  Solution sol;
  for (const auto& a : j.at("amrs")) {
    AmrPlan plan;
    if (!a.contains("trips") || !a.at("trips").is_array())
      throw InputError("solution: every AMR needs a 'trips' array");
    for (const auto& t : a.at("trips")) {
      Trip trip;
      trip.nodes.clear();
      for (const auto& n : t) trip.nodes.push_back(node_from_json(n));
      plan.trips.push_back(std::move(trip));
    }
    sol.amrs.push_back(std::move(plan));
  }
  return sol;
}

inline Solution load_solution_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return solution_from_json(Json::parse(in));
  } catch (const Json::parse_error& e) {
    throw InputError(std::string("solution JSON: ") + e.what());
  }
}

inline Json mc_report_json(const McReport& rep) {
  Json per = Json::array();
  for (const auto& r : rep.per_request)
    per.push_back({{"id", r.id},
                   {"violation_frequency", r.violation_frequency},
                   {"mean_arrival", r.mean_arrival}});
  return {{"samples", rep.samples}, {"max_violation", rep.max_violation}, {"per_request", per}};
}

/// One row per trip: route, distance, load, number of charges and the mean
/// arrival time at each request.
inline std::string route_table(const Instance& inst, const Solution& sol,
                               const SolutionEvaluation& ev) {
  std::ostringstream os;
  os << "AMR No.\tService Route\tDistance (m)\tLoad (kg)\tNumber of Charges\t"
        "Mean Arrival Time of Requests\n";
  for (std::size_t k = 0; k < ev.per_trip.size(); ++k) {
    const auto& ref = ev.trip_refs[k];
    const auto& nodes = sol.amrs[ref.amr].trips[ref.trip].nodes;
    const auto& te = ev.per_trip[k];
    std::string route, times;
    double load = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (i) route += " -> ";
      const Node& n = nodes[i];
      if (n.is_depot()) route += "0";
      else if (n.is_charging())
        route += inst.station_count() > 1 ? "c" + std::to_string(n.index + 1) : "c";
      else {
        route += std::to_string(n.index);
        load += inst.request(n.index).demand;
        if (!times.empty()) times += "-";
        times += format_clock(te.timings[i].arrival.mean);
      }
    }
    std::ostringstream dist;
    dist << std::defaultfloat << std::setprecision(10) << te.distance;
    std::ostringstream ld;
    ld << std::defaultfloat << std::setprecision(10) << load;
    os << (ref.trip == 0 ? std::to_string(ref.amr + 1) : "") << '\t' << "(" << ref.trip + 1
       << ") " << route << '\t' << dist.str() << '\t' << ld.str() << '\t' << te.charges << '\t'
       << times << '\n';
  }
  return os.str();
}

} // namespace amrvns
