#pragma once

// Closed-form time propagation along a trip: normal travel and service
// times, left truncation at the window opening, and the chance test on
// lateness.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "amrvns/model.hpp"

namespace amrvns {

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Inverse standard normal CDF. Acklam's rational approximation followed by
/// one Halley step, good to about 1e-15 in the central region.
inline double normal_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();

  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  const double e = normal_cdf(x) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

/// Travel time between two stops: distance over speed plus a fixed stop
/// overhead, with an elevator term in mean and variance whenever the floors
/// differ.
inline Gaussian travel_params(const Instance& inst, Node from, Node to) {
  const double changes_floor = inst.floors(from, to) != 0.0 ? 1.0 : 0.0;
  return {inst.dist(from, to) / inst.amr.speed + inst.stoch.stop_overhead +
              inst.stoch.floor_time_mean * changes_floor,
          inst.stoch.sigma0_sq + inst.stoch.sigmaf_sq * changes_floor};
}

/// Mean and variance of max(X, e) for X ~ N(arrival). The moments are the
/// standard max-of-normal-and-constant formulas, evaluated relative to `e`
/// so large clock values do not cancel.
inline Gaussian truncated_start(Gaussian arrival, Seconds e) {
  const double lower = std::max(arrival.mean, e);
  if (!(arrival.variance > 0.0)) return {lower, 0.0};

  const double sigma = std::sqrt(arrival.variance);
  const double shift = arrival.mean - e;
  const double a = shift / sigma;
  const double cdf = normal_cdf(a);
  const double pdf = normal_pdf(a);

  const double m1 = shift * cdf + sigma * pdf;
  const double m2 = (shift * shift + arrival.variance) * cdf + shift * sigma * pdf;
  const double var = std::clamp(m2 - m1 * m1, 0.0, arrival.variance);
  return {std::max(e + m1, lower), var};
}

/// Arrival at the next stop: start of service plus service plus travel, all
/// independent.
inline Gaussian propagate(Gaussian prev_start, Gaussian service, Gaussian travel) {
  return {prev_start.mean + service.mean + travel.mean,
          prev_start.variance + service.variance + travel.variance};
}

/// The z with P{Z <= z} = 1 - epsilon.
inline double chance_quantile(double epsilon) { return normal_quantile(1.0 - epsilon); }

inline bool within_window(Gaussian arrival, Seconds h, double z) {
  return arrival.mean + z * arrival.stddev() <= h;
}

/// P{X <= h} >= 1 - epsilon under the normal arrival model.
inline bool chance_satisfied(Gaussian arrival, Seconds h, double epsilon) {
  return within_window(arrival, h, chance_quantile(epsilon));
}

/// P{X > h}.
inline double violation_probability(Gaussian arrival, Seconds h) {
  const double sigma = arrival.stddev();
  if (sigma == 0.0) return arrival.mean > h ? 1.0 : 0.0;
  return normal_cdf((arrival.mean - h) / sigma);
}

struct ChargeStop {
  Seconds departure = 0.0;
  double battery = 0.0;
};

/// Partial charge up to the high threshold at a linear rate; no charge when
/// already at or above it.
inline ChargeStop charging_departure(Seconds arrival_mean, double battery_on_arrival,
                                     const AmrParams& amr) {
  if (battery_on_arrival >= amr.battery_high) return {arrival_mean, battery_on_arrival};
  return {arrival_mean + (amr.battery_high - battery_on_arrival) / amr.charge_rate,
          amr.battery_high};
}

/// Latest departure that still reaches every request by its opening time in
/// expectation, clamped at midnight. Used when the instance sets none.
inline Seconds default_shift_start(const Instance& inst) {
  if (inst.requests.empty()) return 0.0;
  Seconds earliest = std::numeric_limits<double>::infinity();
  Seconds longest = 0.0;
  for (const auto& r : inst.requests) {
    earliest = std::min(earliest, r.window_open);
    longest = std::max(longest, travel_params(inst, Node::depot(), Node::request(r.id)).mean);
  }
  return std::max(0.0, std::floor(earliest - longest));
}

inline Seconds shift_start(const Instance& inst) {
  return inst.shift_start ? *inst.shift_start : default_shift_start(inst);
}

} // namespace amrvns
