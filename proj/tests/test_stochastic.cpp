#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"

using namespace amrvns;
using amrvns::testing::hospital;

TEST(Normal, CdfAndQuantile) {
  EXPECT_NEAR(normal_cdf(0.0), 0.5, 1e-15);
  EXPECT_NEAR(normal_cdf(1.959963984540054), 0.975, 1e-13);
  EXPECT_NEAR(normal_pdf(0.0), 0.3989422804014327, 1e-15);
  EXPECT_NEAR(chance_quantile(0.05), 1.6448536269514722, 1e-12);
  for (double p : {1e-10, 1e-4, 0.02425, 0.3, 0.5, 0.9, 0.97575, 1 - 1e-8})
    EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-12 * std::max(1.0, p / (1 - p)));
}

TEST(TravelParams, HospitalArcs) {
  const Instance inst = hospital();
  const Gaussian a = travel_params(inst, Node::depot(), Node::request(1));
  EXPECT_DOUBLE_EQ(a.mean, 157.25);
  EXPECT_DOUBLE_EQ(a.variance, 20.0);
  const Gaussian b = travel_params(inst, Node::request(6), Node::request(7));
  EXPECT_DOUBLE_EQ(b.mean, 6.0);
  EXPECT_DOUBLE_EQ(b.variance, 4.0);
  const Gaussian c = travel_params(inst, Node::request(2), Node::request(11));
  EXPECT_DOUBLE_EQ(c.mean, 6.0);
}

TEST(TruncatedStart, FarBelowIsIdentity) {
  const Gaussian x{1000.0, 25.0};
  const Gaussian y = truncated_start(x, 1000.0 - 50.0);
  EXPECT_NEAR(y.mean, 1000.0, 1e-6 * 1000.0);
  EXPECT_NEAR(y.variance, 25.0, 1e-6 * 25.0);
}

TEST(TruncatedStart, FarAboveCollapsesToE) {
  const Gaussian x{1000.0, 25.0};
  const Gaussian y = truncated_start(x, 1050.0);
  EXPECT_NEAR(y.mean, 1050.0, 1e-6);
  EXPECT_LE(y.variance, 1e-6 * 25.0);
}

TEST(TruncatedStart, StandardAtZeroAgainstMonteCarlo) {
  const Gaussian y = truncated_start({0.0, 1.0}, 0.0);
  EXPECT_NEAR(y.mean, 0.398942, 1e-6);
  EXPECT_NEAR(y.variance, 0.340845, 1e-6);

  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n(0.0, 1.0);
  const int samples = 10'000'000;
  double s1 = 0, s2 = 0;
  for (int i = 0; i < samples; ++i) {
    const double v = std::max(n(rng), 0.0);
    s1 += v;
    s2 += v * v;
  }
  const double mean = s1 / samples;
  EXPECT_NEAR(y.mean, mean, 1e-3);
  EXPECT_NEAR(y.variance, s2 / samples - mean * mean, 1e-3);
}

TEST(TruncatedStart, ZeroVarianceIsExactMax) {
  EXPECT_EQ(truncated_start({10.0, 0.0}, 20.0).mean, 20.0);
  EXPECT_EQ(truncated_start({30.0, 0.0}, 20.0).mean, 30.0);
  EXPECT_EQ(truncated_start({30.0, 0.0}, 20.0).variance, 0.0);
}

TEST(TruncatedStart, NodeTimingInvariants) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> mu(0.0, 50000.0), var(0.0, 500.0), off(-100.0, 100.0);
  for (int k = 0; k < 10000; ++k) {
    const Gaussian x{mu(rng), var(rng)};
    const double e = x.mean + off(rng);
    const Gaussian y = truncated_start(x, e);
    EXPECT_GE(y.mean, std::max(x.mean, e) - 1e-6);
    EXPECT_LE(y.variance, x.variance + 1e-9);
  }
}

TEST(Propagate, Additivity) {
  const Gaussian a = propagate({0, 0}, {600, 36}, {157.25, 20});
  EXPECT_EQ(a.mean, 757.25);
  EXPECT_EQ(a.variance, 56.0);
  const Gaussian z = propagate({0, 0}, {0, 0}, {0, 0});
  EXPECT_EQ(z.mean, 0.0);
  EXPECT_EQ(z.variance, 0.0);
  const Gaussian b = propagate({100, 4}, {300, 360}, {6, 4});
  EXPECT_EQ(b.mean, 406.0);
  EXPECT_EQ(b.variance, 368.0);
}

TEST(ChanceSatisfied, Boundaries) {
  EXPECT_TRUE(chance_satisfied({0, 1}, 1.6449, 0.05));
  EXPECT_FALSE(chance_satisfied({0, 1}, 1.60, 0.05));
  EXPECT_TRUE(chance_satisfied({0, 0}, 0.0, 0.05));
  EXPECT_TRUE(chance_satisfied({0, 0}, 0.0, 0.9));
}

TEST(ChanceSatisfied, MonotoneInH) {
  const Gaussian x{100.0, 30.0};
  bool seen_true = false;
  double prev_p = 2.0;
  for (int k = 0; k < 200; ++k) {
    const double h = 80.0 + 0.2 * k;
    const bool ok = chance_satisfied(x, h, 0.05);
    if (seen_true) { EXPECT_TRUE(ok); }
    seen_true = seen_true || ok;
    const double p = violation_probability(x, h);
    EXPECT_LT(p, prev_p);
    prev_p = p;
  }
  EXPECT_TRUE(seen_true);
}

TEST(ChargingDeparture, LinearPartialCharge) {
  AmrParams amr;
  amr.battery_high = 0.8;
  amr.charge_rate = 1.0 / 16200;
  EXPECT_NEAR(charging_departure(0.0, 0.0, amr).departure, 12960.0, 1e-9);
  EXPECT_EQ(charging_departure(100.0, 0.8, amr).departure, 100.0);
  EXPECT_NEAR(charging_departure(0.0, 0.4, amr).departure, 6480.0, 1e-9);
  EXPECT_EQ(charging_departure(0.0, 0.4, amr).battery, 0.8);
}

TEST(ShiftStart, DefaultFromWindows) {
  Instance inst = hospital();
  // earliest window 8:10, farthest depot arc 150 m across floors
  EXPECT_EQ(default_shift_start(inst), std::floor(29400.0 - (150 + 6 + 51.25)));
  inst.shift_start = 100.0;
  EXPECT_EQ(shift_start(inst), 100.0);
}
