#include <cmath>
#include <cstdio>
#include <filesystem>

#include <gtest/gtest.h>

#include "fbmiso/bounds.hpp"
#include "fbmiso/regression.hpp"

using namespace fbmiso;

TEST(Bounds, AnalyticBoundsHold) {
  for (double h : {0.6, 0.75, 0.9}) {
    const HurstModel m(h);
    for (const std::string name : {"growth", "fh_identity", "fh_ratio"}) {
      const auto c = check_bound(m, name, analytic_constant(m, name), 2000, 4, 2);
      EXPECT_TRUE(c.passed()) << name << " H=" << h << " ratio " << c.max_ratio;
      EXPECT_EQ(c.samples, 2000u);
    }
  }
}

TEST(Bounds, FhRatioConstant) {
  const HurstModel m(0.75);
  EXPECT_NEAR(analytic_constant(m, "fh_ratio"), std::pow(2.0, 0.5) / (4 - std::pow(2.0, 1.5)), 1e-15);
  EXPECT_THROW(analytic_constant(m, "T1"), std::invalid_argument);
}

TEST(Bounds, TooSmallConstantIsCaught) {
  const HurstModel m(0.75);
  const auto c = check_bound(m, "T1", 1e-6, 500, 4, 1);
  EXPECT_FALSE(c.passed());
  EXPECT_GT(c.violations, 0u);
}

TEST(Bounds, SamplingIsDeterministic) {
  const HurstModel m(0.6);
  const BoundSampler a(m, 9), b(m, 9);
  for (std::size_t k = 0; k < 50; ++k) EXPECT_EQ(a.ratio("i11i22", k), b.ratio("i11i22", k));
  const auto c1 = check_bound(m, "grdet", 10.0, 3000, 9, 1);
  const auto c2 = check_bound(m, "grdet", 10.0, 3000, 9, 4);
  EXPECT_EQ(c1.max_ratio, c2.max_ratio);
}

TEST(Bounds, EnvelopesAreTheStatedPowers) {
  const HurstModel m(0.75);
  const double s = 0.2, t = 0.5, r = 0.3;
  EXPECT_NEAR(envelope_west(m, s, t), std::pow(r, -0.5) + std::pow(s, -0.25) * std::pow(r, -0.25), 1e-14);
  EXPECT_NEAR(envelope_T2(m, s, t), envelope_T1(m, s, t) + 1, 1e-14);
  EXPECT_NEAR(envelope_i11i22(m, s, t), envelope_i12i21(m, s, t), 1e-14);
}

TEST(Bounds, EtaProductEnvelopeOnSamples) {
  // spot check of T1 against the closed-form eta weights
  const HurstModel m(0.75);
  for (auto [s, t] : {std::pair{0.1, 0.4}, {0.5, 0.5001}, {1e-3, 0.8}}) {
    const double eps = 1e-3, delta = 1e-3;
    const auto eta = eta_finite(m, eps, delta, s, t);
    const double lhs = std::abs(eta.c12 * eta.c22) / (eps * delta) * std::pow(t - s, 1.5);
    EXPECT_LT(lhs, 0.7263816931 * envelope_T1(m, s, t));
  }
}

TEST(RecordedConstants, RoundTrip) {
  RecordedConstants rc;
  rc.margin = 1.5;
  rc.samples = 123;
  rc.seed = 7;
  rc.set("T1", 0.75, 0.5);
  rc.set("west_q1.5", 0.6, 2.25);
  const auto path = (std::filesystem::temp_directory_path() / "fbmiso_rc_test.ini").string();
  rc.save(path);
  const auto back = RecordedConstants::load(path);
  std::remove(path.c_str());
  EXPECT_EQ(back.get("T1", 0.75), 0.5);
  EXPECT_EQ(back.get("west_q1.5", 0.6), 2.25);
  EXPECT_EQ(back.samples, 123u);
  EXPECT_EQ(back.seed, 7u);
  EXPECT_FALSE(back.has("T2", 0.75));
  EXPECT_THROW(back.get("T2", 0.75), std::out_of_range);
}

TEST(RecordedConstants, ShippedFileCoversAllBounds) {
  const auto rc = RecordedConstants::load(FBMISO_DATA_DIR "/recorded_constants.ini");
  for (double h : {0.6, 0.75, 0.9}) {
    for (const auto& name : recorded_bound_names()) EXPECT_TRUE(rc.has(name, h)) << name << " " << h;
    EXPECT_TRUE(rc.has("corollary", h));
  }
}

TEST(Corollary, ExponentChoice) {
  const HurstModel m(0.75);
  // qmax = min(1/(2H-1), 1/(2-2H)) = 2
  EXPECT_NEAR(corollary_q(m), 1.5, 1e-15);
  EXPECT_NEAR(corollary_q(HurstModel(0.6)), (1 + 1 / 0.8) / 2, 1e-15);
}

TEST(Corollary, ProductNorms) {
  const HurstModel m(0.75, 2);
  EXPECT_NEAR(integrand_product_norm(m, make_integrand("constant:1,2", 2), 1.5), 5.0, 1e-14);
  EXPECT_NEAR(integrand_product_norm(m, make_integrand("sign", 2), 1.5), 2.0, 1e-14);
  // p = 2 for d = 1: (int int s^2H t^2H + 2 R(s,t)^2 ds dt)^(1/2), midpoint rule
  const HurstModel m1(0.75);
  const int n = 1000;
  double acc = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double s = (i + 0.5) / n, t = (j + 0.5) / n;
      const double r = 0.5 * (std::pow(s, 1.5) + std::pow(t, 1.5) - std::pow(std::abs(t - s), 1.5));
      acc += std::pow(s * t, 1.5) + 2 * r * r;
    }
  }
  const double ref = std::sqrt(acc / (double(n) * n));
  EXPECT_NEAR(integrand_product_norm(m1, make_integrand("identity", 1), 2.0), ref, 1e-5);
}
