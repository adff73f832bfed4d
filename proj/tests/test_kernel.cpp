#include <cmath>

#include <gtest/gtest.h>

#include "fbmiso/kernel.hpp"
#include "fbmiso/regression.hpp"
#include "fbmiso/rng.hpp"
#include "fbmiso/sampler.hpp"
#include "oracles.hpp"

using namespace fbmiso;

namespace {

PairSample scalar_pair(double x, double y) {
  PairSample p;
  p.b_s = Eigen::VectorXd::Constant(1, x);
  p.b_t = Eigen::VectorXd::Constant(1, y);
  return p;
}

}  // namespace

TEST(Regression, LambdaFiniteSolvesNormalEquations) {
  for (double h : {0.6, 0.75, 0.9}) {
    const HurstModel m(h);
    for (auto [s, t] : {std::pair{0.3, 0.7}, {0.7, 0.3}, {0.05, 0.06}}) {
      const double eps = 1e-3, delta = 2e-3;
      const auto l = lambda_finite(m, eps, delta, s, t);
      const Eigen::Matrix2d sig = oracle::pair_cov(h, s, t);
      Eigen::Vector2d cu, cv;
      cu << oracle::R(h, s + eps, s) - oracle::R(h, s, s), oracle::R(h, s + eps, t) - oracle::R(h, s, t);
      cv << oracle::R(h, t + delta, s) - oracle::R(h, t, s), oracle::R(h, t + delta, t) - oracle::R(h, t, t);
      const Eigen::Vector2d a = sig.ldlt().solve(cu), b = sig.ldlt().solve(cv);
      EXPECT_NEAR(l.c11, a(0), 1e-9 * (1 + std::abs(a(0))));
      EXPECT_NEAR(l.c12, a(1), 1e-9 * (1 + std::abs(a(1))));
      EXPECT_NEAR(l.c21, b(0), 1e-9 * (1 + std::abs(b(0))));
      EXPECT_NEAR(l.c22, b(1), 1e-9 * (1 + std::abs(b(1))));
    }
  }
}

TEST(Regression, LambdaLimitIsDerivativeRegression) {
  for (double h : {0.6, 0.75, 0.9}) {
    const HurstModel m(h);
    const auto l = lambda_limit(m, 0.3, 0.7);
    const auto ref = oracle::limit(h, 0.3, 0.7);
    EXPECT_NEAR(l.c11, ref.a(0), 1e-12);
    EXPECT_NEAR(l.c12, ref.a(1), 1e-12);
    EXPECT_NEAR(l.c21, ref.b(0), 1e-12);
    EXPECT_NEAR(l.c22, ref.b(1), 1e-12);
    // the finite weights approach the limit at rate eps^(2H-1)
    const auto f = lambda_finite(m, 1e-6, 1e-6, 0.3, 0.7);
    EXPECT_NEAR(f.c11 / 1e-6, l.c11, 100 * std::pow(1e-6, 2 * h - 1));
    EXPECT_NEAR(f.c22 / 1e-6, l.c22, 100 * std::pow(1e-6, 2 * h - 1));
  }
}

TEST(Regression, EtaAndLambdaAgree) {
  for (double h : {0.6, 0.75, 0.9}) {
    const HurstModel m(h);
    for (auto [s, t] : {std::pair{0.3, 0.7}, {0.01, 0.9}, {0.5, 0.5001}}) {
      // c11 B_s + c12 B_{s,t} = (c11 - c12) B_s + c12 B_t
      const auto e = eta_limit(m, s, t);
      const auto l = lambda_limit(m, s, t);
      const double scale = 1 + std::abs(l.c11) + std::abs(l.c12);
      EXPECT_NEAR(e.c11 - e.c12, l.c11, 1e-9 * scale);
      EXPECT_NEAR(e.c12, l.c12, 1e-9 * scale);
      EXPECT_NEAR(e.c21 - e.c22, l.c21, 1e-9 * scale);
      EXPECT_NEAR(e.c22, l.c22, 1e-9 * scale);

      const auto ef = eta_finite(m, 1e-3, 1e-3, s, t);
      const auto lf = lambda_finite(m, 1e-3, 1e-3, s, t);
      EXPECT_NEAR(ef.c11 - ef.c12, lf.c11, 1e-8);
      EXPECT_NEAR(ef.c22, lf.c22, 1e-8);

      const double theta = theta_det(m, s, t);
      const auto u = eta_limit_unnormalized(m, s, t);
      EXPECT_NEAR(u.c12 / theta, e.c12, 1e-9 * (1 + std::abs(e.c12)));
    }
  }
}

TEST(Kernel, FiniteKernelMatchesConditionalExpectation) {
  for (double h : {0.6, 0.75, 0.9}) {
    const HurstModel m(h);
    for (auto [s, t] : {std::pair{0.3, 0.7}, {0.7, 0.3}, {0.2, 0.25}}) {
      const auto p = SimplexPoint::from_times(s, t);
      for (auto [x, y] : {std::pair{0.4, -1.1}, {1.3, 2.0}, {-0.2, 0.0}}) {
        const double ref = oracle::lambda_minus(h, 0.01, 0.02, s, t, x, y);
        const double got = Lambda_finite(m, 0.01, 0.02, p, scalar_pair(x, y)).entries(0, 0);
        const double alt = Lambda_finite_lambda(m, 0.01, 0.02, p, scalar_pair(x, y)).entries(0, 0);
        EXPECT_NEAR(got, ref, 1e-7 * (1 + std::abs(ref)));
        EXPECT_NEAR(alt, ref, 1e-7 * (1 + std::abs(ref)));
      }
    }
  }
}

TEST(Kernel, LimitKernelMatchesOracle) {
  for (double h : {0.6, 0.75, 0.9}) {
    const HurstModel m(h);
    for (auto [s, t] : {std::pair{0.3, 0.7}, {0.9, 0.1}}) {
      const auto p = SimplexPoint::from_times(s, t);
      const double ref = oracle::lambda(h, s, t, 0.8, -0.5);
      EXPECT_NEAR(Lambda_kernel(m, p, scalar_pair(0.8, -0.5)).entries(0, 0), ref, 1e-10 * (1 + std::abs(ref)));
    }
  }
}

TEST(Kernel, WKernelTwoRepresentationsAgree) {
  const HurstModel m(0.75, 3);
  const auto p = SimplexPoint::from_times(0.3, 0.7);
  const auto x = sample_pair(m, p, 5, 11);
  for (const auto& xi : x) {
    const auto w1 = W_kernel(m, p, xi).entries;
    const auto w2 = W_kernel_lambda(m, p, xi).entries;
    EXPECT_LT((w1 - w2).cwiseAbs().maxCoeff(), 1e-10);
    // Lambda = W + d2R on the diagonal only
    const auto l = Lambda_kernel(m, p, xi).entries;
    const Eigen::MatrixXd diff = l - w1;
    EXPECT_NEAR(diff(1, 1), d2R_dsdt(m, 0.3, 0.7), 1e-10);
    EXPECT_NEAR(diff(0, 2), 0.0, 1e-12);
  }
}

TEST(Kernel, SwappingTheTimesTransposes) {
  const HurstModel m(0.6, 2);
  const auto p = SimplexPoint::from_times(0.2, 0.9);
  for (const auto& x : sample_pair(m, p, 4, 3)) {
    PairSample y{x.b_t, x.b_s};
    const auto a = Lambda_kernel(m, p, x).entries;
    const auto b = Lambda_kernel(m, p.swapped(), y).entries;
    EXPECT_LT((a - b.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    const auto af = Lambda_finite(m, 0.01, 0.01, p, x).entries;
    const auto bf = Lambda_finite(m, 0.01, 0.01, p.swapped(), y).entries;
    EXPECT_LT((af - bf.transpose()).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(Kernel, WIsCentered) {
  const HurstModel m(0.75, 2);
  const auto p = SimplexPoint::from_times(0.3, 0.7);
  const std::size_t n = 200000;
  const auto x = sample_pair(m, p, n, 5);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(2, 2), sq = Eigen::MatrixXd::Zero(2, 2);
  for (const auto& xi : x) {
    const auto w = W_kernel(m, p, xi).entries;
    sum += w;
    sq += w.cwiseProduct(w);
  }
  const Eigen::MatrixXd mean = sum / double(n);
  const Eigen::MatrixXd se = ((sq / double(n) - mean.cwiseProduct(mean)) / double(n)).cwiseSqrt();
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) EXPECT_LT(std::abs(mean(i, j)), 4 * se(i, j)) << i << j;
  }
}

TEST(Kernel, FlagsOverlappingIncrements) {
  const HurstModel m(0.75);
  const auto p = SimplexPoint::from_times(0.3, 0.35);
  EXPECT_TRUE(Lambda_finite(m, 0.1, 0.01, p, scalar_pair(0.1, 0.2)).scale_overlap);
  EXPECT_FALSE(Lambda_finite(m, 0.01, 0.01, p, scalar_pair(0.1, 0.2)).scale_overlap);
}

TEST(Kernel, DeterministicCrossTermIsSecondDifference) {
  for (double h : {0.6, 0.75, 0.9}) {
    const HurstModel m(h);
    const double e = 0.01, d = 0.02, s = 0.3, t = 0.7;
    const double ref =
        (oracle::R(h, s + e, t + d) - oracle::R(h, s + e, t) - oracle::R(h, s, t + d) + oracle::R(h, s, t)) / (e * d);
    EXPECT_NEAR(det_cross(m, e, d, s, t), ref, 1e-9 * std::abs(ref));
    EXPECT_NEAR(det_cross_gap(m, e, d, t - s), ref, 1e-9 * std::abs(ref));
    EXPECT_NEAR(det_cross(m, 1e-7, 1e-7, s, t), d2R_dsdt(m, s, t), 1e-5);
  }
}

TEST(Kernel, FiniteKernelAgreesWithLocalRegressionOnSimulatedQuadruples) {
  // Simulate (B_s, B_t, B_{s,s+eps}, B_{t,t+delta}) jointly and average the
  // increment product over draws whose (B_s, B_t) fall near (x, y), with a
  // Gaussian weight of bandwidth 0.05 sqrt(v(s)).
  const double h = 0.75, s = 0.3, t = 0.7, eps = 0.1, delta = 0.1;
  const double times[4] = {s, t, s + eps, t + delta};
  Eigen::Matrix4d cov;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) cov(i, j) = oracle::R(h, times[i], times[j]);
  }
  const Eigen::Matrix4d L = cov.llt().matrixL();
  const double x = 0.3, y = 0.5;
  const double bw = 0.05 * std::sqrt(std::pow(s, 2 * h));
  NormalStream z(2024, 0);
  double sw = 0, swf = 0, swf2 = 0, sw2 = 0;
  for (int k = 0; k < 1000000; ++k) {
    Eigen::Vector4d g;
    for (int i = 0; i < 4; ++i) g(i) = z.next();
    const Eigen::Vector4d b = L * g;
    const double dx = (b(0) - x) / bw, dy = (b(1) - y) / bw;
    const double w = std::exp(-0.5 * (dx * dx + dy * dy));
    if (w < 1e-12) continue;
    const double f = (b(2) - b(0)) * (b(3) - b(1)) / (eps * delta);
    sw += w;
    sw2 += w * w;
    swf += w * f;
    swf2 += w * f * f;
  }
  const double mean = swf / sw;
  const double var = swf2 / sw - mean * mean;
  const double se = std::sqrt(var * sw2) / sw;
  const double ref = Lambda_finite(HurstModel(h), eps, delta, SimplexPoint::from_times(s, t), scalar_pair(x, y))
                         .entries(0, 0);
  EXPECT_NEAR(mean, ref, 4 * se) << "se " << se;
}
