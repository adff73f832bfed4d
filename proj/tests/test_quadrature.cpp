#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "fbmiso/quadrature.hpp"
#include "oracles.hpp"

using namespace fbmiso;

TEST(GaussRules, HermiteMoments) {
  for (int n : {8, 24}) {
    const auto r = gauss_hermite(n);
    double m0 = 0, m2 = 0, m4 = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      m0 += r.w[i];
      m2 += r.w[i] * r.x[i] * r.x[i];
      m4 += r.w[i] * std::pow(r.x[i], 4);
    }
    EXPECT_NEAR(m0, 1.0, 1e-13);
    EXPECT_NEAR(m2, 1.0, 1e-12);
    EXPECT_NEAR(m4, 3.0, 1e-11);
  }
}

TEST(GaussRules, LegendreAndComposite) {
  const auto r = gauss_legendre(6, 0.0, 2.0);
  double s = 0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r.w[i] * std::pow(r.x[i], 11);
  EXPECT_NEAR(s, std::pow(2.0, 12) / 12, 1e-9);
  const auto bp = geometric_breakpoints(0.0, 1.0, 0.15, 5, 3);
  EXPECT_EQ(bp.front(), 0.0);
  EXPECT_EQ(bp.back(), 1.0);
  EXPECT_NEAR(bp[1], std::pow(0.15, 5), 1e-18);
  const auto c = composite_rule(bp, 8);
  double sq = 0;
  for (std::size_t i = 0; i < c.size(); ++i) sq += c.w[i] * std::sqrt(c.x[i]);
  EXPECT_NEAR(sq, 2.0 / 3.0, 1e-6);
}

TEST(GaussRules, PolarSplitIsExactForSignTimesPolynomial) {
  const auto r = polar_split_rule({Eigen::Vector2d(1, 0), Eigen::Vector2d(0.6, 0.8)}, 16, 12);
  double w = 0, abs1 = 0, mixed = 0;
  for (std::size_t i = 0; i < r.w.size(); ++i) {
    w += r.w[i];
    abs1 += r.w[i] * std::abs(r.z1[i]);
    const double a = 0.6 * r.z1[i] + 0.8 * r.z2[i];
    mixed += r.w[i] * (a > 0 ? 1.0 : -1.0) * a * r.z1[i] * r.z1[i];
  }
  EXPECT_NEAR(w, 1.0, 1e-13);
  EXPECT_NEAR(abs1, std::sqrt(2 / std::numbers::pi), 1e-12);
  // E|a| z1^2 with a = 0.6 z1 + 0.8 z2: write z1 = 0.6 a + 0.8 b, so E|a|(0.36 a^2 + 0.64)
  const double ea = std::sqrt(2 / std::numbers::pi);
  EXPECT_NEAR(mixed, 0.36 * 2 * ea + 0.64 * ea, 1e-12);
}

TEST(Pointwise, HermiteOrderDoesNotMatterForPolynomials) {
  const HurstModel m(0.75, 2);
  const auto y = make_integrand("identity", 2);
  const auto f = limit_form(m, SimplexPoint::from_times(0.3, 0.7));
  const double a = pointwise_F_tensor(m, y, f, 8, 10000000);
  const double b = pointwise_F_tensor(m, y, f, 32, 10000000);
  EXPECT_NEAR(a, b, 1e-11 * std::abs(b));
  QuadratureSpec spec;
  EXPECT_NEAR(pointwise_F_form(m, y, f, spec), b, 1e-11 * std::abs(b));
}

TEST(Pointwise, IdentityMatchesIsserlis) {
  for (double h : {0.6, 0.75, 0.9}) {
    const HurstModel m(h);
    const auto y = make_integrand("identity", 1);
    QuadratureSpec spec;
    for (auto [s, t] : {std::pair{0.3, 0.7}, {0.7, 0.3}, {1e-4, 0.5}, {0.5, 0.5 + 1e-5}}) {
      const double ref = oracle::identity_pointwise(h, std::min(s, t), std::max(s, t));
      EXPECT_NEAR(pointwise_F(m, y, SimplexPoint::from_times(s, t), spec), ref, 1e-8 * std::abs(ref)) << h << " " << s;
    }
  }
}

TEST(Pointwise, ConstantSeesOnlyTheShift) {
  const HurstModel m(0.6, 2);
  QuadratureSpec spec;
  const auto p = SimplexPoint::from_times(0.2, 0.45);
  EXPECT_NEAR(pointwise_F(m, make_integrand("constant:1,2", 2), p, spec), 5 * d2R_dsdt(m, 0.2, 0.45), 1e-10);
}

TEST(Isometry, ConstantAndIdentityClosedForms) {
  QuadratureSpec spec;
  for (double h : {0.6, 0.9}) {
    const HurstModel m(h);
    const auto c = rhs_isometry(m, make_integrand("constant:2", 1), 1.5, spec);
    EXPECT_TRUE(c.converged);
    EXPECT_NEAR(c.value, 4 * std::pow(1.5, 2 * h), 1e-6);
    const auto id = rhs_isometry(m, make_integrand("identity", 1), 1.0, spec);
    EXPECT_NEAR(id.value, 0.75, 1e-6);
  }
  // (d^2 + 2d) / 4 at T = 1
  const HurstModel m2(0.75, 2);
  EXPECT_NEAR(rhs_isometry(m2, make_integrand("identity", 2), 1.0, spec).value, 2.0, 1e-5);
}

TEST(Isometry, FullSquareMatchesDoubledSimplex) {
  QuadratureSpec spec;
  spec.refinements = 1;
  const HurstModel m(0.75);
  const auto y = make_integrand("identity", 1);
  const auto a = rhs_isometry(m, y, 1.0, spec);
  const auto b = rhs_isometry_full_square(m, y, 1.0, spec);
  EXPECT_NEAR(a.value, b.value, 1e-7);
}

TEST(Isometry, RkhsNormClosedForms) {
  QuadratureSpec spec;
  for (double h : {0.6, 0.75, 0.9}) {
    const HurstModel m(h);
    const double T = 1.5;
    const auto one = rkhs_norm_squared(m, [](double) { return Eigen::VectorXd::Ones(1); }, T, spec);
    EXPECT_NEAR(one.value, std::pow(T, 2 * h), 1e-6);
    // Var(T B_T - int_0^T B_t dt) = T^(2H+2) / (2H+2)
    const auto lin = rkhs_norm_squared(m, [](double t) { return Eigen::VectorXd::Constant(1, t); }, T, spec);
    EXPECT_NEAR(lin.value, std::pow(T, 2 * h + 2) / (2 * h + 2), 1e-6);
  }
}

TEST(AbsMoment, ClosedForms) {
  Eigen::Matrix2d e1 = Eigen::Matrix2d::Zero();
  e1(0, 0) = 1;
  EXPECT_NEAR(abs_moment_quadratic(e1, 0.0, 1.0), 1.0, 1e-10);
  EXPECT_NEAR(abs_moment_quadratic(e1, 0.0, 2.0), 3.0, 1e-9);
  // E|Z^2 - 1| = 4 phi(1)
  EXPECT_NEAR(abs_moment_quadratic(e1, -1.0, 1.0), 4 * std::exp(-0.5) / std::sqrt(2 * std::numbers::pi), 1e-9);
  Eigen::Matrix2d off;
  off << 0, 0.5, 0.5, 0;
  EXPECT_NEAR(abs_moment_quadratic(off, 0.0, 2.0), 1.0, 1e-9);
  // |z|^2 is twice a unit exponential
  const Eigen::Matrix2d id = Eigen::Matrix2d::Identity();
  EXPECT_NEAR(abs_moment_quadratic(id, 0.0, 1.5), std::pow(2.0, 1.5) * std::tgamma(2.5), 1e-9);
  EXPECT_NEAR(abs_moment_quadratic(id, -2.0, 1.0), 4 / std::exp(1.0), 1e-9);
}

TEST(LqNorm, SecondMomentMatchesIsserlis) {
  QuadratureSpec spec;
  for (double h : {0.6, 0.75, 0.9}) {
    const HurstModel m(h);
    for (auto [s, t] : {std::pair{0.3, 0.5}, {0.05, 0.9}}) {
      const auto est = lq_norm_Lambda(m, SimplexPoint::from_times(s, t), 2.0, spec);
      EXPECT_TRUE(est.converged);
      EXPECT_NEAR(est.value, oracle::lambda_l2(h, s, t), 1e-8 * est.value);
    }
  }
}

TEST(LqNorm, FrobeniusInHigherDimension) {
  // For q = 2 the Frobenius moment factorises over entries.
  QuadratureSpec spec;
  spec.gh_order = 16;
  const HurstModel m(0.75, 2);
  const auto l = oracle::limit(0.75, 0.3, 0.5);
  const double pp = l.a.dot(l.sigma * l.a), qq = l.b.dot(l.sigma * l.b), pq = l.a.dot(l.sigma * l.b);
  const double diag = pp * qq + pq * pq + l.c * l.c;
  const double off = pp * qq;
  const auto est = lq_norm_Lambda(m, SimplexPoint::from_times(0.3, 0.5), 2.0, spec);
  EXPECT_NEAR(est.value, std::sqrt(2 * diag + 2 * off), 1e-8);
}

TEST(Mesh, SimplexAreaIsExact) {
  const HurstModel m(0.75);
  QuadratureSpec spec;
  for (int level : {0, 1}) {
    const auto mesh = simplex_mesh(m, 2.0, spec, level);
    double area = 0;
    for (std::size_t i = 0; i < mesh.gap.size(); ++i) {
      for (std::size_t j = 0; j < mesh.w.size(); ++j) area += mesh.gap.w[i] * mesh.w.w[j] * (2.0 - mesh.gap.x[i]);
    }
    EXPECT_NEAR(area, 2.0, 1e-8);
    EXPECT_GT(mesh.gap_inner, 0.0);
  }
}

TEST(Deterministic, DistanceShrinksWithEps) {
  QuadratureSpec spec;
  const HurstModel m(0.75);
  const auto a = det_distance(m, 1e-1, 1e-1, 1.0, 1.0, spec);
  const auto b = det_distance(m, 1e-2, 1e-2, 1.0, 1.0, spec);
  EXPECT_TRUE(a.converged && b.converged);
  EXPECT_LT(b.value, a.value);
  EXPECT_GT(b.value, 0.0);
  EXPECT_THROW(det_distance(m, 1e-2, 1e-2, 3.0, 1.0, spec), std::invalid_argument);
}

TEST(Spec, Validation) {
  QuadratureSpec spec;
  EXPECT_NO_THROW(spec.validate());
  spec.grading_ratio = 1.2;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
  spec = QuadratureSpec{};
  spec.gh_order = 0;
  EXPECT_THROW(spec.validate(), std::invalid_argument);
}
