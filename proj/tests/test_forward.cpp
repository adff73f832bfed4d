#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "fbmiso/forward.hpp"
#include "fbmiso/stats.hpp"

using namespace fbmiso;

namespace {

FbmPath deterministic_path(std::size_t n, double dt, double (*f)(double)) {
  FbmPath p;
  p.grid = uniform_grid(n, dt);
  p.values.resize(static_cast<Eigen::Index>(n + 1), 1);
  for (std::size_t k = 0; k <= n; ++k) p.values(static_cast<Eigen::Index>(k), 0) = f(p.grid[k]);
  return p;
}

}  // namespace

TEST(Forward, LinearPathConstantIntegrand) {
  const auto path = deterministic_path(2000, 1e-3, [](double t) { return 3.0 * t; });
  const auto one = make_integrand("constant:1", 1);
  EXPECT_NEAR(forward_approx(path, one, 0.05, 1.0), 3.0, 1e-12);
  EXPECT_NEAR(forward_approx(path, one, 0.05, 1.0, TimeRule::LeftPoint), 3.0, 1e-12);
}

TEST(Forward, QuadraticPathIdentityIntegrand) {
  // (1/eps) int_0^T s^2 ((s+eps)^2 - s^2) ds = T^4/2 + eps T^3/3
  const auto path = deterministic_path(4000, 5e-4, [](double t) { return t * t; });
  const auto id = make_integrand("identity", 1);
  const double eps = 0.02;
  EXPECT_NEAR(forward_approx(path, id, eps, 1.0), 0.5 + eps / 3.0, 1e-6);
  std::vector<double> part;
  for (int k = 0; k <= 1000; ++k) part.push_back(k * 1e-3);
  EXPECT_NEAR(riemann_sum(path, id, part), 0.5, 1e-3);
}

TEST(Forward, RejectsBadArguments) {
  const auto path = deterministic_path(100, 0.01, [](double t) { return t; });
  const auto one = make_integrand("constant:1", 1);
  EXPECT_THROW(forward_approx(path, one, 0.005, 0.5), std::invalid_argument);  // eps below two steps
  EXPECT_THROW(forward_approx(path, one, 0.05, 0.99), std::invalid_argument);  // T + eps beyond the grid
  EXPECT_THROW(forward_approx(path, make_integrand("identity", 2), 0.05, 0.5), std::invalid_argument);
  EXPECT_THROW(riemann_sum(path, one, {0.0, 0.005}), std::invalid_argument);
}

TEST(Integrand, Descriptors) {
  const auto c = make_integrand("constant:1,2", 2);
  EXPECT_TRUE(c.is_constant());
  EXPECT_EQ(c(0.3, Eigen::Vector2d(5, 6)), Eigen::Vector2d(1, 2));
  const auto s = make_integrand("sign", 2);
  EXPECT_TRUE(s.jump_at_zero());
  EXPECT_EQ(s(0.1, Eigen::Vector2d(-0.3, 0.0)), Eigen::Vector2d(-1, 0));
  EXPECT_EQ(make_integrand("identity", 1).degree(), 1);
  EXPECT_THROW(make_integrand("cosine", 1), std::invalid_argument);
  EXPECT_THROW(make_integrand("constant:1,2", 3), std::invalid_argument);
}

TEST(Stats, JackknifeWithUnitBlocksIsClassicalError) {
  std::vector<double> x(1000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(1.7 * i) + 0.01 * i;
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const auto est = jackknife_mean(x, 1, 3);
  EXPECT_NEAR(est.value, mean, 1e-12);
  EXPECT_NEAR(est.std_error, std::sqrt(ss / (n - 1) / n), 1e-12);
  EXPECT_EQ(est.n_samples, x.size());
  EXPECT_EQ(est.seed, 3u);
}

TEST(Stats, ExtrapolationIsExactOnModelFunctions) {
  const std::vector<double> xs{0.1, 0.05, 0.025, 0.0125, 0.00625};
  const std::vector<double> ex{0.5, 1.0};
  std::vector<double> f;
  for (double x : xs) f.push_back(2.0 - 3.0 * std::sqrt(x) + 5.0 * x);
  const auto w = extrapolation_weights(xs, ex);
  ASSERT_EQ(w.size(), xs.size());
  EXPECT_NEAR(std::inner_product(w.begin(), w.end(), f.begin(), 0.0), 2.0, 1e-10);
  EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
}

TEST(Stats, LogLogSlope) {
  const std::vector<double> x{0.1, 0.01, 0.001};
  const std::vector<double> y{2 * std::pow(0.1, 1.3), 2 * std::pow(0.01, 1.3), 2 * std::pow(0.001, 1.3)};
  EXPECT_NEAR(loglog_slope(x, y), 1.3, 1e-12);
}

TEST(Forward, LadderReplaysAndMatchesClosedForm) {
  const HurstModel m(0.75);
  const auto one = make_integrand("constant:1", 1);
  LadderOptions opt;
  opt.eps_ladder = {0.0625, 0.03125, 0.015625};
  opt.n_paths = 20000;
  opt.seed = 12;
  opt.workers = 2;
  const auto a = second_moment_ladder(m, one, opt);
  opt.workers = 5;
  const auto b = second_moment_ladder(m, one, opt);
  EXPECT_EQ(a.extrapolated.value, b.extrapolated.value);
  EXPECT_EQ(a.moments[1].value, b.moments[1].value);
  // E[B_1^2] = 1
  EXPECT_NEAR(a.extrapolated.value, 1.0, 4 * a.extrapolated.std_error);
  EXPECT_GT(a.extrapolated.std_error, 0.0);
}
