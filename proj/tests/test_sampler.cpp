#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "fbmiso/rng.hpp"
#include "fbmiso/sampler.hpp"
#include "oracles.hpp"

using namespace fbmiso;

TEST(Philox, KnownAnswers) {
  using B = Philox4x32::Block;
  EXPECT_EQ(Philox4x32::generate({0, 0, 0, 0}, {0, 0}), (B{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(Philox4x32::generate({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (B{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(Philox4x32::generate({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (B{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(Streams, NormalMoments) {
  NormalStream z(42, 7);
  const int n = 400000;
  double s1 = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double v = z.next();
    s1 += v;
    s2 += v * v;
    s4 += v * v * v * v;
  }
  EXPECT_NEAR(s1 / n, 0.0, 4 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 4 * std::sqrt(2.0 / n));
  EXPECT_NEAR(s4 / n, 3.0, 4 * std::sqrt(96.0 / n));
}

TEST(Streams, SubstreamsDiffer) {
  NormalStream a(1, 0), b(1, 1), c(2, 0), a2(1, 0);
  const double va = a.next();
  EXPECT_NE(va, b.next());
  EXPECT_NE(va, c.next());
  EXPECT_EQ(va, a2.next());
  UniformStream u(3, 0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.next();
    EXPECT_GT(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
}

namespace {

// Checks the sample covariance of B on the grid against R within `k` standard errors.
void expect_grid_covariance(const PathSampler& sampler, const HurstModel& m, std::size_t units, double k) {
  const auto& g = sampler.grid();
  const std::size_t n = g.size();
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n), sq = Eigen::MatrixXd::Zero(n, n);
  std::size_t count = 0;
  for (std::size_t u = 0; u < units; ++u) {
    for (const auto& p : sampler.sample_two(9, u)) {
      for (int c = 0; c < m.dim(); ++c) {
        const Eigen::VectorXd x = p.values.col(c);
        const Eigen::MatrixXd prod = x * x.transpose();
        sum += prod;
        sq += prod.cwiseProduct(prod);
        ++count;
      }
    }
  }
  const double cnt = static_cast<double>(count);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      if (g[i] == 0.0 || g[j] == 0.0) continue;
      const double mean = sum(i, j) / cnt;
      const double se = std::sqrt((sq(i, j) / cnt - mean * mean) / cnt);
      EXPECT_NEAR(mean, oracle::R(m.h(), g[i], g[j]), k * se) << sampler.name() << " " << g[i] << " " << g[j];
    }
  }
}

}  // namespace

TEST(Sampler, CirculantCovariance) {
  const HurstModel m(0.75, 2);
  CirculantSampler s(m, 16, 1.0 / 16);
  EXPECT_FALSE(s.fell_back());
  expect_grid_covariance(s, m, 10000, 5.0);
}

TEST(Sampler, CholeskyCovariance) {
  const HurstModel m(0.6);
  std::vector<double> grid{0.05, 0.1, 0.3, 0.31, 0.7, 1.0};
  CholeskySampler s(m, grid);
  expect_grid_covariance(s, m, 10000, 5.0);
}

TEST(Sampler, PathsAreReproducibleAndStartAtZero) {
  const HurstModel m(0.9, 2);
  CirculantSampler s(m, 64, 1.0 / 64);
  const auto a = s.sample(5, 17);
  const auto b = s.sample(5, 17);
  const auto c = s.sample(5, 16);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
  EXPECT_EQ(a.values.row(0).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(a.values.rows(), 65);
  const auto pair = s.sample_two(5, 8);
  EXPECT_EQ(pair[1].values, a.values);
  EXPECT_EQ(pair[0].values, c.values);
}

TEST(Sampler, HelpersAgreeWithClasses) {
  const HurstModel m(0.75);
  const auto a = sample_path_circulant(m, 32, 1.0 / 32, 4, 3);
  EXPECT_EQ(a.values, CirculantSampler(m, 32, 1.0 / 32).sample(4, 3).values);
  const auto grid = uniform_grid(8, 0.125);
  const auto b = sample_path_cholesky(m, grid, 4, 3);
  EXPECT_EQ(b.values, CholeskySampler(m, grid).sample(4, 3).values);
}

TEST(Sampler, CholeskyRejectsOversizedGrid) {
  const HurstModel m(0.75);
  EXPECT_THROW(CholeskySampler(m, uniform_grid(CholeskySampler::kMaxPoints + 1, 1e-3)), std::invalid_argument);
}

TEST(Sampler, PairStreamLaw) {
  const HurstModel m(0.75, 1);
  const auto p = SimplexPoint::from_times(0.3, 0.7);
  const auto law = pair_law(m, p);
  EXPECT_NEAR(law.sigma(0, 1), oracle::R(0.75, 0.3, 0.7), 1e-14);
  const auto x = sample_pair(m, p, 200000, 8);
  double ss = 0, st = 0, tt = 0;
  for (const auto& xi : x) {
    ss += xi.b_s(0) * xi.b_s(0);
    st += xi.b_s(0) * xi.b_t(0);
    tt += xi.b_t(0) * xi.b_t(0);
  }
  const double n = 200000;
  EXPECT_NEAR(ss / n, law.sigma(0, 0), 4 * std::sqrt(2.0 / n) * law.sigma(0, 0));
  EXPECT_NEAR(tt / n, law.sigma(1, 1), 4 * std::sqrt(2.0 / n) * law.sigma(1, 1));
  EXPECT_NEAR(st / n, law.sigma(0, 1), 4 * std::sqrt(2.0 / n) * law.sigma(1, 1));

  // the swapped point draws (B_s, B_t) with s the later time
  const auto y = sample_pair(m, p.swapped(), 1, 8).front();
  EXPECT_EQ(y.b_s(0), x.front().b_t(0));
  EXPECT_EQ(y.b_t(0), x.front().b_s(0));
}

TEST(Sampler, BinaryDumpRoundTrip) {
  const HurstModel m(0.6, 3);
  const auto path = sample_path_circulant(m, 10, 0.1, 77, 2);
  std::stringstream io;
  write_path_binary(io, path, m.h(), 0.1);
  EXPECT_EQ(io.str().size(), 5 * 8 + 11 * 3 * 8u);
  const auto dump = read_path_binary(io);
  EXPECT_EQ(dump.h, 0.6);
  EXPECT_EQ(dump.d, 3u);
  EXPECT_EQ(dump.n, 10u);
  EXPECT_EQ(dump.dt, 0.1);
  EXPECT_EQ(dump.seed, 77u);
  EXPECT_EQ(dump.values, path.values);

  std::stringstream truncated(io.str().substr(0, 60));
  EXPECT_THROW(read_path_binary(truncated), std::runtime_error);
}
