#include "fbmiso/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "fbmiso/parallel.hpp"

namespace fbmiso {

EstimateWithCI jackknife_mean(std::span<const double> x, std::size_t block, std::uint64_t seed) {
  const std::size_t n = x.size();
  if (n < 2) throw std::invalid_argument("need at least two samples");
  if (block == 0) block = 1;
  std::size_t nb = n / block;
  if (nb < 2) {
    block = 1;
    nb = n;
  }
  std::vector<double> sums(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t lo = b * block;
    const std::size_t hi = b + 1 == nb ? n : lo + block;
    sums[b] = pairwise_sum(x.subspan(lo, hi - lo));
  }
  const double total = pairwise_sum(sums);
  const double mean = total / static_cast<double>(n);
  std::vector<double> dev(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t lo = b * block;
    const std::size_t size = (b + 1 == nb ? n : lo + block) - lo;
    const double loo = (total - sums[b]) / static_cast<double>(n - size);
    dev[b] = (loo - mean) * (loo - mean);
  }
  const double var = static_cast<double>(nb - 1) / static_cast<double>(nb) * pairwise_sum(dev);
  return {mean, std::sqrt(var), n, seed};
}

std::vector<double> extrapolation_weights(std::span<const double> x, std::span<const double> exponents) {
  std::vector<double> ex{0.0};
  for (double e : exponents) {
    if (!(e >= 0.0)) throw std::invalid_argument("extrapolation exponents must be nonnegative");
    if (std::none_of(ex.begin(), ex.end(), [e](double f) { return std::abs(e - f) < 1e-9; })) ex.push_back(e);
  }
  const auto k = static_cast<Eigen::Index>(x.size());
  const auto p = static_cast<Eigen::Index>(ex.size());
  if (k < p) throw std::invalid_argument("too few ladder points for the extrapolation basis");
  Eigen::MatrixXd a(k, p);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(x[static_cast<std::size_t>(i)] > 0.0)) throw std::invalid_argument("ladder values must be positive");
    for (Eigen::Index j = 0; j < p; ++j) a(i, j) = std::pow(x[static_cast<std::size_t>(i)], ex[static_cast<std::size_t>(j)]);
  }
  // intercept row of the pseudo-inverse
  const Eigen::MatrixXd pinv = a.completeOrthogonalDecomposition().pseudoInverse();
  std::vector<double> w(x.size());
  for (Eigen::Index i = 0; i < k; ++i) w[static_cast<std::size_t>(i)] = pinv(0, i);
  return w;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope needs matching samples");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::domain_error("log-log slope needs positive data");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace fbmiso
