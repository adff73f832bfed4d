#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fbmiso {

struct EstimateWithCI {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
};

/// Mean of `x` with a leave-one-block-out jackknife standard error.
/// A trailing partial block is merged into the last full block.
EstimateWithCI jackknife_mean(std::span<const double> x, std::size_t block = 100, std::uint64_t seed = 0);

/// Weights w with sum_k w_k f(x_k) equal to the intercept of the least-squares
/// fit f(x) ~ c_0 + sum_j c_j x^{e_j} over the given exponents (0 is implied
/// and duplicates are dropped).
std::vector<double> extrapolation_weights(std::span<const double> x, std::span<const double> exponents);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace fbmiso
