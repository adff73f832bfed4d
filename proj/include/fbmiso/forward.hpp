#pragma once

#include <cstdint>
#include <vector>

#include "fbmiso/integrand.hpp"
#include "fbmiso/model.hpp"
#include "fbmiso/sampler.hpp"
#include "fbmiso/stats.hpp"

namespace fbmiso {

enum class TimeRule { Trapezoid, LeftPoint };
enum class SamplerChoice { Circulant, Cholesky };

/// (1/eps) int_0^T <g(s,B_s), B_{s,s+eps}> ds on a uniform path grid.  eps is
/// snapped to the nearest multiple of the grid step.
double forward_approx(const FbmPath& path, const Integrand& y, double eps, double T,
                      TimeRule rule = TimeRule::Trapezoid);

/// Left-point sum of <g(t_i, B_{t_i}), B_{t_i,t_{i+1}}> over a partition drawn from the path grid.
double riemann_sum(const FbmPath& path, const Integrand& y, const std::vector<double>& partition);

struct LadderOptions {
  std::vector<double> eps_ladder;  // strictly decreasing
  double T = 1.0;
  double dt = 0.0;  // 0: T / ceil(4 T / min eps)
  std::size_t n_paths = 100000;
  std::uint64_t seed = 1;
  int workers = 0;
  SamplerChoice sampler = SamplerChoice::Circulant;
  TimeRule rule = TimeRule::Trapezoid;
  std::vector<double> exponents;  // empty: default_extrapolation_exponents
  std::size_t block = 100;
};

struct LadderResult {
  std::vector<double> eps;  // after snapping to the grid
  std::vector<EstimateWithCI> moments;
  EstimateWithCI extrapolated;
  std::vector<double> exponents;
  std::vector<double> weights;
  double dt = 0.0;
};

/// Powers of eps used to extrapolate E[I(eps)^2] to eps = 0.  Constants carry
/// an O(eps) + O(eps^2H) bias; other integrands also carry eps^(2H-1) and
/// eps^(4H-2) terms.
std::vector<double> default_extrapolation_exponents(const HurstModel& m, const Integrand& y);

/// Monte Carlo E[I(eps)^2] along the ladder with common random numbers, plus
/// the extrapolated value.  The extrapolation is applied path by path, so the
/// jackknife error of the extrapolated value accounts for the correlation
/// between ladder points.
LadderResult second_moment_ladder(const HurstModel& m, const Integrand& y, const LadderOptions& opt);

/// Monte Carlo E[I(eps)^2] at a single eps.
EstimateWithCI second_moment(const HurstModel& m, const Integrand& y, double eps, double T, std::size_t n_paths,
                             std::uint64_t seed, SamplerChoice sampler = SamplerChoice::Circulant, int workers = 0);

}  // namespace fbmiso
