#include "fbmiso/forward.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "fbmiso/parallel.hpp"

namespace fbmiso {

namespace {

double uniform_step(const FbmPath& path) {
  if (path.grid.size() < 2) throw std::invalid_argument("path grid too short");
  const double dt = path.grid[1] - path.grid[0];
  const double last = path.grid.back() - path.grid.front();
  if (std::abs(last - dt * static_cast<double>(path.grid.size() - 1)) > 1e-9 * last) {
    throw std::invalid_argument("forward approximation needs a uniform grid");
  }
  return dt;
}

std::size_t steps_for(double length, double dt, const char* what) {
  const double k = length / dt;
  const double rounded = std::round(k);
  if (std::abs(k - rounded) > 1e-6) throw std::invalid_argument(std::string(what) + " is not a multiple of the grid step");
  return static_cast<std::size_t>(rounded);
}

std::size_t snap_eps(double eps, double dt) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  const auto m = static_cast<std::size_t>(std::llround(eps / dt));
  if (m < 2) throw std::invalid_argument("grid too coarse: eps must be at least two grid steps");
  const double snapped = static_cast<double>(m) * dt;
  if (std::abs(snapped - eps) > 1e-12 * eps) spdlog::info("eps {} snapped to grid multiple {}", eps, snapped);
  return m;
}

// g(t_k, B_{t_k}) for k = 0..count-1, one row per grid point
Eigen::MatrixXd integrand_values(const FbmPath& path, const Integrand& y, std::size_t count) {
  const auto d = path.values.cols();
  if (y.dim() != d) throw std::invalid_argument("integrand dimension does not match the path");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(count), d);
  if (y.is_separable()) {
    for (std::size_t k = 0; k < count; ++k) {
      const auto row = static_cast<Eigen::Index>(k);
      for (Eigen::Index c = 0; c < d; ++c) {
        out(row, c) = y.coordinate(static_cast<int>(c), path.grid[k], path.values(row, c));
      }
    }
  } else {
    for (std::size_t k = 0; k < count; ++k) {
      const auto row = static_cast<Eigen::Index>(k);
      out.row(row) = y(path.grid[k], path.values.row(row).transpose()).transpose();
    }
  }
  return out;
}

double forward_from_values(const FbmPath& path, const Eigen::MatrixXd& g, std::size_t n_steps, std::size_t m, double dt,
                           TimeRule rule) {
  const std::size_t last = rule == TimeRule::Trapezoid ? n_steps : n_steps - 1;
  double acc = 0.0;
  for (std::size_t k = 0; k <= last; ++k) {
    const auto a = static_cast<Eigen::Index>(k);
    const auto b = static_cast<Eigen::Index>(k + m);
    double term = g.row(a).dot(path.values.row(b) - path.values.row(a));
    if (rule == TimeRule::Trapezoid && (k == 0 || k == n_steps)) term *= 0.5;
    acc += term;
  }
  return acc * dt / (static_cast<double>(m) * dt);
}

std::unique_ptr<PathSampler> make_sampler(const HurstModel& m, SamplerChoice choice, std::size_t n, double dt) {
  if (choice == SamplerChoice::Cholesky) return std::make_unique<CholeskySampler>(m, uniform_grid(n, dt));
  return std::make_unique<CirculantSampler>(m, n, dt);
}

}  // namespace

double forward_approx(const FbmPath& path, const Integrand& y, double eps, double T, TimeRule rule) {
  const double dt = uniform_step(path);
  if (path.grid.front() != 0.0) throw std::invalid_argument("path grid must start at 0");
  const std::size_t n_steps = steps_for(T, dt, "T");
  const std::size_t m = snap_eps(eps, dt);
  if (n_steps + m >= path.grid.size()) throw std::invalid_argument("path grid does not cover [0, T + eps]");
  const auto g = integrand_values(path, y, n_steps + 1);
  return forward_from_values(path, g, n_steps, m, dt, rule);
}

double riemann_sum(const FbmPath& path, const Integrand& y, const std::vector<double>& partition) {
  if (partition.size() < 2) throw std::invalid_argument("partition needs at least two points");
  const double tol = 1e-9 * std::max(1.0, path.grid.back());
  std::vector<Eigen::Index> idx;
  idx.reserve(partition.size());
  for (double p : partition) {
    const auto it = std::lower_bound(path.grid.begin(), path.grid.end(), p - tol);
    if (it == path.grid.end() || std::abs(*it - p) > tol) throw std::invalid_argument("partition point not on the path grid");
    const auto k = static_cast<Eigen::Index>(it - path.grid.begin());
    if (!idx.empty() && k <= idx.back()) throw std::invalid_argument("partition must be strictly increasing");
    idx.push_back(k);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
    const Eigen::VectorXd b = path.values.row(idx[i]).transpose();
    const Eigen::VectorXd inc = (path.values.row(idx[i + 1]) - path.values.row(idx[i])).transpose();
    acc += y(path.grid[static_cast<std::size_t>(idx[i])], b).dot(inc);
  }
  return acc;
}

std::vector<double> default_extrapolation_exponents(const HurstModel& m, const Integrand& y) {
  const double h = m.h();
  if (y.is_constant()) return {1.0, 2.0 * h};
  return {2.0 * h - 1.0, 4.0 * h - 2.0, 1.0};
}

LadderResult second_moment_ladder(const HurstModel& m, const Integrand& y, const LadderOptions& opt) {
  const auto& ladder = opt.eps_ladder;
  if (ladder.empty()) throw std::invalid_argument("empty eps ladder");
  for (std::size_t k = 1; k < ladder.size(); ++k) {
    if (!(ladder[k] < ladder[k - 1])) throw std::invalid_argument("eps ladder must be strictly decreasing");
  }
  if (opt.n_paths < 2) throw std::invalid_argument("need at least two paths");
  if (!(opt.T > 0.0)) throw std::invalid_argument("T must be positive");
  if (y.dim() != m.dim()) throw std::invalid_argument("integrand dimension does not match the model");

  LadderResult res;
  res.dt = opt.dt > 0.0 ? opt.dt : opt.T / std::ceil(4.0 * opt.T / ladder.back());
  const std::size_t n_steps = steps_for(opt.T, res.dt, "T");
  std::vector<std::size_t> mult;
  for (double e : ladder) {
    mult.push_back(snap_eps(e, res.dt));
    res.eps.push_back(static_cast<double>(mult.back()) * res.dt);
  }
  const std::size_t n_grid = n_steps + *std::max_element(mult.begin(), mult.end());
  const auto sampler = make_sampler(m, opt.sampler, n_grid, res.dt);

  const std::size_t units = (opt.n_paths + 1) / 2;
  const std::size_t n_paths = 2 * units;
  const std::size_t k_count = ladder.size();
  std::vector<double> squares(n_paths * k_count);
  parallel_for(units, opt.workers, [&](std::size_t u) {
    auto two = sampler->sample_two(opt.seed, u);
    for (std::size_t p = 0; p < 2; ++p) {
      const auto g = integrand_values(two[p], y, n_steps + 1);
      for (std::size_t k = 0; k < k_count; ++k) {
        const double i = forward_from_values(two[p], g, n_steps, mult[k], res.dt, opt.rule);
        squares[(2 * u + p) * k_count + k] = i * i;
      }
    }
  });

  std::vector<double> column(n_paths);
  for (std::size_t k = 0; k < k_count; ++k) {
    for (std::size_t p = 0; p < n_paths; ++p) column[p] = squares[p * k_count + k];
    res.moments.push_back(jackknife_mean(column, opt.block, opt.seed));
  }
  res.exponents = opt.exponents.empty() ? default_extrapolation_exponents(m, y) : opt.exponents;
  if (k_count <= res.exponents.size()) {
    // not enough ladder points to fit the basis: report the finest level
    res.exponents.clear();
    res.weights.assign(k_count, 0.0);
    res.weights.back() = 1.0;
  } else {
    res.weights = extrapolation_weights(res.eps, res.exponents);
  }
  for (std::size_t p = 0; p < n_paths; ++p) {
    double v = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) v += res.weights[k] * squares[p * k_count + k];
    column[p] = v;
  }
  res.extrapolated = jackknife_mean(column, opt.block, opt.seed);
  return res;
}

EstimateWithCI second_moment(const HurstModel& m, const Integrand& y, double eps, double T, std::size_t n_paths,
                             std::uint64_t seed, SamplerChoice sampler, int workers) {
  if (n_paths < 1000) throw std::invalid_argument("second_moment needs at least 1000 paths");
  LadderOptions opt;
  opt.eps_ladder = {eps};
  opt.T = T;
  opt.n_paths = n_paths;
  opt.seed = seed;
  opt.sampler = sampler;
  opt.workers = workers;
  opt.exponents = {};
  const auto res = second_moment_ladder(m, y, opt);
  return res.moments.front();
}

}  // namespace fbmiso
