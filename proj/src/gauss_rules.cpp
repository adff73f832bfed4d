#include "fbmiso/gauss_rules.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace fbmiso {

namespace {

// Golub-Welsch: nodes and weights from the three-term recurrence coefficients
Rule1D golub_welsch(const std::vector<double>& alpha, const std::vector<double>& beta, double mu0) {
  const auto n = static_cast<Eigen::Index>(alpha.size());
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    j(i, i) = alpha[static_cast<std::size_t>(i)];
    if (i + 1 < n) j(i, i + 1) = j(i + 1, i) = std::sqrt(beta[static_cast<std::size_t>(i + 1)]);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  if (es.info() != Eigen::Success) throw std::runtime_error("Golub-Welsch eigen solve failed");
  Rule1D r;
  r.x.resize(static_cast<std::size_t>(n));
  r.w.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    r.x[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    const double v = es.eigenvectors()(0, i);
    r.w[static_cast<std::size_t>(i)] = mu0 * v * v;
  }
  return r;
}

Rule1D legendre_reference(int n) {
  // Newton iteration on P_n refines the Golub-Welsch nodes to full precision
  std::vector<double> alpha(static_cast<std::size_t>(n), 0.0), beta(static_cast<std::size_t>(n), 0.0);
  for (int k = 1; k < n; ++k) beta[static_cast<std::size_t>(k)] = k * k / (4.0 * k * k - 1.0);
  Rule1D r = golub_welsch(alpha, beta, 2.0);
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    double x = r.x[i];
    double dp = 1.0;
    for (int it = 0; it < 3; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      if (n == 1) dp = 1.0;
      x -= p1 / dp;
    }
    r.x[i] = x;
    r.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

}  // namespace

Rule1D gauss_legendre(int n, double a, double b) {
  if (n < 1) throw std::invalid_argument("rule needs at least one node");
  static std::mutex mutex;
  static std::map<int, Rule1D> cache;
  Rule1D ref;
  {
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, legendre_reference(n)).first;
    ref = it->second;
  }
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    ref.x[i] = mid + half * ref.x[i];
    ref.w[i] *= half;
  }
  return ref;
}

Rule1D gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("rule needs at least one node");
  std::vector<double> alpha(static_cast<std::size_t>(n), 0.0), beta(static_cast<std::size_t>(n), 0.0);
  for (int k = 1; k < n; ++k) beta[static_cast<std::size_t>(k)] = k;
  return golub_welsch(alpha, beta, 1.0);
}

Rule1D gauss_laguerre(int n) {
  if (n < 1) throw std::invalid_argument("rule needs at least one node");
  std::vector<double> alpha(static_cast<std::size_t>(n)), beta(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < n; ++k) alpha[static_cast<std::size_t>(k)] = 2.0 * k + 1.0;
  for (int k = 1; k < n; ++k) beta[static_cast<std::size_t>(k)] = static_cast<double>(k) * k;
  return golub_welsch(alpha, beta, 1.0);
}

Rule1D gauss_radial(int n) {
  if (n < 1) throw std::invalid_argument("rule needs at least one node");
  // discretised Stieltjes procedure on a fine composite rule over [0, 40]
  std::vector<double> bp;
  for (int k = 0; k <= 200; ++k) bp.push_back(0.2 * k);
  const Rule1D fine = composite_rule(bp, 20);
  std::vector<double> wt(fine.size());
  for (std::size_t i = 0; i < fine.size(); ++i) {
    const double r = fine.x[i];
    wt[i] = fine.w[i] * r * std::exp(-0.5 * r * r);
  }
  std::vector<double> alpha(static_cast<std::size_t>(n)), beta(static_cast<std::size_t>(n), 0.0);
  std::vector<double> p_prev(fine.size(), 0.0), p_cur(fine.size(), 1.0);
  double norm_prev = 1.0;
  for (int k = 0; k < n; ++k) {
    double norm = 0.0, moment = 0.0;
    for (std::size_t i = 0; i < fine.size(); ++i) {
      norm += wt[i] * p_cur[i] * p_cur[i];
      moment += wt[i] * fine.x[i] * p_cur[i] * p_cur[i];
    }
    alpha[static_cast<std::size_t>(k)] = moment / norm;
    if (k > 0) beta[static_cast<std::size_t>(k)] = norm / norm_prev;
    std::vector<double> p_next(fine.size());
    for (std::size_t i = 0; i < fine.size(); ++i) {
      p_next[i] = (fine.x[i] - alpha[static_cast<std::size_t>(k)]) * p_cur[i] -
                  (k > 0 ? beta[static_cast<std::size_t>(k)] : 0.0) * p_prev[i];
    }
    p_prev = std::move(p_cur);
    p_cur = std::move(p_next);
    norm_prev = norm;
  }
  return golub_welsch(alpha, beta, 1.0);
}

Rule1D composite_rule(const std::vector<double>& breakpoints, int points_per_panel) {
  if (breakpoints.size() < 2) throw std::invalid_argument("composite rule needs at least one panel");
  Rule1D out;
  const Rule1D ref = gauss_legendre(points_per_panel);
  for (std::size_t k = 0; k + 1 < breakpoints.size(); ++k) {
    const double a = breakpoints[k];
    const double b = breakpoints[k + 1];
    if (!(b > a)) throw std::invalid_argument("breakpoints must be strictly increasing");
    for (std::size_t i = 0; i < ref.size(); ++i) {
      out.x.push_back(0.5 * (a + b) + 0.5 * (b - a) * ref.x[i]);
      out.w.push_back(0.5 * (b - a) * ref.w[i]);
    }
  }
  return out;
}

std::vector<double> geometric_breakpoints(double a, double b, double ratio, int layers, int bulk) {
  if (!(b > a)) throw std::invalid_argument("empty interval");
  if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("grading ratio must lie in (0, 1)");
  if (layers < 0 || bulk < 1) throw std::invalid_argument("invalid panel counts");
  std::vector<double> bp{a};
  const double len = b - a;
  for (int k = layers; k >= 1; --k) {
    const double x = a + len * std::pow(ratio, k);
    if (x > bp.back()) bp.push_back(x);
  }
  const double start = layers > 0 ? a + len * ratio : a;
  for (int k = 1; k <= bulk; ++k) {
    const double x = start + (b - start) * k / bulk;
    if (x > bp.back()) bp.push_back(x);
  }
  bp.back() = b;
  return bp;
}

std::vector<double> merge_breakpoints(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  std::vector<double> out;
  for (double x : a) {
    if (out.empty() || x - out.back() > 1e-13 * std::abs(x)) out.push_back(x);
  }
  return out;
}

}  // namespace fbmiso
