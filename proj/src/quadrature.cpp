#include "fbmiso/quadrature.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "fbmiso/covariance.hpp"
#include "fbmiso/parallel.hpp"
#include "fbmiso/rng.hpp"

namespace fbmiso {

using detail::pow_abs;

void QuadratureSpec::validate() const {
  if (gh_order < 8) throw std::invalid_argument("gh_order must be at least 8");
  if (panel_points < 2) throw std::invalid_argument("panel_points must be at least 2");
  if (!(grading_ratio > 0.0 && grading_ratio < 1.0)) throw std::invalid_argument("grading_ratio must lie in (0, 1)");
  if (layers < 0 || bulk_panels < 1) throw std::invalid_argument("invalid panel counts");
  if (!(band >= 0.0)) throw std::invalid_argument("band width must be nonnegative");
  if (!(tolerance > 0.0 && tolerance < 1.0)) throw std::invalid_argument("tolerance must lie in (0, 1)");
  if (polar_points < 4) throw std::invalid_argument("polar_points must be at least 4");
  if (refinements < 0 || refinements > 4) throw std::invalid_argument("refinements must lie in [0, 4]");
}

namespace {

template <class Key, class Value, class Make>
std::shared_ptr<const Value> cached(Key key, Make make) {
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const Value>> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, std::make_shared<const Value>(make())).first;
  return it->second;
}

std::shared_ptr<const Rule1D> hermite_cached(int n) {
  return cached<int, Rule1D>(n, [n] { return gauss_hermite(n); });
}

std::shared_ptr<const Rule1D> radial_cached(int n) {
  return cached<int, Rule1D>(n + 100000, [n] { return gauss_radial(n); });
}

std::shared_ptr<const Rule1D> laguerre_cached(int n) {
  return cached<int, Rule1D>(n + 200000, [n] { return gauss_laguerre(n); });
}

std::shared_ptr<const PairRule> tensor_cached(int n) {
  return cached<int, PairRule>(n, [n] { return tensor_hermite_rule(n); });
}

// number of geometric layers so that the innermost panel of width a = ratio^L
// carries an O(a^e / e) share of an r^(e-1) singularity below `tol`
int auto_layers(double exponent, double ratio, double tol) {
  const double edge = std::pow(std::sqrt(tol) * exponent, 1.0 / exponent);
  return std::max(1, static_cast<int>(std::ceil(std::log(edge) / std::log(ratio))));
}

std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct PairFactor {
  double l11, l21, l22;
};

PairFactor pair_factor(const OrderedPowers& op) {
  if (!(op.theta > 0.0)) throw std::domain_error("pair covariance is not positive definite at lo=" + fmt_g(op.lo) + " gap=" + fmt_g(op.gap));
  const double root = std::sqrt(op.lo2h);
  return {root, op.phi / root, std::sqrt(op.theta) / root};
}

// E|A u + c|^q for u ~ Exp(1)
double exp_abs_moment(double a, double c, double q) {
  if (a == 0.0) return pow_abs(c, q);
  const double b = std::abs(a);
  if (c == 0.0) return std::pow(b, q) * std::tgamma(q + 1.0);
  if (a * c > 0.0) {
    const double x = std::abs(c) / b;
    if (x <= 50.0) return std::pow(b, q) * std::exp(x) * boost::math::tgamma(q + 1.0, x);
    const auto lag = laguerre_cached(40);
    double s = 0.0;
    for (std::size_t i = 0; i < lag->size(); ++i) s += lag->w[i] * std::pow(1.0 + lag->x[i] / x, q);
    return pow_abs(c, q) * s;
  }
  // sign change at u* = -c/a
  const double x = -c / a;
  double below;  // exp(-x) int_0^x e^v v^q dv
  if (x <= 500.0) {
    below = 0.0;
    const double lx = std::log(x);
    for (int n = 0; n < 100000; ++n) {
      const double term = std::exp((n + q + 1.0) * lx - x - std::lgamma(n + 1.0)) / (n + q + 1.0);
      below += term;
      if (n > x && term < 1e-17 * below) break;
    }
  } else {
    const auto lag = laguerre_cached(40);
    below = 0.0;
    for (std::size_t i = 0; i < lag->size(); ++i) below += lag->w[i] * std::pow(std::max(0.0, 1.0 - lag->x[i] / x), q);
    below *= std::pow(x, q);
  }
  return std::pow(b, q) * (std::exp(-x) * std::tgamma(q + 1.0) + below);
}

struct Accum {
  double a = 0.0, p = 0.0, q = 0.0;
};

}  // namespace

PairRule tensor_hermite_rule(int n) {
  const auto gh = hermite_cached(n);
  PairRule r;
  for (std::size_t i = 0; i < gh->size(); ++i) {
    for (std::size_t j = 0; j < gh->size(); ++j) {
      r.z1.push_back(gh->x[i]);
      r.z2.push_back(gh->x[j]);
      r.w.push_back(gh->w[i] * gh->w[j]);
    }
  }
  return r;
}

PairRule polar_split_rule(const std::vector<Eigen::Vector2d>& normals, int n_theta, int n_rho) {
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<double> cuts{0.0, two_pi};
  for (const auto& n : normals) {
    if (n.norm() == 0.0) continue;
    // directions u with n.u = 0
    double a = std::atan2(n.x(), -n.y());
    for (int k = 0; k < 2; ++k) {
      double th = std::fmod(a + k * std::numbers::pi, two_pi);
      if (th < 0.0) th += two_pi;
      cuts.push_back(th);
    }
  }
  cuts = merge_breakpoints(cuts, {});
  const auto rad = radial_cached(n_rho);
  const Rule1D ang = composite_rule(cuts, n_theta);
  PairRule r;
  for (std::size_t i = 0; i < ang.size(); ++i) {
    const double c = std::cos(ang.x[i]);
    const double s = std::sin(ang.x[i]);
    for (std::size_t j = 0; j < rad->size(); ++j) {
      r.z1.push_back(rad->x[j] * c);
      r.z2.push_back(rad->x[j] * s);
      r.w.push_back(ang.w[i] / two_pi * rad->w[j]);
    }
  }
  return r;
}

double pointwise_F_tensor(const HurstModel& m, const Integrand& y, const KernelForm& f, int order, long max_nodes) {
  const int d = m.dim();
  const int dims = 2 * d;
  int n = order;
  while (n > 1 && std::pow(static_cast<double>(n), dims) > static_cast<double>(max_nodes)) --n;
  if (n < 4) throw std::runtime_error("tensor Gauss-Hermite rule exceeds the node budget");
  const auto gh = hermite_cached(n);
  const auto op = ordered_powers(m, f.at.lo(), f.at.gap());
  const auto lf = pair_factor(op);
  const double lo_t = f.at.lo();
  const double hi_t = f.at.hi();
  std::vector<int> idx(static_cast<std::size_t>(dims), 0);
  Eigen::VectorXd x(d), dx(d);
  double total = 0.0;
  while (true) {
    double w = 1.0;
    for (int c = 0; c < d; ++c) {
      const double z1 = gh->x[static_cast<std::size_t>(idx[2 * c])];
      const double z2 = gh->x[static_cast<std::size_t>(idx[2 * c + 1])];
      w *= gh->w[static_cast<std::size_t>(idx[2 * c])] * gh->w[static_cast<std::size_t>(idx[2 * c + 1])];
      x(c) = lf.l11 * z1;
      dx(c) = lf.l21 * z1 + lf.l22 * z2;
    }
    const Eigen::VectorXd ylo = y(lo_t, x);
    const Eigen::VectorXd yhi = y(hi_t, x + dx);
    const Eigen::VectorXd l = f.a1 * x + f.a2 * dx;
    const Eigen::VectorXd r = f.b1 * x + f.b2 * dx;
    total += w * (ylo.dot(l) * yhi.dot(r) - (f.mean - f.shift) * ylo.dot(yhi));
    int k = 0;
    while (k < dims && ++idx[static_cast<std::size_t>(k)] == n) idx[static_cast<std::size_t>(k++)] = 0;
    if (k == dims) break;
  }
  return total;
}

double pointwise_F_form(const HurstModel& m, const Integrand& y, const KernelForm& f, const QuadratureSpec& spec) {
  if (y.dim() != m.dim()) throw std::invalid_argument("integrand dimension does not match the model");
  if (!y.is_separable()) return pointwise_F_tensor(m, y, f, spec.gh_order, spec.max_tensor_nodes);
  const int d = m.dim();
  const auto op = ordered_powers(m, f.at.lo(), f.at.gap());
  const auto lf = pair_factor(op);
  const double lo_t = f.at.lo();
  const double hi_t = f.at.hi();
  std::shared_ptr<const PairRule> rule;
  if (y.jump_at_zero()) {
    rule = std::make_shared<const PairRule>(polar_split_rule(
        {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(lf.l11 + lf.l21, lf.l22)}, spec.polar_points, spec.polar_points));
  } else {
    rule = tensor_cached(spec.gh_order);
  }
  double sum_a = 0.0, sum_p = 0.0, sum_q = 0.0, sum_pq = 0.0;
  const double centre = f.shift - f.mean;
  for (int c = 0; c < d; ++c) {
    Accum acc;
    for (std::size_t k = 0; k < rule->w.size(); ++k) {
      const double x = lf.l11 * rule->z1[k];
      const double dx = lf.l21 * rule->z1[k] + lf.l22 * rule->z2[k];
      const double glo = y.coordinate(c, lo_t, x);
      const double ghi = y.coordinate(c, hi_t, x + dx);
      const double l = f.a1 * x + f.a2 * dx;
      const double r = f.b1 * x + f.b2 * dx;
      const double w = rule->w[k];
      acc.a += w * glo * ghi * (l * r + centre);
      acc.p += w * glo * l;
      acc.q += w * ghi * r;
    }
    sum_a += acc.a;
    sum_p += acc.p;
    sum_q += acc.q;
    sum_pq += acc.p * acc.q;
  }
  // off-diagonal pairs factor over independent coordinates
  return sum_a + sum_p * sum_q - sum_pq;
}

double pointwise_F(const HurstModel& m, const Integrand& y, const SimplexPoint& p, const QuadratureSpec& spec) {
  return pointwise_F_form(m, y, limit_form(m, p), spec);
}

namespace {

// Gauss-Legendre on [0, a] after the substitution x = a u^(1/alpha), which
// absorbs an x^(alpha-1) endpoint singularity into the weight
void append_mapped_panel(Rule1D& out, double a, int n, double alpha) {
  const Rule1D gl = gauss_legendre(n, 0.0, 1.0);
  for (std::size_t i = 0; i < gl.size(); ++i) {
    const double u = gl.x[i];
    out.x.push_back(a * std::pow(u, 1.0 / alpha));
    out.w.push_back(gl.w[i] * a / alpha * std::pow(u, 1.0 / alpha - 1.0));
  }
}

Rule1D graded_rule(const std::vector<double>& bp, int n, double alpha, bool map_first) {
  Rule1D out;
  if (map_first) {
    append_mapped_panel(out, bp[1] - bp[0], n, alpha);
    for (double& x : out.x) x += bp[0];
    const Rule1D rest = composite_rule(std::vector<double>(bp.begin() + 1, bp.end()), n);
    out.x.insert(out.x.end(), rest.x.begin(), rest.x.end());
    out.w.insert(out.w.end(), rest.w.begin(), rest.w.end());
    return out;
  }
  return composite_rule(bp, n);
}

}  // namespace

SimplexMesh simplex_mesh(const HurstModel& m, double T, const QuadratureSpec& spec, int level,
                         const std::vector<double>& gap_points, double alpha_gap, double alpha_w) {
  spec.validate();
  if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
  if (spec.band >= T) throw std::invalid_argument("band must be narrower than T");
  if (alpha_gap <= 0.0) alpha_gap = m.two_h() - 1.0;
  if (alpha_w <= 0.0) alpha_w = m.h();
  const double ratio = spec.grading_ratio;
  const int n = spec.panel_points + 4 * level;
  const int layers_gap = (spec.layers > 0 ? spec.layers : auto_layers(alpha_gap, ratio, spec.tolerance)) + 2 * level;
  const int layers_w = auto_layers(alpha_w, ratio, spec.tolerance) + 2 * level;
  auto gap_bp = geometric_breakpoints(spec.band, T, ratio, layers_gap, spec.bulk_panels);
  std::vector<double> extra;
  for (double g : gap_points) {
    if (!(g > spec.band && g < T)) continue;
    extra.push_back(g);
    for (int k = 1; k <= 8 + 2 * level; ++k) {
      const double off = g * std::pow(ratio, k);
      if (g - off > spec.band) extra.push_back(g - off);
      if (g + off < T) extra.push_back(g + off);
    }
  }
  gap_bp = merge_breakpoints(gap_bp, extra);
  const auto w_bp = geometric_breakpoints(0.0, 1.0, ratio, layers_w, spec.bulk_panels);
  SimplexMesh mesh;
  mesh.gap = graded_rule(gap_bp, n, alpha_gap, spec.band == 0.0);
  mesh.w = graded_rule(w_bp, n, alpha_w, true);
  mesh.gap_inner = gap_bp[1];
  mesh.w_inner = w_bp[1];
  return mesh;
}

namespace {

// 2 * int_0^T dgap (T - gap) int_0^1 dw F(lo = (T - gap) w, gap)
double integrate_mesh(const SimplexMesh& mesh, double T, int workers, const std::function<double(double, double)>& F) {
  std::vector<double> row(mesh.gap.size());
  parallel_for(row.size(), workers, [&](std::size_t i) {
    const double gap = mesh.gap.x[i];
    const double span = T - gap;
    double s = 0.0;
    for (std::size_t j = 0; j < mesh.w.size(); ++j) s += mesh.w.w[j] * F(span * mesh.w.x[j], gap);
    row[i] = 2.0 * mesh.gap.w[i] * span * s;
  });
  return pairwise_sum(row);
}

QuadEstimate integrate_simplex(const HurstModel& m, double T, const QuadratureSpec& spec,
                               const std::vector<double>& gap_points, const std::function<double(double, double)>& F,
                               double alpha_gap = 0.0, double alpha_w = 0.0) {
  QuadEstimate est;
  std::vector<double> diffs;
  for (int level = 0; level <= spec.refinements; ++level) {
    const auto mesh = simplex_mesh(m, T, spec, level, gap_points, alpha_gap, alpha_w);
    const double sum = integrate_mesh(mesh, T, spec.workers, F);
    if (!est.levels.empty()) diffs.push_back(std::abs(sum - est.levels.back()));
    est.levels.push_back(sum);
  }
  est.value = est.levels.back();
  est.error = diffs.empty() ? 0.0 : diffs.back();
  if (diffs.size() >= 2) {
    const double floor = 1e-13 * std::max(1.0, std::abs(est.value));
    est.converged = diffs.back() <= diffs[diffs.size() - 2] || diffs.back() <= floor;
  }
  if (spec.band > 0.0) {
    // envelope C gap^(2H-2) below the band edge
    const auto mesh = simplex_mesh(m, T, spec, 0, gap_points, alpha_gap, alpha_w);
    const double b = spec.band;
    double edge = 0.0;
    for (std::size_t j = 0; j < mesh.w.size(); ++j) edge += mesh.w.w[j] * F((T - b) * mesh.w.x[j], b);
    edge *= 2.0 * (T - b);
    est.error += std::abs(edge) * b / (alpha_gap > 0.0 ? alpha_gap : m.two_h() - 1.0);
  }
  return est;
}

}  // namespace

QuadEstimate rhs_isometry(const HurstModel& m, const Integrand& y, double T, const QuadratureSpec& spec) {
  if (y.dim() != m.dim()) throw std::invalid_argument("integrand dimension does not match the model");
  return integrate_simplex(m, T, spec, {}, [&](double lo, double gap) {
    return pointwise_F(m, y, SimplexPoint::from_gap(lo, gap), spec);
  });
}

QuadEstimate rhs_isometry_full_square(const HurstModel& m, const Integrand& y, double T, const QuadratureSpec& spec) {
  if (y.dim() != m.dim()) throw std::invalid_argument("integrand dimension does not match the model");
  const auto upper = integrate_simplex(m, T, spec, {}, [&](double lo, double gap) {
    return 0.5 * pointwise_F(m, y, SimplexPoint::from_gap(lo, gap, true), spec);
  });
  const auto lower = integrate_simplex(m, T, spec, {}, [&](double lo, double gap) {
    return 0.5 * pointwise_F(m, y, SimplexPoint::from_gap(lo, gap, false), spec);
  });
  QuadEstimate out;
  out.value = upper.value + lower.value;
  out.error = upper.error + lower.error;
  out.converged = upper.converged && lower.converged;
  for (std::size_t k = 0; k < upper.levels.size(); ++k) out.levels.push_back(upper.levels[k] + lower.levels[k]);
  return out;
}

QuadEstimate rkhs_norm_squared(const HurstModel& m, const std::function<Eigen::VectorXd(double)>& f, double T,
                               const QuadratureSpec& spec) {
  return integrate_simplex(m, T, spec, {},
                           [&](double lo, double gap) { return f(lo).dot(f(lo + gap)) * d2R_gap(m, gap); });
}

double abs_moment_quadratic(const Eigen::Matrix2d& s, double c, double q, int angle_points) {
  if (!(q > 0.0)) throw std::invalid_argument("moment order must be positive");
  const double s00 = s(0, 0);
  const double s01 = 0.5 * (s(0, 1) + s(1, 0));
  const double s11 = s(1, 1);
  // zeros of Q(theta) = s00 cos^2 + 2 s01 cos sin + s11 sin^2 on [0, pi)
  std::vector<double> cuts{0.0, std::numbers::pi};
  const auto add_tan_root = [&](double tau) {
    double th = std::atan(tau);
    if (th < 0.0) th += std::numbers::pi;
    cuts.push_back(th);
  };
  const double scale = std::max({std::abs(s00), std::abs(s01), std::abs(s11)});
  if (scale == 0.0) return pow_abs(c, q);
  if (std::abs(s11) > 1e-14 * scale) {
    const double disc = s01 * s01 - s00 * s11;
    if (disc >= 0.0) {
      const double root = std::sqrt(disc);
      add_tan_root((-s01 + root) / s11);
      add_tan_root((-s01 - root) / s11);
    }
  } else {
    cuts.push_back(0.5 * std::numbers::pi);
    if (std::abs(s01) > 0.0) add_tan_root(-s00 / (2.0 * s01));
  }
  cuts = merge_breakpoints(cuts, {});
  const Rule1D ang = composite_rule(cuts, angle_points);
  double total = 0.0;
  for (std::size_t i = 0; i < ang.size(); ++i) {
    const double co = std::cos(ang.x[i]);
    const double si = std::sin(ang.x[i]);
    const double quad = s00 * co * co + 2.0 * s01 * co * si + s11 * si * si;
    total += ang.w[i] * exp_abs_moment(2.0 * quad, c, q);
  }
  return total / std::numbers::pi;
}

namespace {

// quadratic form of Lambda in the standard normals of one coordinate
Eigen::Matrix2d form_matrix(const KernelForm& f, const PairFactor& lf) {
  const Eigen::Vector2d alpha(f.a1 * lf.l11 + f.a2 * lf.l21, f.a2 * lf.l22);
  const Eigen::Vector2d beta(f.b1 * lf.l11 + f.b2 * lf.l21, f.b2 * lf.l22);
  const Eigen::Matrix2d outer = alpha * beta.transpose();
  return 0.5 * (outer + outer.transpose());
}

double tensor_frobenius_moment(const HurstModel& m, const KernelForm& f, double q, int n) {
  const int d = m.dim();
  const int dims = 2 * d;
  const auto gh = hermite_cached(n);
  const auto lf = pair_factor(ordered_powers(m, f.at.lo(), f.at.gap()));
  std::vector<int> idx(static_cast<std::size_t>(dims), 0);
  Eigen::VectorXd x(d), dx(d);
  double total = 0.0;
  while (true) {
    double w = 1.0;
    for (int c = 0; c < d; ++c) {
      const double z1 = gh->x[static_cast<std::size_t>(idx[2 * c])];
      const double z2 = gh->x[static_cast<std::size_t>(idx[2 * c + 1])];
      w *= gh->w[static_cast<std::size_t>(idx[2 * c])] * gh->w[static_cast<std::size_t>(idx[2 * c + 1])];
      x(c) = lf.l11 * z1;
      dx(c) = lf.l21 * z1 + lf.l22 * z2;
    }
    Eigen::MatrixXd k = (f.a1 * x + f.a2 * dx) * (f.b1 * x + f.b2 * dx).transpose();
    k.diagonal().array() += f.shift - f.mean;
    total += w * std::pow(k.norm(), q);
    int j = 0;
    while (j < dims && ++idx[static_cast<std::size_t>(j)] == n) idx[static_cast<std::size_t>(j++)] = 0;
    if (j == dims) break;
  }
  return total;
}

}  // namespace

QuadEstimate lq_norm_Lambda(const HurstModel& m, const SimplexPoint& p, double q, const QuadratureSpec& spec) {
  if (!(q > 1.0)) throw std::invalid_argument("lq_norm_Lambda needs q > 1");
  spec.validate();
  const auto f = limit_form(m, p);
  QuadEstimate est;
  if (m.dim() == 1) {
    const auto lf = pair_factor(ordered_powers(m, p.lo(), p.gap()));
    const auto s = form_matrix(f, lf);
    const double c = f.shift - f.mean;
    const double coarse = std::pow(abs_moment_quadratic(s, c, q, spec.polar_points), 1.0 / q);
    const double fine = std::pow(abs_moment_quadratic(s, c, q, 2 * spec.polar_points), 1.0 / q);
    est.levels = {coarse, fine};
    est.value = fine;
    est.error = std::abs(fine - coarse);
  } else {
    const int n_fine = spec.gh_order;
    const int n_coarse = std::max(4, spec.gh_order - 8);
    if (std::pow(static_cast<double>(n_fine), 2 * m.dim()) > static_cast<double>(spec.max_tensor_nodes)) {
      throw std::runtime_error("tensor Gauss-Hermite rule exceeds the node budget");
    }
    const double coarse = std::pow(tensor_frobenius_moment(m, f, q, n_coarse), 1.0 / q);
    const double fine = std::pow(tensor_frobenius_moment(m, f, q, n_fine), 1.0 / q);
    est.levels = {coarse, fine};
    est.value = fine;
    est.error = std::abs(fine - coarse);
  }
  est.converged = est.error <= 1e-6 * std::abs(est.value);
  return est;
}

EstimateWithCI lq_distance_finite_to_limit(const HurstModel& m, double eps, double q, double T,
                                           const QuadratureSpec& spec, std::size_t n_mc, std::uint64_t seed) {
  if (!(q >= 1.0)) throw std::invalid_argument("distance order must be at least 1");
  const double qmax = std::min(1.0 / (m.two_h() - 1.0), 1.0 / (2.0 - m.two_h()));
  if (!(q < qmax)) throw std::invalid_argument("q must lie below min{1/(2H-1), 1/(2-2H)}");
  if (n_mc < 2) throw std::invalid_argument("need at least two Monte Carlo draws");
  const auto mesh = simplex_mesh(m, T, spec, 0, {eps}, 1.0 - q * (2.0 - m.two_h()), 1.0 - q * (1.0 - m.h()));
  const int d = m.dim();
  struct Node {
    double weight;
    PairFactor lf;
    KernelForm lim, fin;
  };
  std::vector<Node> nodes;
  nodes.reserve(mesh.gap.size() * mesh.w.size());
  for (std::size_t i = 0; i < mesh.gap.size(); ++i) {
    const double gap = mesh.gap.x[i];
    const double span = T - gap;
    for (std::size_t j = 0; j < mesh.w.size(); ++j) {
      const auto p = SimplexPoint::from_gap(span * mesh.w.x[j], gap);
      const auto op = ordered_powers(m, p.lo(), p.gap());
      nodes.push_back({2.0 * mesh.gap.w[i] * span * mesh.w.w[j], pair_factor(op), limit_form(m, p),
                       finite_form(m, eps, eps, p)});
    }
  }
  std::vector<double> draws(n_mc);
  parallel_for(n_mc, spec.workers, [&](std::size_t k) {
    NormalStream rng(seed, k);
    Eigen::VectorXd z(2 * d);
    rng.fill(z.data(), z.data() + z.size());
    Eigen::VectorXd x(d), dx(d);
    std::vector<double> contrib(nodes.size());
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      const auto& nd = nodes[n];
      for (int c = 0; c < d; ++c) {
        x(c) = nd.lf.l11 * z(2 * c);
        dx(c) = nd.lf.l21 * z(2 * c) + nd.lf.l22 * z(2 * c + 1);
      }
      Eigen::MatrixXd diff = (nd.fin.a1 * x + nd.fin.a2 * dx) * (nd.fin.b1 * x + nd.fin.b2 * dx).transpose() -
                             (nd.lim.a1 * x + nd.lim.a2 * dx) * (nd.lim.b1 * x + nd.lim.b2 * dx).transpose();
      diff.diagonal().array() += (nd.fin.shift - nd.fin.mean) - (nd.lim.shift - nd.lim.mean);
      contrib[n] = nd.weight * std::pow(diff.norm(), q);
    }
    draws[k] = pairwise_sum(contrib);
  });
  const auto mean = jackknife_mean(draws, 1, seed);
  EstimateWithCI out;
  out.value = std::pow(mean.value, 1.0 / q);
  out.std_error = mean.value > 0.0 ? out.value / (q * mean.value) * mean.std_error : 0.0;
  out.n_samples = n_mc;
  out.seed = seed;
  return out;
}

QuadEstimate lq_distance_polar(const HurstModel& m, double eps, double q, double T, const QuadratureSpec& spec) {
  if (m.dim() != 1) throw std::invalid_argument("polar distance is implemented for d = 1");
  if (!(q >= 1.0)) throw std::invalid_argument("distance order must be at least 1");
  auto est = integrate_simplex(m, T, spec, {eps}, [&](double lo, double gap) {
    const auto p = SimplexPoint::from_gap(lo, gap);
    const auto lf = pair_factor(ordered_powers(m, lo, gap));
    const auto lim = limit_form(m, p);
    const auto fin = finite_form(m, eps, eps, p);
    const Eigen::Matrix2d s = form_matrix(fin, lf) - form_matrix(lim, lf);
    const double c = (fin.shift - fin.mean) - (lim.shift - lim.mean);
    return abs_moment_quadratic(s, c, q, spec.polar_points);
  }, 1.0 - q * (2.0 - m.two_h()), 1.0 - q * (1.0 - m.h()));
  const double root = std::pow(est.value, 1.0 / q);
  est.error = est.value > 0.0 ? root / (q * est.value) * est.error : 0.0;
  for (double& v : est.levels) v = std::pow(v, 1.0 / q);
  est.value = root;
  return est;
}

QuadEstimate lambda_q_mass(const HurstModel& m, double q, double T, const QuadratureSpec& spec) {
  if (m.dim() != 1) throw std::invalid_argument("lambda_q_mass is implemented for d = 1");
  const double qmax = std::min(1.0 / (m.two_h() - 1.0), 1.0 / (2.0 - m.two_h()));
  if (!(q >= 1.0 && q < qmax)) throw std::invalid_argument("q must lie in [1, min{1/(2H-1), 1/(2-2H)})");
  return integrate_simplex(
      m, T, spec, {},
      [&](double lo, double gap) {
        const auto p = SimplexPoint::from_gap(lo, gap);
        const auto f = limit_form(m, p);
        const auto lf = pair_factor(ordered_powers(m, lo, gap));
        return abs_moment_quadratic(form_matrix(f, lf), f.shift - f.mean, q, spec.polar_points);
      },
      1.0 - q * (2.0 - m.two_h()), 1.0 - q * (1.0 - m.h()));
}

namespace {

// int_0^b h(x) dx on a rule graded toward 0 whose first panel absorbs an
// x^(alpha-1) singularity; `points` get graded neighbourhoods and the sign
// changes of `sign_fn` are located by bisection and added as breakpoints
QuadEstimate integrate_line(double b, double alpha, const QuadratureSpec& spec, std::vector<double> points,
                            const std::function<double(double)>& h, const std::function<double(double)>& sign_fn) {
  spec.validate();
  const double ratio = spec.grading_ratio;
  const int layers0 = spec.layers > 0 ? spec.layers : auto_layers(alpha, ratio, spec.tolerance);
  const auto neighbourhood = [&](double g, int depth) {
    std::vector<double> out{g};
    for (int k = 1; k <= depth; ++k) {
      const double off = g * std::pow(ratio, k);
      out.push_back(g - off);
      if (g + off < b) out.push_back(g + off);
    }
    return out;
  };
  if (sign_fn) {
    auto bp = merge_breakpoints(geometric_breakpoints(0.0, b, ratio, layers0, spec.bulk_panels), {});
    for (double g : points) {
      if (g > 0.0 && g < b) bp = merge_breakpoints(bp, neighbourhood(g, 8));
    }
    const Rule1D scan = composite_rule(bp, 4);
    std::vector<double> roots;
    for (std::size_t i = 0; i + 1 < scan.size(); ++i) {
      double lo = scan.x[i], hi = scan.x[i + 1];
      double flo = sign_fn(lo);
      const double fhi = sign_fn(hi);
      if (!(flo * fhi < 0.0)) continue;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = sign_fn(mid);
        if (fm * flo <= 0.0) {
          hi = mid;
        } else {
          lo = mid;
          flo = fm;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    points.insert(points.end(), roots.begin(), roots.end());
  }
  QuadEstimate est;
  std::vector<double> diffs;
  for (int level = 0; level <= spec.refinements; ++level) {
    const int n = spec.panel_points + 4 * level;
    auto bp = geometric_breakpoints(0.0, b, ratio, layers0 + 2 * level, spec.bulk_panels);
    for (double g : points) {
      if (g > 0.0 && g < b) bp = merge_breakpoints(bp, neighbourhood(g, 12 + 2 * level));
    }
    const Rule1D rule = graded_rule(bp, n, alpha, true);
    double total = 0.0;
    for (std::size_t i = 0; i < rule.size(); ++i) total += rule.w[i] * h(rule.x[i]);
    if (!est.levels.empty()) diffs.push_back(std::abs(total - est.levels.back()));
    est.levels.push_back(total);
  }
  est.value = est.levels.back();
  est.error = diffs.empty() ? 0.0 : diffs.back();
  if (diffs.size() >= 2) {
    est.converged = diffs.back() <= diffs[diffs.size() - 2] || diffs.back() <= 1e-13 * std::abs(est.value);
  }
  return est;
}

}  // namespace

QuadEstimate det_distance(const HurstModel& m, double eps, double delta, double p, double T, const QuadratureSpec& spec) {
  if (!(p >= 1.0)) throw std::invalid_argument("p must be at least 1");
  if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
  const std::vector<double> kinks{eps, delta, std::abs(eps - delta)};
  QuadEstimate total;
  for (int side = 0; side < 2; ++side) {
    const double sign = side == 0 ? 1.0 : -1.0;
    const auto diff = [&](double r) { return det_cross_gap(m, eps, delta, sign * r) - d2R_gap(m, r); };
    const double alpha = 1.0 - p * (2.0 - m.two_h());
    if (!(alpha > 0.0)) throw std::invalid_argument("p(2-2H) must be below 1 for an integrable distance");
    const auto part = integrate_line(
        T, alpha, spec, kinks, [&](double r) { return (T - r) * std::pow(std::abs(diff(r)), p); }, diff);
    total.value += part.value;
    total.error += part.error;
    total.converged = total.converged && part.converged;
    if (total.levels.empty()) {
      total.levels = part.levels;
    } else {
      for (std::size_t k = 0; k < part.levels.size(); ++k) total.levels[k] += part.levels[k];
    }
  }
  return total;
}

QuadEstimate det_strip(const HurstModel& m, double eps, double delta, double p, double T, const QuadratureSpec& spec) {
  if (!(p >= 1.0)) throw std::invalid_argument("p must be at least 1");
  const double e = std::min(eps, delta);
  if (!(e < T)) throw std::invalid_argument("strip width must be below T");
  // gap < e: the full segment of length T - gap; gap >= e: only s <= e
  return integrate_line(
      T, 1.0, spec, {e, eps, delta, std::abs(eps - delta)},
      [&](double r) {
        const double len = r < e ? T - r : std::min(e, T - r);
        return len * std::pow(std::abs(det_cross_gap(m, eps, delta, r)), p);
      },
      {});
}

}  // namespace fbmiso
