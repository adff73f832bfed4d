#include "fbmiso/kernel.hpp"

#include <stdexcept>

#include "fbmiso/covariance.hpp"

namespace fbmiso {

using detail::pow_abs;

namespace {

void check_sample(const HurstModel& m, const PairSample& x) {
  if (x.b_s.size() != m.dim() || x.b_t.size() != m.dim()) {
    throw std::invalid_argument("pair sample dimension does not match the model");
  }
}

double pair_mean(const KernelForm& f, const OrderedPowers& op) {
  return f.a1 * f.b1 * op.lo2h + (f.a1 * f.b2 + f.a2 * f.b1) * op.phi + f.a2 * f.b2 * op.gap2h;
}

}  // namespace

KernelForm limit_form(const HurstModel& m, const SimplexPoint& p) {
  const auto op = ordered_powers(m, p.lo(), p.gap());
  const auto e = eta_limit_ordered(m, op);
  KernelForm f{p, e.c11, e.c12, e.c21, e.c22, 0.0, d2R_gap(m, p.gap())};
  f.mean = pair_mean(f, op);
  return f;
}

KernelForm finite_form(const HurstModel& m, double eps, double delta, const SimplexPoint& p) {
  if (!(eps > 0.0) || !(delta > 0.0)) throw std::invalid_argument("eps and delta must be positive");
  const auto op = ordered_powers(m, p.lo(), p.gap());
  // on the lower simplex the roles of the two increments are exchanged
  const double e1 = p.ordered() ? eps : delta;
  const double e2 = p.ordered() ? delta : eps;
  const auto e = eta_finite_ordered(m, e1, e2, op);
  const double g = p.ordered() ? p.gap() : -p.gap();
  KernelForm f{p, e.c11 / e1, e.c12 / e1, e.c21 / e2, e.c22 / e2, 0.0, det_cross_gap(m, eps, delta, g)};
  f.mean = pair_mean(f, op);
  return f;
}

Eigen::MatrixXd evaluate_form(const KernelForm& f, const PairSample& x) {
  const bool up = f.at.ordered();
  const Eigen::VectorXd& lo = up ? x.b_s : x.b_t;
  const Eigen::VectorXd& hi = up ? x.b_t : x.b_s;
  const Eigen::VectorXd d = hi - lo;
  const Eigen::VectorXd l = f.a1 * lo + f.a2 * d;
  const Eigen::VectorXd r = f.b1 * lo + f.b2 * d;
  Eigen::MatrixXd out = l * r.transpose();
  out.diagonal().array() += f.shift - f.mean;
  if (!up) out.transposeInPlace();
  return out;
}

KernelMatrix W_kernel(const HurstModel& m, const SimplexPoint& p, const PairSample& x) {
  check_sample(m, x);
  auto f = limit_form(m, p);
  f.shift = 0.0;
  return {evaluate_form(f, x), p, false};
}

KernelMatrix Lambda_kernel(const HurstModel& m, const SimplexPoint& p, const PairSample& x) {
  check_sample(m, x);
  return {evaluate_form(limit_form(m, p), x), p, false};
}

KernelMatrix Lambda_finite(const HurstModel& m, double eps, double delta, const SimplexPoint& p,
                           const PairSample& x) {
  check_sample(m, x);
  return {evaluate_form(finite_form(m, eps, delta, p), x), p, std::max(eps, delta) >= p.gap()};
}

KernelMatrix W_kernel_lambda(const HurstModel& m, const SimplexPoint& p, const PairSample& x) {
  check_sample(m, x);
  const double s = p.s();
  const double t = p.t();
  const auto l = lambda_limit(m, s, t);
  const double vs = variance_v(m, s);
  const double vt = variance_v(m, t);
  const double r = cov_R(m, s, t);
  const Eigen::VectorXd& bs = x.b_s;
  const Eigen::VectorXd& bt = x.b_t;
  Eigen::MatrixXd w = l.c11 * l.c21 * (bs * bs.transpose()) + l.c11 * l.c22 * (bs * bt.transpose()) +
                      l.c12 * l.c21 * (bt * bs.transpose()) + l.c12 * l.c22 * (bt * bt.transpose());
  w.diagonal().array() -= l.c11 * l.c21 * vs + (l.c11 * l.c22 + l.c12 * l.c21) * r + l.c12 * l.c22 * vt;
  return {w, p, false};
}

KernelMatrix Lambda_finite_lambda(const HurstModel& m, double eps, double delta, const SimplexPoint& p,
                                  const PairSample& x) {
  check_sample(m, x);
  const double s = p.s();
  const double t = p.t();
  const auto l = lambda_finite(m, eps, delta, s, t);
  const double vs = variance_v(m, s);
  const double vt = variance_v(m, t);
  const double r = cov_R(m, s, t);
  const Eigen::VectorXd z1 = l.c11 * x.b_s + l.c12 * x.b_t;
  const Eigen::VectorXd z2 = l.c21 * x.b_s + l.c22 * x.b_t;
  const double mean = l.c11 * l.c21 * vs + (l.c11 * l.c22 + l.c12 * l.c21) * r + l.c12 * l.c22 * vt;
  Eigen::MatrixXd out = z1 * z2.transpose() / (eps * delta);
  out.diagonal().array() += det_cross_gap(m, eps, delta, t - s) - mean / (eps * delta);
  return {out, p, std::max(eps, delta) >= p.gap()};
}

double det_cross_gap(const HurstModel& m, double eps, double delta, double g) {
  if (!(eps > 0.0) || !(delta > 0.0)) throw std::invalid_argument("eps and delta must be positive");
  if (g == 0.0) throw std::domain_error("cross covariance evaluated on the diagonal");
  const double p = m.two_h();
  if (std::abs(g) < std::max(eps, delta)) {
    return 0.5 * (pow_abs(g - eps, p) + pow_abs(g + delta, p) - pow_abs(g + delta - eps, p) - pow_abs(g, p)) /
           (eps * delta);
  }
  return pow_abs(g, p) / (2.0 * eps * delta) * Phi_det(m, delta / g, eps / g);
}

double det_cross(const HurstModel& m, double eps, double delta, double s, double t) {
  if (!(s > 0.0) || !(s < t)) throw std::domain_error("det_cross is defined on 0 < s < t");
  const auto p = SimplexPoint::from_times(s, t);
  return det_cross_gap(m, eps, delta, p.gap());
}

}  // namespace fbmiso
