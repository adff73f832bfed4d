#include "fbmiso/regression.hpp"

#include <stdexcept>

namespace fbmiso {

using detail::pow1p_m1;
using detail::pow_abs;

namespace {

void require_scales(double eps, double delta) {
  if (!(eps > 0.0) || !(delta > 0.0)) throw std::invalid_argument("eps and delta must be positive");
}

OrderedPowers ordered_from_times(const HurstModel& m, double s, double t) {
  if (!(s > 0.0) || !(s < t)) throw std::domain_error("increment basis needs 0 < s < t");
  const auto p = SimplexPoint::from_times(s, t);
  return ordered_powers(m, p.lo(), p.gap());
}

// t^(2H-1) - gap^(2H-1) for t = lo + gap
double hi_minus_gap_pow(const HurstModel& m, const OrderedPowers& op) {
  const double q = m.two_h() - 1.0;
  if (op.lo < op.gap) return pow_abs(op.gap, q) * pow1p_m1(op.lo / op.gap, q);
  return pow_abs(op.hi, q) - pow_abs(op.gap, q);
}

}  // namespace

CoeffQuad n_entries(const HurstModel& m, double eps, double delta, double s, double t) {
  if (!(s >= 0.0) || !(t >= 0.0)) throw std::invalid_argument("n entries need s, t >= 0");
  require_scales(eps, delta);
  const double p = m.two_h();
  const double g = t - s;
  // |g|^2H (|1 + x/g|^2H - 1) without the 0/0 at g = 0
  const auto shifted = [&](double x) {
    if (g == 0.0) return pow_abs(x, p);
    return pow_abs(g, p) * pow1p_m1(x / g, p);
  };
  CoeffQuad n;
  n.c11 = s > 0.0 ? 0.5 * pow_abs(s, p) * vartheta1(m, eps / s) : 0.0;
  n.c12 = 0.5 * ((s > 0.0 ? pow_abs(s, p) * pow1p_m1(eps / s, p) : pow_abs(eps, p)) - shifted(-eps));
  n.c21 = 0.5 * ((t > 0.0 ? pow_abs(t, p) * pow1p_m1(delta / t, p) : pow_abs(delta, p)) - shifted(delta));
  n.c22 = t > 0.0 ? 0.5 * pow_abs(t, p) * vartheta1(m, delta / t) : 0.0;
  return n;
}

CoeffQuad o_entries(const HurstModel& m, double eps, double delta, double s, double t) {
  require_scales(eps, delta);
  const auto op = ordered_from_times(m, s, t);
  const double p = m.two_h();
  CoeffQuad o;
  o.c11 = 0.5 * op.lo2h * vartheta1(m, eps / op.lo);
  o.c12 = -0.5 * op.gap2h * vartheta1(m, -eps / op.gap);
  o.c21 = d_func_ordered(m, delta, op.lo, op.gap);
  o.c22 = 0.5 * pow_abs(op.gap, p) * vartheta1(m, delta / op.gap);
  return o;
}

CoeffQuad lambda_finite(const HurstModel& m, double eps, double delta, double s, double t) {
  require_scales(eps, delta);
  const auto pt = SimplexPoint::from_times(s, t);
  const double th = theta_det(m, pt);
  const double vs = variance_v(m, s);
  const double vt = variance_v(m, t);
  const double r = cov_R(m, s, t);
  const auto n = n_entries(m, eps, delta, s, t);
  CoeffQuad l;
  l.c11 = (n.c11 * vt - n.c12 * r) / th;
  l.c12 = (n.c12 * vs - n.c11 * r) / th;
  l.c21 = (n.c21 * vt - n.c22 * r) / th;
  l.c22 = (n.c22 * vs - n.c21 * r) / th;
  return l;
}

CoeffQuad lambda_limit(const HurstModel& m, double s, double t) {
  const auto pt = SimplexPoint::from_times(s, t);
  const double th = theta_det(m, pt);
  const double h = m.h();
  const double vs = variance_v(m, s);
  const double vt = variance_v(m, t);
  const double half_dvs = h * pow_abs(s, m.two_h() - 1.0);
  const double half_dvt = h * pow_abs(t, m.two_h() - 1.0);
  const double r = cov_R(m, s, t);
  const double rs = dR_ds(m, s, t);
  const double rt = dR_dt(m, s, t);
  CoeffQuad l;
  l.c11 = (half_dvs * vt - r * rs) / th;
  l.c12 = (rs * vs - r * half_dvs) / th;
  l.c21 = (rt * vt - r * half_dvt) / th;
  l.c22 = (half_dvt * vs - r * rt) / th;
  return l;
}

CoeffQuad eta_finite_ordered(const HurstModel& m, double eps, double delta, const OrderedPowers& op) {
  const double o11 = 0.5 * op.lo2h * vartheta1(m, eps / op.lo);
  const double o12 = -0.5 * op.gap2h * vartheta1(m, -eps / op.gap);
  const double o21 = d_func_ordered(m, delta, op.lo, op.gap);
  const double o22 = 0.5 * op.gap2h * vartheta1(m, delta / op.gap);
  CoeffQuad e;
  e.c11 = (o11 * op.gap2h - o12 * op.phi) / op.theta;
  e.c12 = (o12 * op.lo2h - o11 * op.phi) / op.theta;
  e.c21 = (o21 * op.gap2h - o22 * op.phi) / op.theta;
  e.c22 = (o22 * op.lo2h - o21 * op.phi) / op.theta;
  return e;
}

CoeffQuad eta_limit_ordered(const HurstModel& m, const OrderedPowers& op) {
  const double h = m.h();
  const double q = m.two_h() - 1.0;
  const double lo_q = pow_abs(op.lo, q);
  const double gap_q = pow_abs(op.gap, q);
  const double diff = hi_minus_gap_pow(m, op);
  const double k = h / op.theta;
  CoeffQuad e;
  e.c11 = k * (lo_q * op.gap2h - op.phi * gap_q);
  e.c12 = k * (op.lo2h * gap_q - lo_q * op.phi);
  e.c21 = k * (diff * op.gap2h - op.phi * gap_q);
  e.c22 = k * (op.lo2h * gap_q - op.phi * diff);
  return e;
}

CoeffQuad eta_finite(const HurstModel& m, double eps, double delta, double s, double t) {
  require_scales(eps, delta);
  return eta_finite_ordered(m, eps, delta, ordered_from_times(m, s, t));
}

CoeffQuad eta_limit(const HurstModel& m, double s, double t) {
  return eta_limit_ordered(m, ordered_from_times(m, s, t));
}

CoeffQuad eta_finite_unnormalized(const HurstModel& m, double eps, double delta, double s, double t) {
  require_scales(eps, delta);
  const auto op = ordered_from_times(m, s, t);
  auto e = eta_finite_ordered(m, eps, delta, op);
  e.c11 *= op.theta;
  e.c12 *= op.theta;
  e.c21 *= op.theta;
  e.c22 *= op.theta;
  return e;
}

CoeffQuad eta_limit_unnormalized(const HurstModel& m, double s, double t) {
  const auto op = ordered_from_times(m, s, t);
  auto e = eta_limit_ordered(m, op);
  e.c11 *= op.theta;
  e.c12 *= op.theta;
  e.c21 *= op.theta;
  e.c22 *= op.theta;
  return e;
}

}  // namespace fbmiso
