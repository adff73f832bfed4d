#include "fbmiso/covariance.hpp"

#include <stdexcept>

namespace fbmiso {

using detail::pow1p_m1;
using detail::pow_abs;

namespace {

void require_nonnegative(double s, double t) {
  if (!(s >= 0.0) || !(t >= 0.0)) throw std::invalid_argument("covariance needs s >= 0 and t >= 0");
}

void require_off_diagonal(double s, double t) {
  if (std::abs(t - s) < kDiagonalRelTol * std::max(s, t) || s == t) {
    throw std::domain_error("kernel evaluated on the diagonal s = t");
  }
}

}  // namespace

double cov_R(const HurstModel& m, double s, double t) {
  require_nonnegative(s, t);
  const double p = m.two_h();
  return 0.5 * (pow_abs(t, p) + pow_abs(s, p) - pow_abs(t - s, p));
}

double variance_v(const HurstModel& m, double s) {
  if (!(s >= 0.0)) throw std::invalid_argument("variance needs s >= 0");
  return pow_abs(s, m.two_h());
}

double phi_ordered(const HurstModel& m, double lo, double gap) {
  const double p = m.two_h();
  const double lo2h = pow_abs(lo, p);
  const double gap2h = pow_abs(gap, p);
  if (gap <= lo) {
    // hi^2H - lo^2H carries the first-order term in gap
    const double dhl = lo2h * pow1p_m1(gap / lo, p);
    return 0.5 * (dhl - gap2h);
  }
  const double dhg = gap2h * pow1p_m1(lo / gap, p);
  return 0.5 * (dhg - lo2h);
}

double phi(const HurstModel& m, double s, double t) {
  if (!(s > 0.0) || !(s < t)) throw std::domain_error("phi is defined on 0 < s < t");
  return phi_ordered(m, s, t - s);
}

double dR_ds(const HurstModel& m, double s, double t) {
  const auto p = SimplexPoint::from_times(s, t);
  const double h = m.h();
  const double sign = p.ordered() ? 1.0 : -1.0;
  return h * pow_abs(s, m.two_h() - 1.0) + h * sign * pow_abs(p.gap(), m.two_h() - 1.0);
}

double dR_dt(const HurstModel& m, double s, double t) { return dR_ds(m, t, s); }

double d2R_gap(const HurstModel& m, double gap) {
  if (!(gap > 0.0)) throw std::domain_error("d2R needs a positive gap");
  const double h = m.h();
  return h * (2.0 * h - 1.0) * pow_abs(gap, m.two_h() - 2.0);
}

double d2R_dsdt(const HurstModel& m, double s, double t) {
  require_nonnegative(s, t);
  require_off_diagonal(s, t);
  return d2R_gap(m, std::abs(t - s));
}

OrderedPowers ordered_powers(const HurstModel& m, double lo, double gap) {
  const double p = m.two_h();
  OrderedPowers o{};
  o.lo = lo;
  o.gap = gap;
  o.hi = lo + gap;
  o.lo2h = pow_abs(lo, p);
  o.gap2h = pow_abs(gap, p);
  o.hi2h = pow_abs(o.hi, p);
  o.phi = phi_ordered(m, lo, gap);
  o.theta = o.lo2h * o.gap2h - o.phi * o.phi;
  return o;
}

double theta_det(const HurstModel& m, const SimplexPoint& p) {
  return ordered_powers(m, p.lo(), p.gap()).theta;
}

double theta_det(const HurstModel& m, double s, double t) {
  return theta_det(m, SimplexPoint::from_times(s, t));
}

double A_factor(const HurstModel& m, const SimplexPoint& p) {
  const double e = m.two_h();
  const double a = pow_abs(p.lo(), e);
  const double b = pow_abs(p.hi(), e);
  const double c = pow_abs(p.gap(), e);
  if (p.gap() > p.lo()) {
    // with u = (1 + lo/gap)^2H - 1 the O(gap^2H) terms cancel exactly
    const double u = pow1p_m1(p.lo() / p.gap(), e);
    return 0.25 * (4.0 * a + 2.0 * a * u - c * u * u - a * a / c);
  }
  const double diff = a * pow1p_m1(p.gap() / p.lo(), e);
  return 0.25 * (2.0 * a + 2.0 * b - c - diff * diff / c);
}

double A_factor(const HurstModel& m, double s, double t) {
  return A_factor(m, SimplexPoint::from_times(s, t));
}

double vartheta1(const HurstModel& m, double x) {
  const double p = m.two_h();
  // for |x| > 1 factor out |x|^2H so the two large powers do not cancel
  if (std::abs(x) > 1.0) return pow_abs(x, p) * pow1p_m1(1.0 / x, p) - 1.0;
  return pow1p_m1(x, p) - pow_abs(x, p);
}

double vartheta2(const HurstModel& m, double x) { return pow1p_m1(x, m.two_h()); }

double Phi_det(const HurstModel& m, double x, double y) {
  const double p = m.two_h();
  return pow1p_m1(x, p) - pow1p_m1(x - y, p) + pow1p_m1(-y, p);
}

double d_func_ordered(const HurstModel& m, double delta, double lo, double gap) {
  const double p = m.two_h();
  if (lo < gap) {
    // difference of F(x) = (x + lo)^2H - x^2H, which stays accurate as lo -> 0
    const auto F = [&](double x) { return pow_abs(x, p) * pow1p_m1(lo / x, p); };
    return 0.5 * (F(gap + delta) - F(gap));
  }
  const double hi = lo + gap;
  return 0.5 * (pow_abs(hi, p) * vartheta1(m, delta / hi) - pow_abs(gap, p) * vartheta1(m, delta / gap));
}

double d_func(const HurstModel& m, double delta, double s, double t) {
  if (!(s > 0.0) || !(s < t)) throw std::domain_error("d(delta,s,t) is defined on 0 < s < t");
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  return d_func_ordered(m, delta, s, t - s);
}

}  // namespace fbmiso
