#pragma once

#include <Eigen/Dense>

#include "fbmiso/model.hpp"
#include "fbmiso/regression.hpp"

namespace fbmiso {

/// Values (B_s, B_t) of the conditioning pair, one entry per coordinate.
struct PairSample {
  Eigen::VectorXd b_s;
  Eigen::VectorXd b_t;
};

struct KernelMatrix {
  Eigen::MatrixXd entries;
  SimplexPoint at;
  /// Set when max(eps, delta) >= |t - s|: the two increments overlap.
  bool scale_overlap = false;
};

/// Kernel in increment coordinates at the ordered pair lo < hi.  With
/// X = B_lo and D = B_hi - B_lo, the (i,j) entry is
///   M^{ij} = (a1 X^i + a2 D^i)(b1 X^j + b2 D^j) - delta_ij (mean - shift)
/// and the kernel at (s,t) is M when s < t and M^T when s > t.
struct KernelForm {
  SimplexPoint at;
  double a1 = 0.0, a2 = 0.0, b1 = 0.0, b2 = 0.0;
  double mean = 0.0;
  double shift = 0.0;

  double left(double x, double d) const { return a1 * x + a2 * d; }
  double right(double x, double d) const { return b1 * x + b2 * d; }
  /// Diagonal entry for one coordinate.
  double diagonal(double x, double d) const { return left(x, d) * right(x, d) - mean + shift; }
};

/// Form of Lambda(s,t) = W(s,t) + d2R I.  Drop `shift` to get W.
KernelForm limit_form(const HurstModel& m, const SimplexPoint& p);
/// Form of Lambda^-(eps,delta; s,t).
KernelForm finite_form(const HurstModel& m, double eps, double delta, const SimplexPoint& p);

/// Evaluates a form at a pair sample.
Eigen::MatrixXd evaluate_form(const KernelForm& f, const PairSample& x);

KernelMatrix W_kernel(const HurstModel& m, const SimplexPoint& p, const PairSample& x);
KernelMatrix Lambda_kernel(const HurstModel& m, const SimplexPoint& p, const PairSample& x);
KernelMatrix Lambda_finite(const HurstModel& m, double eps, double delta, const SimplexPoint& p,
                           const PairSample& x);

/// Reference evaluations written in the (B_s, B_t) basis with lambda weights.
KernelMatrix W_kernel_lambda(const HurstModel& m, const SimplexPoint& p, const PairSample& x);
KernelMatrix Lambda_finite_lambda(const HurstModel& m, double eps, double delta, const SimplexPoint& p,
                                  const PairSample& x);

/// (1/(eps delta)) E[B_{s,s+eps} B_{t,t+delta}] per coordinate, 0 < s < t.
double det_cross(const HurstModel& m, double eps, double delta, double s, double t);
/// Same quantity for a signed gap g = t - s of either sign.
double det_cross_gap(const HurstModel& m, double eps, double delta, double g);

}  // namespace fbmiso
