#pragma once

#include "fbmiso/covariance.hpp"
#include "fbmiso/model.hpp"

namespace fbmiso {

/// Four regression weights (or the four covariance entries they are built from).
struct CoeffQuad {
  double c11 = 0.0;
  double c12 = 0.0;
  double c21 = 0.0;
  double c22 = 0.0;
};

/// Covariances of the increments B_{s,s+eps}, B_{t,t+delta} with (B_s, B_t):
/// n11 = R(s,s+eps) - R(s,s), n12 = R(s+eps,t) - R(s,t),
/// n21 = R(s,t+delta) - R(s,t), n22 = R(t+delta,t) - R(t,t).
CoeffQuad n_entries(const HurstModel& m, double eps, double delta, double s, double t);

/// Same increments against the increment basis (B_s, B_{s,t}) on 0 < s < t.
CoeffQuad o_entries(const HurstModel& m, double eps, double delta, double s, double t);

/// Finite-scale weights of E[B_{s,s+eps} | B_s, B_t] = c11 B_s + c12 B_t and
/// E[B_{t,t+delta} | B_s, B_t] = c21 B_s + c22 B_t.  Any off-diagonal order.
CoeffQuad lambda_finite(const HurstModel& m, double eps, double delta, double s, double t);

/// (eps,delta) -> 0 limits of lambda_finite / eps and / delta.
CoeffQuad lambda_limit(const HurstModel& m, double s, double t);

/// Increment-basis weights on 0 < s < t:
/// E[B_{s,s+eps} | .] = c11 B_s + c12 B_{s,t}, E[B_{t,t+delta} | .] = c21 B_s + c22 B_{s,t}.
CoeffQuad eta_finite(const HurstModel& m, double eps, double delta, double s, double t);
CoeffQuad eta_limit(const HurstModel& m, double s, double t);

/// Theta * eta, without the division by the determinant.
CoeffQuad eta_finite_unnormalized(const HurstModel& m, double eps, double delta, double s, double t);
CoeffQuad eta_limit_unnormalized(const HurstModel& m, double s, double t);

/// Ordered-pair variants taking the exact gap, used on quadrature meshes.
CoeffQuad eta_finite_ordered(const HurstModel& m, double eps, double delta, const OrderedPowers& op);
CoeffQuad eta_limit_ordered(const HurstModel& m, const OrderedPowers& op);

}  // namespace fbmiso
