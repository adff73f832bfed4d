#pragma once

#include "fbmiso/model.hpp"

namespace fbmiso {

// Closed-form pieces of the fBm covariance R(s,t) = (t^2H + s^2H - |t-s|^2H)/2.
// All functions are pure.

double cov_R(const HurstModel& m, double s, double t);
double variance_v(const HurstModel& m, double s);

/// phi(s,t) = R(s,t) - v(s) on the ordered simplex 0 < s < t.
double phi(const HurstModel& m, double s, double t);
/// Same quantity for an ordered pair given as (lo, gap).
double phi_ordered(const HurstModel& m, double lo, double gap);

double dR_ds(const HurstModel& m, double s, double t);
double dR_dt(const HurstModel& m, double s, double t);

/// H(2H-1)|t-s|^(2H-2).
double d2R_dsdt(const HurstModel& m, double s, double t);
double d2R_gap(const HurstModel& m, double gap);

/// Determinant of the 2x2 covariance of (B_s, B_t), v(s)v(t) - R(s,t)^2.
double theta_det(const HurstModel& m, const SimplexPoint& p);
double theta_det(const HurstModel& m, double s, double t);

/// A(s,t) with theta_det = |t-s|^2H A(s,t).
double A_factor(const HurstModel& m, const SimplexPoint& p);
double A_factor(const HurstModel& m, double s, double t);

double vartheta1(const HurstModel& m, double x);
double vartheta2(const HurstModel& m, double x);

/// Phi(x,y) = |1+x|^2H - |1+x-y|^2H - 1 + |1-y|^2H.
double Phi_det(const HurstModel& m, double x, double y);

/// d(delta,s,t) = t^2H/2 vartheta1(delta/t) - |t-s|^2H/2 vartheta1(delta/(t-s)), 0 < s < t.
double d_func(const HurstModel& m, double delta, double s, double t);
double d_func_ordered(const HurstModel& m, double delta, double lo, double gap);

/// Cached powers for an ordered pair lo < hi = lo + gap, evaluated without
/// cancellation near the diagonal and near the axis.
struct OrderedPowers {
  double lo, gap, hi;
  double lo2h, gap2h, hi2h;
  double phi;    // R(lo,hi) - lo^2H
  double theta;  // lo^2H gap^2H - phi^2
};
OrderedPowers ordered_powers(const HurstModel& m, double lo, double gap);

}  // namespace fbmiso
