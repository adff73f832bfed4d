#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fbmiso {

/// Hurst exponent and dimension of the driving fractional Brownian motion.
/// Only the regular regime 1/2 < H < 1 is supported.
class HurstModel {
 public:
  explicit HurstModel(double h, int d = 1) : h_(h), d_(d) {
    if (!(h > 0.5 && h < 1.0)) {
      throw std::invalid_argument("Hurst exponent must satisfy 1/2 < H < 1, got " + std::to_string(h));
    }
    if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  }

  double h() const { return h_; }
  double two_h() const { return 2.0 * h_; }
  int dim() const { return d_; }

 private:
  double h_;
  int d_;
};

/// Relative distance to the diagonal below which a pair built from two
/// absolute times is rejected: |t - s| < kDiagonalRelTol * max(s, t).
inline constexpr double kDiagonalRelTol = 1e-12;

/// An off-diagonal time pair (s, t) with s > 0, t > 0, s != t.
///
/// The pair is stored as (lo, gap) with lo = min(s, t) and gap = |t - s| so
/// that kernels can be evaluated arbitrarily close to the diagonal when the
/// caller knows the gap exactly (quadrature meshes do).  Points built from two
/// absolute times go through the relative diagonal test above because their
/// gap carries the rounding error of the subtraction.
class SimplexPoint {
 public:
  static SimplexPoint from_times(double s, double t) {
    if (!(s > 0.0) || !(t > 0.0) || !std::isfinite(s) || !std::isfinite(t)) {
      throw std::domain_error("simplex point needs s > 0 and t > 0");
    }
    const double gap = std::abs(t - s);
    if (gap < kDiagonalRelTol * std::max(s, t)) {
      throw std::domain_error("simplex point too close to the diagonal");
    }
    return SimplexPoint(std::min(s, t), gap, s < t);
  }

  /// `s_is_lo` selects which time of the pair is the smaller one.
  static SimplexPoint from_gap(double lo, double gap, bool s_is_lo = true) {
    if (!(lo > 0.0) || !(gap > 0.0) || !std::isfinite(lo) || !std::isfinite(gap)) {
      throw std::domain_error("simplex point needs lo > 0 and gap > 0");
    }
    return SimplexPoint(lo, gap, s_is_lo);
  }

  double lo() const { return lo_; }
  double gap() const { return gap_; }
  double hi() const { return lo_ + gap_; }
  double s() const { return ordered_ ? lo_ : hi(); }
  double t() const { return ordered_ ? hi() : lo_; }
  /// True when s < t, i.e. the point lies in the ordered simplex.
  bool ordered() const { return ordered_; }
  SimplexPoint swapped() const { return SimplexPoint(lo_, gap_, !ordered_); }

 private:
  SimplexPoint(double lo, double gap, bool ordered) : lo_(lo), gap_(gap), ordered_(ordered) {}

  double lo_;
  double gap_;
  bool ordered_;
};

namespace detail {

/// |x|^p with an explicit zero branch.
inline double pow_abs(double x, double p) {
  const double a = std::abs(x);
  if (a == 0.0) return 0.0;
  return std::exp(p * std::log(a));
}

/// |1 + x|^p - 1, accurate for small |x|.
inline double pow1p_m1(double x, double p) {
  if (x > -0.5 && x < 1.0) return std::expm1(p * std::log1p(x));
  return pow_abs(1.0 + x, p) - 1.0;
}

}  // namespace detail
}  // namespace fbmiso
