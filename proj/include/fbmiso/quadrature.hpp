#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "fbmiso/gauss_rules.hpp"
#include "fbmiso/integrand.hpp"
#include "fbmiso/kernel.hpp"
#include "fbmiso/model.hpp"
#include "fbmiso/stats.hpp"

namespace fbmiso {

struct QuadratureSpec {
  int gh_order = 24;            // Gauss-Hermite points per Gaussian dimension
  int panel_points = 10;        // Gauss-Legendre points per spatial panel
  double grading_ratio = 0.15;  // geometric ratio of consecutive panels near a singular edge
  int layers = 0;               // graded panels toward the diagonal, 0: chosen from H and tolerance
  int bulk_panels = 4;          // uniform panels away from the singular edges
  double band = 0.0;            // width of an excluded diagonal band, 0 for none
  double tolerance = 1e-7;      // target relative size of the innermost panels
  int polar_points = 24;        // angular and radial points of the split polar rule
  int refinements = 2;          // refinement levels used for the error estimate
  long max_tensor_nodes = 2000000;
  int workers = 0;

  void validate() const;
};

struct QuadEstimate {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
  std::vector<double> levels;  // value at each mesh level, coarse to fine
};

/// Standard bivariate normal nodes.
struct PairRule {
  std::vector<double> z1, z2, w;
};
PairRule tensor_hermite_rule(int n);
/// Polar rule split along lines {z : n.z = 0}; exact in the radius for
/// polynomial-times-piecewise-constant integrands.
PairRule polar_split_rule(const std::vector<Eigen::Vector2d>& normals, int n_theta, int n_rho);

/// E< g(s,B_s) (x) g(t,B_t), Lambda(s,t) >.
double pointwise_F(const HurstModel& m, const Integrand& y, const SimplexPoint& p, const QuadratureSpec& spec);
/// Same expectation against an arbitrary kernel form.
double pointwise_F_form(const HurstModel& m, const Integrand& y, const KernelForm& f, const QuadratureSpec& spec);
/// Full 2d-dimensional tensor Gauss-Hermite evaluation, ignoring separability.
double pointwise_F_tensor(const HurstModel& m, const Integrand& y, const KernelForm& f, int order, long max_nodes);

/// int_{[0,T]^2} pointwise_F, computed on the ordered simplex and doubled.
QuadEstimate rhs_isometry(const HurstModel& m, const Integrand& y, double T, const QuadratureSpec& spec);
/// Same integral over the full square with both simplexes evaluated separately.
QuadEstimate rhs_isometry_full_square(const HurstModel& m, const Integrand& y, double T, const QuadratureSpec& spec);
/// <f, f>_H = int int <f_s, f_t> d2R(s,t) ds dt for a deterministic f.
QuadEstimate rkhs_norm_squared(const HurstModel& m, const std::function<Eigen::VectorXd(double)>& f, double T,
                               const QuadratureSpec& spec);

/// E|z^T S z + c|^q for a standard bivariate normal z.
double abs_moment_quadratic(const Eigen::Matrix2d& s, double c, double q, int angle_points = 48);

/// (E|Lambda(s,t)|^q)^(1/q), Frobenius norm for d > 1.
QuadEstimate lq_norm_Lambda(const HurstModel& m, const SimplexPoint& p, double q, const QuadratureSpec& spec);

/// (E int_{[0,T]^2} |Lambda^-(eps,eps) - Lambda|^q)^(1/q): spatial quadrature of
/// Monte Carlo draws of the pair law, with the same draws at every node.
EstimateWithCI lq_distance_finite_to_limit(const HurstModel& m, double eps, double q, double T,
                                           const QuadratureSpec& spec, std::size_t n_mc, std::uint64_t seed);
/// Deterministic version of the same norm for d = 1 (polar quadrature at every node).
QuadEstimate lq_distance_polar(const HurstModel& m, double eps, double q, double T, const QuadratureSpec& spec);

/// int int_{[0,T]^2} |det_cross(eps,delta) - d2R|^p ds dt.
QuadEstimate det_distance(const HurstModel& m, double eps, double delta, double p, double T,
                          const QuadratureSpec& spec);
/// int over the strip {t - eps^delta < s < t} u {s <= eps^delta} of the ordered simplex of |det_cross|^p.
QuadEstimate det_strip(const HurstModel& m, double eps, double delta, double p, double T, const QuadratureSpec& spec);

/// Ordered-simplex mesh in (gap, w) coordinates with lo = (T - gap) w.
struct SimplexMesh {
  Rule1D gap;
  Rule1D w;
  double gap_inner = 0.0;  // edge of the innermost gap panel
  double w_inner = 0.0;    // edge of the innermost w panel
};
/// The innermost gap and w panels absorb gap^(alpha_gap - 1) and
/// w^(alpha_w - 1) singularities; 0 selects 2H - 1 and H.
SimplexMesh simplex_mesh(const HurstModel& m, double T, const QuadratureSpec& spec, int level,
                         const std::vector<double>& gap_points = {}, double alpha_gap = 0.0, double alpha_w = 0.0);

/// int_{[0,T]^2} E|Lambda(s,t)|^q ds dt for d = 1.
QuadEstimate lambda_q_mass(const HurstModel& m, double q, double T, const QuadratureSpec& spec);

}  // namespace fbmiso
