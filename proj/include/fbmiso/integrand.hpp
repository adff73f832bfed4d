#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

namespace fbmiso {

/// Y_t = g(t, B_t) with g : [0,T] x R^d -> R^d.
///
/// Separable integrands have g_i(t, x) = f_i(t, x_i); the quadrature layer
/// uses this to factor expectations over independent coordinates.
class Integrand {
 public:
  using Full = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;
  using Coordinate = std::function<double(int, double, double)>;

  /// g(t, x) = c.
  static Integrand constant(const Eigen::VectorXd& c);
  /// g(t, x) = x.
  static Integrand identity(int d);
  /// g(t, x)_i = sgn(x_i), with sgn(0) = 0.
  static Integrand sign(int d);
  /// g(t, x)_i = f(i, t, x_i).  `degree` is the polynomial degree in x_i, or -1.
  static Integrand separable(std::string name, int d, Coordinate f, int degree = -1, bool jump_at_zero = false);
  /// Arbitrary g; expectations fall back to a full tensor rule.
  static Integrand general(std::string name, int d, Full g, int degree = -1);

  Eigen::VectorXd operator()(double t, const Eigen::VectorXd& x) const;
  double coordinate(int i, double t, double xi) const;

  const std::string& name() const { return name_; }
  int dim() const { return d_; }
  bool is_separable() const { return static_cast<bool>(coord_); }
  bool is_constant() const { return constant_; }
  /// Polynomial degree in the Gaussian arguments, -1 when not a polynomial.
  int degree() const { return degree_; }
  /// True when some coordinate function jumps at x_i = 0.
  bool jump_at_zero() const { return jump_; }

 private:
  std::string name_;
  int d_ = 1;
  Full full_;
  Coordinate coord_;
  int degree_ = -1;
  bool jump_ = false;
  bool constant_ = false;
};

/// Builds an integrand from a descriptor: "constant", "constant:c1,c2,...",
/// "identity" or "sign".
Integrand make_integrand(const std::string& descriptor, int d);

}  // namespace fbmiso
