#pragma once

#include <vector>

namespace fbmiso {

/// Nodes and weights of a one-dimensional quadrature rule.
struct Rule1D {
  std::vector<double> x;
  std::vector<double> w;
  std::size_t size() const { return x.size(); }
};

/// Gauss-Legendre on [a, b].
Rule1D gauss_legendre(int n, double a = -1.0, double b = 1.0);
/// Gauss-Hermite for the standard normal density (weights sum to 1).
Rule1D gauss_hermite(int n);
/// Gauss-Laguerre for the weight exp(-u) on [0, inf).
Rule1D gauss_laguerre(int n);
/// Gauss rule for the weight rho exp(-rho^2/2) on [0, inf) (weights sum to 1),
/// i.e. the radial part of a standard bivariate normal.
Rule1D gauss_radial(int n);

/// Composite Gauss-Legendre over consecutive panels [b_k, b_{k+1}].
Rule1D composite_rule(const std::vector<double>& breakpoints, int points_per_panel);

/// Breakpoints of [a, b] refined geometrically toward `a`:
/// a, a + (b-a) ratio^layers, ..., a + (b-a) ratio, then `bulk` equal panels up to b.
std::vector<double> geometric_breakpoints(double a, double b, double ratio, int layers, int bulk);

/// Sorted union of breakpoint lists with near-duplicates removed.
std::vector<double> merge_breakpoints(std::vector<double> a, const std::vector<double>& b);

}  // namespace fbmiso
