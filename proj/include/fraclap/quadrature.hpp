#pragma once

#include <span>
#include <vector>

namespace fraclap {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1], nodes in increasing order.
QuadratureRule gauss_legendre(int n);

/// Gauss-Legendre rule mapped to [a, b].
QuadratureRule gauss_legendre(int n, double a, double b);

/// n-point Gauss-Jacobi rule on [-1, 1] for the weight (1-x)^a (1+x)^b,
/// a, b > -1 (Golub-Welsch).
QuadratureRule gauss_jacobi(int n, double a, double b);

/// Rule for int_0^r rho^beta g(rho) drho with smooth g; the returned weights
/// already contain rho^beta, so the sum is sum_k w_k g(rho_k).
QuadratureRule radial_power_rule(int n, double beta, double r);

/// Partition-of-unity cutoff: 1 at t = 0, 0 for t >= 1, C-infinity in between,
///   eta(t) = exp(2 exp(-1/t) / (t - 1)).
double cutoff(double t);

/// Barycentric Lagrange weights of the interpolant through `nodes` evaluated
/// at x. Exact hits return a unit vector.
void lagrange_weights(std::span<const double> nodes, double x, std::span<double> out);

}  // namespace fraclap
