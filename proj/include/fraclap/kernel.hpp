#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace fraclap {

using Vec3 = Eigen::Vector3d;

/// Normalization constant of the Riesz kernel of order s in R^n,
///   c(n, s) = pi^(s - n/2) * Gamma((n - s)/2) / Gamma(s/2).
/// With this constant the Fourier transform of c|x|^(s-n) is |xi|^(-s)
/// under the convention f^(xi) = int f(x) exp(-2 pi i xi.x) dx.
/// Throws DomainError unless n >= 3 and 0 < s < n.
double riesz_constant(int n, double s);

/// Riesz kernel Gamma_s(x) = c(n, s) |x|^(s - n).
class KernelSpec {
public:
  KernelSpec(int n, double s);

  int dim() const { return n_; }
  double order() const { return s_; }
  double constant() const { return c_; }

  /// c |r|^(s-n) from the squared distance; no singularity check.
  double from_squared_distance(double r2) const;

private:
  int n_;
  double s_;
  double c_;
  double half_exponent_;  // (s - n)/2
};

/// Kernel value at x. Throws SingularityError at x = 0 and MismatchError when
/// x.size() != n.
double kernel_eval(const KernelSpec& spec, std::span<const double> x);
double kernel_eval(const KernelSpec& spec, const Vec3& x);

/// Gradient c (s - n) |x|^(s-n-2) x.
std::vector<double> kernel_gradient(const KernelSpec& spec, std::span<const double> x);
Vec3 kernel_gradient(const KernelSpec& spec, const Vec3& x);

/// Symbol (2 pi |xi|)^(2 alpha) of the fractional Laplacian. Requires
/// 0 < alpha <= 1 (alpha = 1 is the Laplacian itself).
double fractional_symbol(double alpha, std::span<const double> xi);

}  // namespace fraclap
