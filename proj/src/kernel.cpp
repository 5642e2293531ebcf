#include "fraclap/kernel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fraclap/errors.hpp"

namespace fraclap {

namespace {

double squared_norm(std::span<const double> x) {
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  return r2;
}

}  // namespace

double riesz_constant(int n, double s) {
  if (n < 3 || !(s > 0.0) || !(s < n)) {
    throw DomainError("riesz_constant: need n >= 3 and 0 < s < n, got n=" + std::to_string(n) +
                      ", s=" + std::to_string(s));
  }
  // std::tgamma is accurate to a few ulp on this range.
  return std::pow(std::numbers::pi, s - 0.5 * n) * std::tgamma(0.5 * (n - s)) /
         std::tgamma(0.5 * s);
}

KernelSpec::KernelSpec(int n, double s)
    : n_(n), s_(s), c_(riesz_constant(n, s)), half_exponent_(0.5 * (s - n)) {}

double KernelSpec::from_squared_distance(double r2) const {
  return c_ * std::pow(r2, half_exponent_);
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x) {
  if (static_cast<int>(x.size()) != spec.dim()) {
    throw MismatchError("kernel_eval: point dimension does not match kernel dimension");
  }
  const double r2 = squared_norm(x);
  if (r2 == 0.0) throw SingularityError("kernel_eval: kernel is singular at x = 0");
  return spec.from_squared_distance(r2);
}

double kernel_eval(const KernelSpec& spec, const Vec3& x) {
  return kernel_eval(spec, std::span<const double>(x.data(), 3));
}

std::vector<double> kernel_gradient(const KernelSpec& spec, std::span<const double> x) {
  if (static_cast<int>(x.size()) != spec.dim()) {
    throw MismatchError("kernel_gradient: point dimension does not match kernel dimension");
  }
  const double r2 = squared_norm(x);
  if (r2 == 0.0) throw SingularityError("kernel_gradient: kernel is singular at x = 0");
  const double scale = spec.constant() * (spec.order() - spec.dim()) *
                       std::pow(r2, 0.5 * (spec.order() - spec.dim()) - 1.0);
  std::vector<double> g(x.begin(), x.end());
  for (double& v : g) v *= scale;
  return g;
}

Vec3 kernel_gradient(const KernelSpec& spec, const Vec3& x) {
  const auto g = kernel_gradient(spec, std::span<const double>(x.data(), 3));
  return {g[0], g[1], g[2]};
}

double fractional_symbol(double alpha, std::span<const double> xi) {
  if (!(alpha > 0.0) || alpha > 1.0) {
    throw DomainError("fractional_symbol: alpha must lie in (0, 1]");
  }
  const double r = std::sqrt(squared_norm(xi));
  if (r == 0.0) return 0.0;
  return std::pow(2.0 * std::numbers::pi * r, 2.0 * alpha);
}

}  // namespace fraclap
