#include "fraclap/quadrature.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "fraclap/errors.hpp"

namespace fraclap {

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw DomainError("gauss_legendre: need n >= 1");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Tricomi initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 1 ? x : p1;
      const double pnm1 = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

QuadratureRule gauss_legendre(int n, double a, double b) {
  QuadratureRule rule = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = a + half * (rule.nodes[i] + 1.0);
    rule.weights[i] *= half;
  }
  return rule;
}

QuadratureRule gauss_jacobi(int n, double a, double b) {
  if (n < 1) throw DomainError("gauss_jacobi: need n >= 1");
  if (!(a > -1.0) || !(b > -1.0)) throw DomainError("gauss_jacobi: need a, b > -1");

  Eigen::VectorXd diag(n);
  Eigen::VectorXd off(std::max(n - 1, 0));
  const double ab = a + b;
  diag(0) = (b - a) / (ab + 2.0);
  for (int k = 1; k < n; ++k) {
    const double t = 2.0 * k + ab;
    diag(k) = (b * b - a * a) / (t * (t + 2.0));
    off(k - 1) = std::sqrt(4.0 * k * (k + a) * (k + b) * (k + ab) / (t * t * (t + 1.0) * (t - 1.0)));
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) throw Error("gauss_jacobi: eigensolver failed");

  const double mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) +
                              std::lgamma(b + 1.0) - std::lgamma(ab + 2.0));
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    rule.nodes[k] = solver.eigenvalues()(k);
    const double v = solver.eigenvectors()(0, k);
    rule.weights[k] = mu0 * v * v;
  }
  return rule;
}

QuadratureRule radial_power_rule(int n, double beta, double r) {
  QuadratureRule rule = gauss_jacobi(n, 0.0, beta);
  const double scale = std::pow(0.5 * r, beta + 1.0);
  for (int k = 0; k < n; ++k) {
    rule.nodes[k] = 0.5 * r * (rule.nodes[k] + 1.0);
    rule.weights[k] *= scale;
  }
  return rule;
}

double cutoff(double t) {
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  return std::exp(2.0 * std::exp(-1.0 / t) / (t - 1.0));
}

void lagrange_weights(std::span<const double> nodes, double x, std::span<double> out) {
  const std::size_t p = nodes.size();
  for (std::size_t j = 0; j < p; ++j) {
    if (x == nodes[j]) {
      for (std::size_t k = 0; k < p; ++k) out[k] = k == j ? 1.0 : 0.0;
      return;
    }
  }
  double total = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    double bary = 1.0;
    for (std::size_t k = 0; k < p; ++k) {
      if (k != j) bary *= nodes[j] - nodes[k];
    }
    out[j] = 1.0 / (bary * (x - nodes[j]));
    total += out[j];
  }
  for (std::size_t j = 0; j < p; ++j) out[j] /= total;
}

}  // namespace fraclap
