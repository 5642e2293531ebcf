#pragma once

// Closed forms used as references by the tests. Nothing here calls into the
// library.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

// c(3, s) = pi^(s - 3/2) Gamma((3 - s)/2) / Gamma(s/2).
inline double riesz3(double s) { return std::pow(pi, s - 1.5) * std::tgamma(0.5 * (3.0 - s)) / std::tgamma(0.5 * s); }

// int_{S^2} |x - y|^(-mu) Y_l(y) dS(y) = m_l Y_l(x) for unit x, 0 < mu < 2:
//   m_l = 2^(2 - mu) pi Gamma(1 - mu/2) Gamma(l + mu/2) / (Gamma(mu/2) Gamma(l + 2 - mu/2)).
// Products of Gammas are formed through lgamma to stay finite at large l.
inline double sphere_multiplier(double mu, int l) {
  const double lg = std::lgamma(1.0 - 0.5 * mu) + std::lgamma(l + 0.5 * mu) - std::lgamma(0.5 * mu) -
                    std::lgamma(l + 2.0 - 0.5 * mu);
  return std::pow(2.0, 2.0 - mu) * pi * std::exp(lg);
}

// Eigenvalue of f -> int Gamma_s(x - y) f(y) dS(y) on the unit sphere.
inline double eigenvalue(double s, int l) { return riesz3(s) * sphere_multiplier(3.0 - s, l); }

// int over the sphere of radius R of Gamma_s(x - y) dS(y) at distance r from its centre.
inline double sphere_potential(double s, double radius, double r) {
  if (r == 0.0) return 4.0 * pi * riesz3(s) * std::pow(radius, s - 1.0);
  return riesz3(s) * 2.0 * pi * radius / r *
         (std::pow(r + radius, s - 1.0) - std::pow(std::abs(r - radius), s - 1.0)) / (s - 1.0);
}

// Composite Simpson rule with n (even) intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double sum = f(a) + f(b);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return sum * h / 3.0;
}

// Simpson after the substitution t = a + (b - a) u^k, which absorbs an
// integrable power singularity at t = a.
inline double simpson_graded(const std::function<double(double)>& f, double a, double b, int n, int k) {
  return simpson(
      [&](double u) {
        if (u == 0.0) return 0.0;
        return f(a + (b - a) * std::pow(u, k)) * (b - a) * k * std::pow(u, k - 1);
      },
      0.0, 1.0, n);
}

}  // namespace oracle
