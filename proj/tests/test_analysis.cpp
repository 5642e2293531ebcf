#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "fraclap/analysis.hpp"
#include "fraclap/errors.hpp"
#include "oracles.hpp"

using namespace fraclap;

namespace {

// c(2, s) = pi^(s - 1) Gamma((2 - s)/2) / Gamma(s/2).
double riesz2(double s) { return std::pow(oracle::pi, s - 1.0) * std::tgamma(0.5 * (2.0 - s)) / std::tgamma(0.5 * s); }

double composition_constant(double a) {
  return oracle::riesz3(2.0 * a) * oracle::riesz3(3.0 - 2.0 * a) / (oracle::pi * riesz2(2.0 * a - 1.0) * riesz2(2.0 - 2.0 * a));
}

// int_{R^3} Gamma_s(x - y) exp(-pi |y|^2) dy at |x| = r, by shells of radius
// rho: the mean of |x - y|^(s-3) over a shell is
// ((r + rho)^(s-1) - |r - rho|^(s-1)) / (2 r rho (s - 1)).
double gaussian_potential(double s, double r) {
  auto shell = [&](double rho) {
    const double g = std::exp(-oracle::pi * rho * rho) * 4.0 * oracle::pi * rho * rho;
    if (r == 0.0) return g * std::pow(rho, s - 3.0);
    if (rho == 0.0) return 0.0;
    return g * (std::pow(r + rho, s - 1.0) - std::pow(std::abs(r - rho), s - 1.0)) / (2.0 * r * rho * (s - 1.0));
  };
  double sum;
  if (r == 0.0) {
    sum = oracle::simpson_graded(shell, 0.0, 8.0, 4000, 4);
  } else {
    sum = oracle::simpson_graded([&](double t) { return shell(r - t); }, 0.0, r, 2000, 3) +
          oracle::simpson_graded(shell, r, 8.0, 8000, 3);
  }
  return oracle::riesz3(s) * sum;
}

// W^{1/2,2} seminorm of f(x) = x1 on the unit square. With d = x - y the
// double integral becomes int_{[-1,1]^2} d1^2 / |d|^3 (1 - |d1|)(1 - |d2|) dd,
// and in polar form on the first quadrant the radial integral is a polynomial.
double linear_seminorm() {
  auto angular = [](double t) {
    const double c = std::cos(t), s = std::sin(t);
    const double r = 1.0 / std::max(c, s);
    return c * c * (r - 0.5 * (c + s) * r * r + c * s * r * r * r / 3.0);
  };
  const double q = oracle::simpson(angular, 0.0, 0.25 * oracle::pi, 2000) +
                   oracle::simpson(angular, 0.25 * oracle::pi, 0.5 * oracle::pi, 2000);
  return std::sqrt(4.0 * q);
}

}  // namespace

TEST_CASE("Flat composition constant") {
  for (double a : {0.6, 0.75, 0.9}) CHECK(flat_composition_constant(a) == doctest::Approx(composition_constant(a)).epsilon(1e-13));
  CHECK(flat_composition_constant(0.6) == doctest::Approx(flat_composition_constant(0.9)).epsilon(1e-13));
  CHECK_THROWS_AS(flat_composition_constant(0.5), DomainError);
}

TEST_CASE("Planar convolution of Riesz kernels") {
  const FlatSemigroupResult r = flat_semigroup_check(0.75, Vec2(0.0, 0.0), Vec2(1.0, 0.0));
  CHECK(r.rhs == doctest::Approx(oracle::pi).epsilon(1e-15));
  CHECK(r.normalization == doctest::Approx(composition_constant(0.75)));
  CHECK(r.lhs / r.rhs == doctest::Approx(composition_constant(0.75)).epsilon(1e-6));
  // The product is homogeneous of degree -1 in the separation.
  const FlatSemigroupResult far = flat_semigroup_check(0.75, Vec2(1.0, 1.0), Vec2(1.0, 3.0));
  CHECK(far.lhs == doctest::Approx(0.5 * r.lhs).epsilon(1e-6));
  CHECK_THROWS_AS(flat_semigroup_check(0.75, Vec2(1.0, 1.0), Vec2(1.0, 1.0)), DomainError);
}

TEST_CASE("Composition spectrum") {
  const double a = 0.75;
  const CompositionReport rep = composition_spectrum_report(a, 40, 4);
  REQUIRE(rep.rows.size() == 41);
  for (const CompositionRow& row : rep.rows) {
    const double expected = oracle::eigenvalue(2.0 * a, row.l) * oracle::eigenvalue(3.0 - 2.0 * a, row.l) / oracle::eigenvalue(2.0, row.l);
    CHECK(row.ratio == doctest::Approx(expected).epsilon(1e-10));
  }
  // At alpha = 3/4 both factors are lambda_l(3/2) = 4 sqrt(2) pi Gamma(l + 3/4) / Gamma(l + 5/4) ...
  CHECK(rep.rows[0].ratio == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(rep.rows[1].ratio == doctest::Approx(8.64).epsilon(1e-12));
  // ... so the product approaches K(3/4) from below and the difference with
  // lambda_l(2) decays at the same rate as lambda_l(2).
  CHECK(rep.limit_ratio == doctest::Approx(composition_constant(a)).epsilon(1e-3));
  CHECK(std::abs(rep.slope_gap) < 0.05);
  CHECK(rep.normalized_gap > 0.8);
  CHECK_THROWS_AS(composition_spectrum_report(a, 3), DomainError);
}

TEST_CASE("Norm equivalence profile") {
  for (double a : {0.6, 0.9}) {
    const NormEquivalence n = norm_equivalence_profile(a, 30);
    REQUIRE(n.values.size() == 31);
    double lo = INFINITY, hi = 0.0;
    for (int l = 0; l <= 30; ++l) {
      const double v = oracle::eigenvalue(2.0 * a, l) * std::pow(1.0 + l * (l + 1.0), a - 0.5);
      CHECK(n.values[l] == doctest::Approx(v).epsilon(1e-10));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    CHECK(n.lower == doctest::Approx(lo).epsilon(1e-10));
    CHECK(n.upper == doctest::Approx(hi).epsilon(1e-10));
    CHECK(n.lower > 0.0);
  }
}

TEST_CASE("Besov seminorm of smooth functions") {
  const double exact = linear_seminorm();
  auto x1 = [](const Vec2& x) { return x.x(); };
  CHECK(besov_seminorm_reference(x1, 1.0, 0.5, 2.0) == doctest::Approx(exact).epsilon(1e-5));

  const int m = 32;
  Eigen::MatrixXd f(m, m), c = Eigen::MatrixXd::Constant(m, m, 3.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) f(i, j) = (i + 0.5) / m;
  CHECK(besov_seminorm_patch(f, 1.0, 0.5, 2.0) == doctest::Approx(exact).epsilon(1e-3));
  CHECK(besov_seminorm_patch(c, 1.0, 0.5, 2.0) == 0.0);
  // Scaling f by t scales the seminorm by t.
  CHECK(besov_seminorm_patch(2.5 * f, 1.0, 0.5, 2.0) == doctest::Approx(2.5 * besov_seminorm_patch(f, 1.0, 0.5, 2.0)).epsilon(1e-13));
  // Stretching the patch by L scales the seminorm by L^(2/p - s).
  CHECK(besov_seminorm_patch(f, 2.0, 0.5, 2.0) == doctest::Approx(std::pow(2.0, 0.5) * besov_seminorm_patch(f, 1.0, 0.5, 2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(besov_seminorm_patch(f, 1.0, 1.0, 2.0), DomainError);
  CHECK_THROWS_AS(besov_seminorm_patch(Eigen::MatrixXd::Zero(2, 2), 1.0, 0.5, 2.0), DomainError);
}

TEST_CASE("Riesz potential of a Gaussian") {
  for (double s : {1.4, 1.8})
    for (double r : {0.0, 0.5, 1.0}) {
      INFO("s = " << s << ", r = " << r);
      CHECK(riesz_gaussian_reference(s, r) == doctest::Approx(gaussian_potential(s, r)).epsilon(1e-6));
    }
  const GridFunction g = sample_grid([](const Vec3& x) { return std::exp(-oracle::pi * x.squaredNorm()); }, Vec3::Zero(), 8.0, 33);
  CHECK(g.spacing == doctest::Approx(0.25));
  CHECK(g.point(16, 16, 16).norm() < 1e-14);
  const std::vector<Vec3> pts{Vec3::Zero(), Vec3(0.3, 0.2, -0.1), Vec3(0.0, 0.9, 0.0)};
  const std::vector<double> u = riesz_potential_apply(g, 1.4, pts);
  for (std::size_t i = 0; i < pts.size(); ++i)
    CHECK(u[i] == doctest::Approx(gaussian_potential(1.4, pts[i].norm())).epsilon(2e-3));
  CHECK_THROWS_AS(riesz_potential_apply(g, 3.0, pts), DomainError);
}
