#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "fraclap/errors.hpp"
#include "fraclap/field.hpp"
#include "oracles.hpp"

using namespace fraclap;

namespace {

double bump(double r, double radius) {
  const double t = r * r / (radius * radius);
  return t < 1.0 ? std::exp(-1.0 / (1.0 - t)) : 0.0;
}

// C(3, alpha) of the singular-integral definition.
double frac_constant(double alpha) {
  return std::pow(4.0, alpha) * std::tgamma(1.5 + alpha) / (std::pow(oracle::pi, 1.5) * std::abs(std::tgamma(-alpha)));
}

// (-Delta)^alpha psi at distance r > radius from the bump centre:
// -C int psi(y) |x - y|^(-3 - 2 alpha) dy, by shells of radius rho.
double frac_laplacian_outside(double alpha, double radius, double r) {
  const double p = 3.0 + 2.0 * alpha;
  auto shell = [&](double rho) {
    if (rho == 0.0 || rho >= radius) return 0.0;
    const double mean = 2.0 * oracle::pi * (std::pow(r - rho, 2.0 - p) - std::pow(r + rho, 2.0 - p)) / (r * rho * (p - 2.0));
    return bump(rho, radius) * rho * rho * mean;
  };
  return -frac_constant(alpha) * oracle::simpson(shell, 0.0, radius, 4000);
}

}  // namespace

TEST_CASE("Potential of the unit density on a sphere") {
  const double alpha = 0.75;
  const MeshPtr m = make_sphere_mesh(1.0, Vec3::Zero(), 24, 48);
  FieldEvaluator field(Density::constant(m, 1.0), alpha);
  const Vec3 dir = Vec3(1.0, -2.0, 0.5).normalized();
  for (double r : {0.0, 0.5, 0.85, 1.15, 2.0, 10.0}) {
    INFO("r = " << r);
    const FieldSample s = field.sample(r * dir);
    CHECK(s.value == doctest::Approx(oracle::sphere_potential(1.5, 1.0, r)).epsilon(1e-8));
    CHECK(s.dist == doctest::Approx(std::abs(1.0 - r)));
    CHECK((s.quadrature == QuadratureTag::Upsampled) == (std::abs(1.0 - r) < 2.0 * m->spacing()));
  }
  // u(2) = 2 pi (sqrt 3 - 1) for this order.
  CHECK(field.sample(2.0 * dir).value == doctest::Approx(2.0 * oracle::pi * (std::sqrt(3.0) - 1.0)).epsilon(1e-10));
  CHECK_THROWS_AS(field.sample(1.0005 * dir), SingularityError);
  CHECK(to_string(QuadratureTag::Upsampled) == "upsampled");
}

TEST_CASE("Potential on a displaced sphere of another radius") {
  const double alpha = 0.6;
  const Vec3 c(0.5, 0.5, -1.0);
  const MeshPtr m = make_sphere_mesh(0.7, c, 24, 48);
  const std::vector<FieldSample> s =
      eval_potential(Density::constant(m, 2.0), alpha, {c, c + Vec3(0.0, 0.3, 0.0), c + Vec3(1.4, 0.0, 0.0)});
  for (const FieldSample& f : s)
    CHECK(f.value == doctest::Approx(2.0 * oracle::sphere_potential(1.2, 0.7, (f.point - c).norm())).epsilon(1e-8));
}

TEST_CASE("Closest points on an ellipsoid") {
  const SurfaceDescriptor e = SurfaceDescriptor::ellipsoid(1.5, 1.0, 0.5, Vec3(0.1, 0.2, 0.3));
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-2.5, 2.5);
  for (int k = 0; k < 50; ++k) {
    const Vec3 x = Vec3(u(rng), u(rng), u(rng));
    const SurfaceProjection p = project_to_surface(e, x);
    const Vec3 y = (p.point - e.center).cwiseQuotient(e.axes);
    CHECK(y.squaredNorm() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.dist == doctest::Approx((x - p.point).norm()));
    CHECK(p.inside == (((x - e.center).cwiseQuotient(e.axes)).squaredNorm() < 1.0));
    // Brute-force minimum over a fine parameter grid.
    double best = INFINITY;
    for (int i = 0; i <= 300; ++i)
      for (int j = 0; j < 600; ++j) {
        const double t = oracle::pi * i / 300.0, f = 2.0 * oracle::pi * j / 600.0;
        best = std::min(best, (x - e.map(Vec3(std::sin(t) * std::cos(f), std::sin(t) * std::sin(f), std::cos(t)))).norm());
      }
    CHECK(p.dist <= best + 1e-12);
    CHECK(p.dist >= best - 2e-3);
  }
  // The centre of a prolate spheroid sits on the focal segment; any answer must be at distance c.
  const SurfaceDescriptor s = SurfaceDescriptor::ellipsoid(2.0, 1.0, 1.0);
  CHECK(surface_distance(s, Vec3::Zero()) == doctest::Approx(1.0));
  CHECK(surface_distance(SurfaceDescriptor::sphere(2.0), Vec3(0.0, 3.0, 0.0)) == doctest::Approx(1.0));
}

TEST_CASE("Far-field decay") {
  const MeshPtr m = make_ellipsoid_mesh(1.0, 0.8, 0.6, 12, 24);
  const Density phi(m, Eigen::VectorXd::Constant(m->size(), 1.0) + 0.2 * Eigen::VectorXd::LinSpaced(m->size(), -1.0, 1.0));
  for (double alpha : {0.6, 0.9}) {
    const DecayFit fit = decay_fit(phi, alpha, {20.0, 40.0, 80.0, 160.0});
    CHECK(fit.expected_exponent == doctest::Approx(2.0 * alpha - 3.0));
    CHECK(std::abs(fit.exponent - fit.expected_exponent) < 5e-3);
    CHECK(fit.prefactor == doctest::Approx(fit.expected_prefactor).epsilon(2e-2));
    CHECK(fit.samples.size() == 4);
  }
  CHECK_THROWS_AS(decay_fit(phi, 0.75, {3.0, 40.0}), DomainError);
  CHECK_THROWS_AS(decay_fit(Density::constant(m, 0.0), 0.75, {20.0, 40.0}), DomainError);
}

TEST_CASE("Bump integral") {
  const BumpSpec b{Vec3(1.0, 0.0, 0.0), 0.8};
  const double expected = 4.0 * oracle::pi * oracle::simpson([](double r) { return bump(r, 0.8) * r * r; }, 0.0, 0.8, 4000);
  CHECK(b.integral() == doctest::Approx(expected).epsilon(1e-9));
  CHECK(b(Vec3(1.0, 0.0, 0.0)) == doctest::Approx(std::exp(-1.0)));
  CHECK(b(Vec3(1.0, 0.8, 0.0)) == 0.0);
}

TEST_CASE("Fractional Laplacian of the bump") {
  const double alpha = 0.75;
  CHECK(frac_laplacian_constant(alpha) == doctest::Approx(frac_constant(alpha)).epsilon(1e-14));
  const BumpSpec b{Vec3::Zero(), 0.5};
  // Outside the support the singular integral has no cancellation to resolve.
  for (double r : {0.6, 0.9, 1.5}) {
    const double direct = frac_laplacian_bump_direct(b, alpha, Vec3(0.0, r, 0.0));
    CHECK(direct == doctest::Approx(frac_laplacian_outside(alpha, 0.5, r)).epsilon(1e-6));
  }
  const GridFunction g = frac_laplacian_bump(b, alpha, GridSpec{64, 8.0, 2});
  double sum = 0.0, l1 = 0.0;
  for (double v : g.values) {
    sum += v;
    l1 += std::abs(v);
  }
  CHECK(std::abs(sum) < 1e-10 * l1);
  for (auto [i, j, k] : {std::array{32, 32, 32}, {36, 30, 32}, {34, 33, 31}}) {
    const Vec3 x = g.point(i, j, k);
    CHECK(g.at(i, j, k) == doctest::Approx(frac_laplacian_bump_direct(b, alpha, x)).epsilon(2e-3));
  }
  // The transform of the bump decays only like exp(-c sqrt|xi|), so the
  // samples converge slowly where the support ends.
  const double edge = frac_laplacian_outside(alpha, 0.5, 0.5);
  CHECK(std::abs(g.at(40, 32, 32) / edge - 1.0) < 0.2);
  const GridFunction fine = frac_laplacian_bump(b, alpha, GridSpec{128, 8.0, 2});
  CHECK(std::abs(fine.at(80, 64, 64) / edge - 1.0) < 0.02);
  CHECK_THROWS_AS(frac_laplacian_bump(b, 1.0), DomainError);
  CHECK_THROWS_AS(frac_laplacian_bump(b, alpha, GridSpec{64, 3.0, 2}), DomainError);
}

TEST_CASE("Weak residual on a coarse grid") {
  const MeshPtr m = make_sphere_mesh(1.0, Vec3::Zero(), 12, 24);
  const Density phi = Density::constant(m, 1.0);
  const WeakResidualReport w = weak_residual(phi, 0.75, BumpSpec{Vec3(2.5, 0.0, 0.0), 0.5}, GridSpec{48, 8.0, 2});
  CHECK(w.residual < 2e-2);
  CHECK(w.grid_n == 48);
  CHECK(std::abs(w.tail) <= w.tail_bound);
  CHECK_THROWS_AS(weak_residual(phi, 0.75, BumpSpec{Vec3(1.2, 0.0, 0.0), 0.5}), DomainError);
}

TEST_CASE("Field CSV") {
  const MeshPtr m = make_sphere_mesh(1.0, Vec3::Zero(), 8, 16);
  const auto samples = eval_potential(Density::constant(m, 1.0), 0.75, {Vec3(0.0, 0.0, 2.0)});
  const auto path = std::filesystem::temp_directory_path() / "fraclap_field.csv";
  write_field_csv(path, samples);
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "x,y,z,u,dist");
  CHECK(row.rfind("0,0,2,", 0) == 0);
  std::filesystem::remove(path);
}
