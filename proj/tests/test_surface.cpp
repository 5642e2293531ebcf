#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <random>

#include "fraclap/errors.hpp"
#include "fraclap/spectral.hpp"
#include "fraclap/surface.hpp"
#include "oracles.hpp"

using namespace fraclap;

namespace {

// Area of the ellipsoid from the parametrisation, by nested Simpson.
double ellipsoid_area(double a, double b, double c) {
  return oracle::simpson(
      [&](double t) {
        return oracle::simpson(
            [&](double p) {
              const Vec3 dt(a * std::cos(t) * std::cos(p), b * std::cos(t) * std::sin(p), -c * std::sin(t));
              const Vec3 dp(-a * std::sin(t) * std::sin(p), b * std::sin(t) * std::cos(p), 0.0);
              return dt.cross(dp).norm();
            },
            0.0, 2.0 * oracle::pi, 400);
      },
      0.0, oracle::pi, 400);
}

}  // namespace

TEST_CASE("Sphere mesh integrates polynomials") {
  const MeshPtr m = make_sphere_mesh(2.0, Vec3(1.0, -1.0, 0.5), 12, 24);
  CHECK(m->size() == 12 * 24);
  CHECK(m->area() == doctest::Approx(16.0 * oracle::pi).epsilon(1e-13));
  std::vector<double> z2(m->size());
  for (int j = 0; j < m->size(); ++j) z2[j] = std::pow(m->node(j).z() - 0.5, 2);
  // int z^2 over a sphere of radius R = 4 pi R^4 / 3.
  CHECK(surface_integral(*m, z2) == doctest::Approx(4.0 * oracle::pi * 16.0 / 3.0).epsilon(1e-13));
  for (int j = 0; j < m->size(); ++j) {
    CHECK((m->node(j) - Vec3(1.0, -1.0, 0.5)).norm() == doctest::Approx(2.0));
    CHECK(m->normals()[j].dot(m->node(j) - Vec3(1.0, -1.0, 0.5)) == doctest::Approx(2.0));
  }
  CHECK(m->min_spacing() > 0.0);
  CHECK(m->spacing() >= m->min_spacing());
}

TEST_CASE("Ellipsoid mesh area") {
  const MeshPtr m = make_ellipsoid_mesh(1.0, 0.8, 0.6, 24, 48);
  CHECK(m->area() == doctest::Approx(ellipsoid_area(1.0, 0.8, 0.6)).epsilon(1e-8));
  for (int j = 0; j < m->size(); j += 7) {
    const Vec3 x = m->node(j);
    CHECK(x.x() * x.x() + x.y() * x.y() / 0.64 + x.z() * x.z() / 0.36 == doctest::Approx(1.0));
    CHECK(m->normals()[j].norm() == doctest::Approx(1.0));
    // Outward normal is parallel to the gradient of the implicit function.
    const Vec3 g = Vec3(x.x(), x.y() / 0.64, x.z() / 0.36).normalized();
    CHECK(m->normals()[j].dot(g) == doctest::Approx(1.0));
  }
}

TEST_CASE("Mesh arguments are validated") {
  CHECK_THROWS_AS(make_sphere_mesh(1.0, Vec3::Zero(), 3, 8), ResolutionError);
  CHECK_THROWS_AS(make_sphere_mesh(1.0, Vec3::Zero(), 8, 15), ResolutionError);
  CHECK_THROWS_AS(make_sphere_mesh(-1.0, Vec3::Zero(), 8, 16), DomainError);
  CHECK_THROWS_AS(make_ellipsoid_mesh(1.0, 0.0, 1.0, 8, 16), DomainError);
  CHECK_THROWS_AS(surface_kind_from_string("torus"), DomainError);
  CHECK(to_string(surface_kind_from_string("ellipsoid")) == "ellipsoid");
}

TEST_CASE("Refinement and identity") {
  const MeshPtr m = make_sphere_mesh(1.0, Vec3::Zero(), 8, 16);
  const MeshPtr r = refine(*m, 3);
  CHECK(r->nlat() == 24);
  CHECK(r->nlon() == 48);
  CHECK(r->area() == doctest::Approx(m->area()));
  CHECK(same_mesh(*m, *make_sphere_mesh(1.0, Vec3::Zero(), 8, 16)));
  CHECK_FALSE(same_mesh(*m, *r));
  CHECK(m->hash() != r->hash());
  CHECK_THROWS_AS(refine(*m, 1), DomainError);
}

TEST_CASE("Grid interpolation of a smooth function") {
  const MeshPtr m = make_ellipsoid_mesh(1.2, 1.0, 0.7, 24, 48);
  // A degree-3 polynomial in the unit-sphere preimage, sampled at the nodes.
  auto f = [](const Vec3& u) { return u.x() * u.y() * u.z() + 0.5 * u.x() * u.x() - u.z(); };
  Eigen::VectorXd values(m->size());
  for (int j = 0; j < m->size(); ++j) values(j) = f(m->unit_points()[j]);
  const GridInterpolator interp(*m, 8);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const Vec3 u = Vec3(normal(rng), normal(rng), normal(rng)).normalized();
    worst = std::max(worst, std::abs(interp.evaluate(values, u) - f(u)));
  }
  CHECK(worst < 1e-7);
  // Points near the poles exercise stencils that cross to the opposite meridian.
  const Vec3 pole = Vec3(0.01, 0.02, 1.0).normalized();
  CHECK(std::abs(interp.evaluate(values, pole) - f(pole)) < 1e-6);
}

TEST_CASE("Mesh CSV round trip") {
  const MeshPtr m = make_ellipsoid_mesh(1.0, 0.9, 0.8, 8, 16);
  Eigen::VectorXd g = Eigen::VectorXd::LinSpaced(m->size(), -1.0, 1.0);
  const auto path = std::filesystem::temp_directory_path() / "fraclap_mesh_roundtrip.csv";
  write_mesh_csv(path, *m, {{"g", &g}});
  const MeshFile f = read_mesh_csv(path);
  CHECK(same_mesh(*m, *f.mesh));
  REQUIRE(f.extra_names.size() == 1);
  CHECK(f.extra_names[0] == "g");
  CHECK((f.extra_columns[0] - g).cwiseAbs().maxCoeff() == 0.0);
  CHECK(f.mesh->descriptor().kind == SurfaceKind::Ellipsoid);
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".json");
  CHECK_THROWS(read_mesh_csv(path));
}
