#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>

#include "fraclap/assembly.hpp"
#include "fraclap/errors.hpp"
#include "fraclap/spectral.hpp"
#include "oracles.hpp"

using namespace fraclap;

namespace {

double rayleigh(const BoundaryOperator& op, const Eigen::VectorXd& y) {
  const Eigen::VectorXd& w = op.mesh->weight_vector();
  return y.dot(w.cwiseProduct(op.matrix * y)) / y.dot(w.cwiseProduct(y));
}

}  // namespace

TEST_CASE("Harmonics are eigenvectors on the sphere") {
  const MeshPtr m = make_sphere_mesh(1.0, Vec3::Zero(), 16, 32);
  for (double alpha : {0.6, 0.75, 0.9}) {
    const double s = 2.0 * alpha;
    const BoundaryOperator op = assemble_single_layer(m, s);
    for (int l = 0; l <= 4; ++l)
      for (int k : {-l, 0, l}) {
        INFO("alpha " << alpha << " l " << l << " m " << k);
        CHECK(std::abs(rayleigh(op, sample_harmonic(*m, l, k)) / oracle::eigenvalue(s, l) - 1.0) < 2e-4);
      }
  }
}

TEST_CASE("Radius scaling") {
  // S_s on a sphere of radius R has eigenvalues R^(s-1) lambda_l(s).
  const double r = 2.5;
  const MeshPtr m = make_sphere_mesh(r, Vec3(0.3, 0.0, -1.0), 16, 32);
  const BoundaryOperator op = assemble_single_layer(m, 1.5);
  CHECK(rayleigh(op, sample_harmonic(*m, 2, 1)) ==
        doctest::Approx(std::pow(r, 0.5) * oracle::eigenvalue(1.5, 2)).epsilon(2e-4));
}

TEST_CASE("Equilibrium density of a conducting ellipsoid") {
  // For the Newtonian kernel the density proportional to
  // 1 / sqrt(x^2/a^4 + y^2/b^4 + z^2/c^4) has a constant potential on the
  // ellipsoid: Q/2 int_0^inf dt / sqrt((a^2+t)(b^2+t)(c^2+t)) for 1/|x - y|.
  const double a = 1.0, b = 0.8, c = 0.6;
  const MeshPtr m = make_ellipsoid_mesh(a, b, c, 24, 48);
  Eigen::VectorXd sigma(m->size());
  for (int j = 0; j < m->size(); ++j) {
    const Vec3 x = m->node(j);
    sigma(j) = 1.0 / std::sqrt(x.x() * x.x() / std::pow(a, 4) + x.y() * x.y() / std::pow(b, 4) +
                               x.z() * x.z() / std::pow(c, 4));
  }
  const double charge = m->weight_vector().dot(sigma);
  // t = u^2 / (1 - u)^2 maps [0, 1) onto [0, inf).
  const double integral = oracle::simpson(
      [&](double u) {
        if (u >= 1.0) return 0.0;
        const double t = u * u / ((1.0 - u) * (1.0 - u));
        const double dt = 2.0 * u / std::pow(1.0 - u, 3);
        return dt / std::sqrt((a * a + t) * (b * b + t) * (c * c + t));
      },
      0.0, 1.0, 20000);
  const double expected = oracle::riesz3(2.0) * 0.5 * charge * integral;
  const BoundaryOperator op = assemble_single_layer(m, 2.0);
  const Eigen::VectorXd u = op.matrix * sigma;
  CHECK((u.array() / expected - 1.0).abs().maxCoeff() < 1e-4);
}

TEST_CASE("Order and resolution limits") {
  const MeshPtr m = make_sphere_mesh(1.0, Vec3::Zero(), 8, 16);
  CHECK_THROWS_AS(assemble_single_layer(m, 1.0), DomainError);
  CHECK_THROWS_AS(assemble_single_layer(m, 2.2), DomainError);
  CorrectionOptions greedy;
  greedy.interp_order = 12;
  CHECK_THROWS_AS(assemble_single_layer(m, 1.5, greedy), ResolutionError);
}

TEST_CASE("Symmetry, application, composition") {
  const MeshPtr m = make_ellipsoid_mesh(1.0, 0.9, 0.7, 16, 32);
  const BoundaryOperator op = assemble_single_layer(m, 1.6);
  const SymmetryReport sym = symmetry_report(op);
  CHECK(sym.far_asymmetry < 1e-12);
  CHECK(sym.far_pairs > 0);
  CHECK(sym.near_pairs > 0);
  CHECK(op.correction.corrected_entries > 0);

  // Uncorrected entries are the bare Nystrom weights.
  const KernelSpec k(3, 1.6);
  for (int i = 0; i < op.size(); i += 17)
    for (int j = 0; j < op.size(); j += 13)
      if (!op.corrected(i, j)) CHECK(op.matrix(i, j) == doctest::Approx(kernel_eval(k, Vec3(m->node(i) - m->node(j))) * m->weights()[j]));

  const Eigen::VectorXd sw = m->weight_vector().cwiseSqrt();
  const RowMatrix b = weighted_symmetrize(op);
  CHECK((b - sw.asDiagonal() * op.matrix * sw.cwiseInverse().asDiagonal()).cwiseAbs().maxCoeff() < 1e-12);

  const Density phi(m, Eigen::VectorXd::LinSpaced(m->size(), 0.0, 1.0));
  CHECK((apply(op, phi).values - op.matrix * phi.values).cwiseAbs().maxCoeff() < 1e-12);
  const BoundaryOperator op2 = assemble_single_layer(m, 1.2);
  CHECK((compose(op, op2) - op.matrix * op2.matrix).cwiseAbs().maxCoeff() < 1e-10);
  const BoundaryOperator other = assemble_single_layer(make_sphere_mesh(1.0, Vec3::Zero(), 16, 32), 1.2);
  CHECK_THROWS_AS(compose(op, other), MismatchError);
}

TEST_CASE("Planar symbol") {
  // Two-dimensional Fourier transform of c(3, s) |x|^(s-3): with a = 3 - s,
  // FT |x|^-a = pi^(a-1) Gamma(1 - a/2) / Gamma(a/2) |xi|^(a-2).
  for (double s : {1.2, 1.5, 1.9}) {
    const double a = 3.0 - s;
    const double ft = oracle::riesz3(s) * std::pow(oracle::pi, a - 1.0) * std::tgamma(1.0 - 0.5 * a) / std::tgamma(0.5 * a);
    CHECK(flat_symbol(s, 2.0) == doctest::Approx(ft * std::pow(2.0, a - 2.0)).epsilon(1e-13));
  }
}

TEST_CASE("Operator dump round trip") {
  const MeshPtr m = make_sphere_mesh(1.0, Vec3::Zero(), 16, 32);
  const BoundaryOperator op = assemble_single_layer(m, 1.5);
  const auto path = std::filesystem::temp_directory_path() / "fraclap_operator.bin";
  save_operator(path, op);
  const BoundaryOperator back = load_operator(path, m);
  CHECK((back.matrix - op.matrix).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.spec.order() == 1.5);
  CHECK_THROWS_AS(load_operator(path, make_sphere_mesh(1.0, Vec3::Zero(), 16, 34)), MismatchError);
  std::filesystem::remove(path);
}
