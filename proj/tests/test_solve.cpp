#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fraclap/errors.hpp"
#include "fraclap/solve.hpp"
#include "fraclap/spectral.hpp"
#include "oracles.hpp"

using namespace fraclap;

TEST_CASE("Constant datum on the sphere") {
  const MeshPtr m = make_sphere_mesh(1.0, Vec3::Zero(), 16, 32);
  const BoundaryOperator op = assemble_single_layer(m, 1.5);
  const double g = 4.0 * std::sqrt(2.0) * oracle::pi;
  const SolveReport rep = solve_density(op, Density::constant(m, g));
  // lambda_0(1.5) = 4 sqrt(2) pi, so the density is 1.
  CHECK(oracle::eigenvalue(1.5, 0) == doctest::Approx(g).epsilon(1e-14));
  CHECK((rep.density.values.array() - 1.0).abs().maxCoeff() < 1e-4);
  CHECK(rep.residual < 1e-10);
  CHECK(rep.iterations == 0);
  CHECK(rep.condition.cond >= 1.0);
  CHECK(rep.condition.sigma_max == doctest::Approx(oracle::eigenvalue(1.5, 0)).epsilon(1e-3));
}

TEST_CASE("Harmonic datum is divided by its eigenvalue") {
  const MeshPtr m = make_sphere_mesh(1.0, Vec3::Zero(), 16, 32);
  const double s = 1.8;
  const BoundaryOperator op = assemble_single_layer(m, s);
  const Eigen::VectorXd y = sample_harmonic(*m, 3, -2);
  SolveOptions opts;
  opts.with_condition = false;
  const SolveReport rep = solve_density(op, Density(m, y), opts);
  const Eigen::VectorXd expected = y / oracle::eigenvalue(s, 3);
  CHECK((rep.density.values - expected).cwiseAbs().maxCoeff() < 1e-4 * expected.cwiseAbs().maxCoeff());
}

TEST_CASE("Iterative and dense solves agree") {
  const MeshPtr m = make_ellipsoid_mesh(1.0, 0.8, 0.6, 16, 32);
  const BoundaryOperator op = assemble_single_layer(m, 1.5);
  Eigen::VectorXd g(m->size());
  for (int j = 0; j < m->size(); ++j) g(j) = 1.0 + m->node(j).x() - 0.5 * m->node(j).y() * m->node(j).z();
  SolveOptions dense;
  dense.with_condition = false;
  SolveOptions cg = dense;
  cg.method = SolveMethod::Iterative;
  cg.tol = 1e-11;
  const SolveReport a = solve_density(op, Density(m, g), dense);
  const SolveReport b = solve_density(op, Density(m, g), cg);
  CHECK(b.iterations > 0);
  CHECK(b.residual <= 1e-11);
  CHECK((a.density.values - b.density.values).cwiseAbs().maxCoeff() < 1e-8 * a.density.values.cwiseAbs().maxCoeff());
}

TEST_CASE("Condition report of the weighted operator is positive definite") {
  const MeshPtr m = make_sphere_mesh(1.0, Vec3::Zero(), 16, 32);
  const BoundaryOperator op = assemble_single_layer(m, 1.5);
  const ConditionReport c = condition_report(op);
  CHECK(c.sigma_min > 1e-8 * c.sigma_max);
  CHECK(c.cond == doctest::Approx(c.sigma_max / c.sigma_min));
}

TEST_CASE("Solver errors") {
  const MeshPtr m = make_sphere_mesh(1.0, Vec3::Zero(), 16, 32);
  const BoundaryOperator op = assemble_single_layer(m, 1.5);
  const MeshPtr other = make_sphere_mesh(1.0, Vec3::Zero(), 16, 34);
  CHECK_THROWS_AS(solve_density(op, Density::constant(other, 1.0)), MismatchError);
  SolveOptions bad;
  bad.tol = 0.0;
  CHECK_THROWS_AS(solve_density(op, Density::constant(m, 1.0), bad), DomainError);
  SolveOptions few;
  few.method = SolveMethod::Iterative;
  few.max_iter = 1;
  few.tol = 1e-14;
  Eigen::VectorXd g = Eigen::VectorXd::LinSpaced(m->size(), -1.0, 2.0);
  CHECK_THROWS_AS(solve_density(op, Density(m, g), few), SolverError);

  const SolveReport zero = solve_density(op, Density::constant(m, 0.0));
  CHECK(zero.density.values.cwiseAbs().maxCoeff() == 0.0);
  CHECK(solve_method_from_string(to_string(SolveMethod::Iterative)) == SolveMethod::Iterative);
  CHECK_THROWS_AS(solve_method_from_string("gmres"), DomainError);
}
