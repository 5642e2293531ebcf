#include "fraclap/solve.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/LU>

#include "fraclap/errors.hpp"
#include "fraclap/linalg.hpp"

namespace fraclap {

std::string to_string(SolveMethod method) {
  return method == SolveMethod::Dense ? "dense" : "iterative";
}

SolveMethod solve_method_from_string(const std::string& name) {
  if (name == "dense") return SolveMethod::Dense;
  if (name == "iterative") return SolveMethod::Iterative;
  throw DomainError("unknown solve method '" + name + "'");
}

ConditionReport condition_report(const BoundaryOperator& op) {
  const Eigen::VectorXd sv = singular_values(weighted_symmetrize(op));
  ConditionReport rep;
  rep.sigma_max = sv(0);
  rep.sigma_min = sv(sv.size() - 1);
  rep.cond = rep.sigma_min > 0.0 ? rep.sigma_max / rep.sigma_min : INFINITY;
  return rep;
}

namespace {

double relative_residual(const BoundaryOperator& op, const Eigen::VectorXd& phi, const Eigen::VectorXd& g) {
  return (op.matrix * phi - g).norm() / g.norm();
}

Eigen::VectorXd dense_solve(const BoundaryOperator& op, const Eigen::VectorXd& g) {
  const Eigen::PartialPivLU<RowMatrix> lu(op.matrix);
  if (!(lu.rcond() > 1e3 * std::numeric_limits<double>::epsilon())) {
    const ConditionReport c = condition_report(op);
    throw SolverError("system is singular to working precision: smallest singular value " +
                      std::to_string(c.sigma_min) + " (largest " + std::to_string(c.sigma_max) +
                      "); the quadrature has failed");
  }
  Eigen::VectorXd phi = lu.solve(g);
  phi += lu.solve(g - op.matrix * phi);
  return phi;
}

// Conjugate gradients on B y = W^(1/2) r. B is symmetric only up to the
// local-correction asymmetry, so the inner solve is wrapped in residual
// refinement against the unsymmetrized system.
Eigen::VectorXd cg_inner(const RowMatrix& b, const Eigen::VectorXd& rhs, double tol, int max_iter,
                         int& iterations) {
  const double target = tol * rhs.norm();
  Eigen::VectorXd y = Eigen::VectorXd::Zero(rhs.size());
  Eigen::VectorXd r = rhs;
  Eigen::VectorXd p = r;
  double rr = r.squaredNorm();
  int k = 0;
  while (std::sqrt(rr) > target && iterations < max_iter) {
    const Eigen::VectorXd bp = b * p;
    const double alpha = rr / p.dot(bp);
    y += alpha * p;
    r -= alpha * bp;
    if ((++k) % 50 == 0) r = rhs - b * y;
    const double rr_new = r.squaredNorm();
    p = r + (rr_new / rr) * p;
    rr = rr_new;
    ++iterations;
  }
  return y;
}

Eigen::VectorXd cg_solve(const BoundaryOperator& op, const Eigen::VectorXd& g, const SolveOptions& o,
                         int& iterations) {
  const Eigen::VectorXd sw = op.mesh->weight_vector().cwiseSqrt();
  const RowMatrix b = weighted_symmetrize(op);
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(g.size());
  iterations = 0;
  const double gnorm = g.norm();
  for (int outer = 0; outer < 20; ++outer) {
    const Eigen::VectorXd r = g - op.matrix * phi;
    if (r.norm() <= o.tol * gnorm) return phi;
    if (iterations >= o.max_iter) break;
    phi += cg_inner(b, sw.cwiseProduct(r), std::min(0.1, 0.1 * o.tol * gnorm / r.norm()), o.max_iter, iterations)
               .cwiseQuotient(sw);
  }
  const double res = (g - op.matrix * phi).norm() / gnorm;
  if (res <= o.tol) return phi;
  throw SolverError("conjugate gradients did not converge after " + std::to_string(iterations) +
                    " iterations (residual " + std::to_string(res) + ")");
}

}  // namespace

SolveReport solve_density(const BoundaryOperator& op, const Density& g, const SolveOptions& options) {
  if (!same_mesh(*op.mesh, *g.mesh)) throw MismatchError("solve_density: datum lives on another mesh");
  if (!(options.tol > 0.0)) throw DomainError("solve_density: tolerance must be positive");
  if (g.values.norm() == 0.0) {
    SolveReport zero{Density::constant(op.mesh, 0.0), 0.0, {}, options.method, 0};
    if (options.with_condition) zero.condition = condition_report(op);
    return zero;
  }

  int iterations = 0;
  Eigen::VectorXd phi = options.method == SolveMethod::Dense ? dense_solve(op, g.values)
                                                             : cg_solve(op, g.values, options, iterations);
  SolveReport rep{Density(op.mesh, std::move(phi)), 0.0, {}, options.method, iterations};
  rep.residual = relative_residual(op, rep.density.values, g.values);
  if (!(rep.residual <= options.tol)) {
    throw SolverError("solve_density: relative residual " + std::to_string(rep.residual) +
                      " exceeds tolerance " + std::to_string(options.tol));
  }
  if (options.with_condition) rep.condition = condition_report(op);
  return rep;
}

nlohmann::json to_json(const ConditionReport& report) {
  return {{"sigma_min", report.sigma_min}, {"sigma_max", report.sigma_max}, {"cond", report.cond}};
}

nlohmann::json to_json(const SolveReport& report) {
  nlohmann::json j;
  j["method"] = to_string(report.method);
  j["iterations"] = report.iterations;
  j["residual"] = report.residual;
  j["sigma_min"] = report.condition.sigma_min;
  j["sigma_max"] = report.condition.sigma_max;
  j["cond"] = report.condition.cond;
  j["nodes"] = report.density.values.size();
  j["density_min"] = report.density.values.minCoeff();
  j["density_max"] = report.density.values.maxCoeff();
  return j;
}

}  // namespace fraclap
