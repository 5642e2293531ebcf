#pragma once

#include <string>

#include "json.hpp"

#include "fraclap/assembly.hpp"

namespace fraclap {

enum class SolveMethod { Dense, Iterative };

std::string to_string(SolveMethod method);
SolveMethod solve_method_from_string(const std::string& name);

struct SolveOptions {
  SolveMethod method = SolveMethod::Dense;
  double tol = 1e-10;
  int max_iter = 2000;
  // Extreme singular values cost a dense SVD; skip them when only the
  // density is needed.
  bool with_condition = true;
};

struct ConditionReport {
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double cond = 0.0;
};

struct SolveReport {
  Density density;
  double residual = 0.0;  // ||A phi - g|| / ||g||
  ConditionReport condition;
  SolveMethod method = SolveMethod::Dense;
  int iterations = 0;
};

/// Solves A phi = g. Dense: pivoted LU with one refinement step. Iterative:
/// conjugate gradients on the weighted system B y = W^(1/2) g, phi = W^(-1/2) y.
/// Throws SolverError when the matrix is numerically singular (naming the
/// smallest singular value), when the iteration does not converge, or when
/// the final residual exceeds tol.
SolveReport solve_density(const BoundaryOperator& op, const Density& g, const SolveOptions& options = {});

/// Extreme singular values of the weighted-symmetrized operator.
ConditionReport condition_report(const BoundaryOperator& op);

nlohmann::json to_json(const ConditionReport& report);
nlohmann::json to_json(const SolveReport& report);

}  // namespace fraclap
