#pragma once

#include <Eigen/Core>

#include "fraclap/assembly.hpp"

namespace fraclap {

/// Eigenvalues (ascending) of the symmetric part (M + M^T)/2.
Eigen::VectorXd symmetric_eigenvalues(const RowMatrix& m);

/// Singular values (descending).
Eigen::VectorXd singular_values(const RowMatrix& m);

}  // namespace fraclap
