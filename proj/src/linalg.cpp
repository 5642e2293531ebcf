#include "fraclap/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace fraclap {

Eigen::VectorXd symmetric_eigenvalues(const RowMatrix& m) {
  const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

Eigen::VectorXd singular_values(const RowMatrix& m) {
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(Eigen::MatrixXd(m), 0);
  return svd.singularValues();
}

}  // namespace fraclap
