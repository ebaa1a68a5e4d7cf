#include "leech/types.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace leech {

double min_eig_hermitian(const Matrix& M) {
  if (M.rows() == 0) return std::numeric_limits<double>::infinity();
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(M), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw SolverError("hermitian eigen decomposition failed");
  return es.eigenvalues().minCoeff();
}

double max_eig_hermitian(const Matrix& M) {
  if (M.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(M), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw SolverError("hermitian eigen decomposition failed");
  return es.eigenvalues().maxCoeff();
}

Matrix hermitian_sqrt(const Matrix& M) {
  if (M.rows() == 0) return M;
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitize(M));
  if (es.info() != Eigen::Success) throw SolverError("hermitian eigen decomposition failed");
  Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * lam.cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

double log_det_hermitian_pd(const Matrix& M) {
  if (M.rows() == 0) return 0.0;
  Eigen::LLT<Matrix> llt(hermitize(M));
  if (llt.info() != Eigen::Success)
    throw MetricError("matrix is not positive definite (Cholesky failed)");
  double acc = 0.0;
  Matrix L = llt.matrixL();
  for (Index i = 0; i < L.rows(); ++i) acc += std::log(L(i, i).real());
  return 2.0 * acc;
}

double operator_norm(const Matrix& M) {
  if (M.rows() == 0 || M.cols() == 0) return 0.0;
  // sigma_max via the smaller Gram matrix; adequate for tolerance checks
  // and much cheaper than an SVD on large sections.
  const Matrix gram =
      M.rows() <= M.cols() ? Matrix(M * M.adjoint()) : Matrix(M.adjoint() * M);
  return std::sqrt(std::max(0.0, max_eig_hermitian(gram)));
}

}  // namespace leech
