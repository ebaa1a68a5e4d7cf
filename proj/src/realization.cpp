#include "leech/realization.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <sstream>

#include "leech/matrix_equations.hpp"

namespace leech {

Dimensions Realization::dims() const {
  const Index n = A.rows();
  const Index m = C.rows();
  const Index p = B1.cols();
  const Index q = B2.cols();
  auto fail = [&](const char* what) {
    std::ostringstream os;
    os << "inconsistent realization dimensions (" << what << "): n=" << n << " m=" << m
       << " p=" << p << " q=" << q;
    throw DimensionError(os.str());
  };
  if (A.cols() != n) fail("A not square");
  if (B1.rows() != n) fail("B1 rows");
  if (B2.rows() != n) fail("B2 rows");
  if (C.cols() != n) fail("C cols");
  if (D1.rows() != m || D1.cols() != p) fail("D1 shape");
  if (D2.rows() != m || D2.cols() != q) fail("D2 shape");
  if (m < 1 || p < 1 || q < 1) fail("m, p, q must be positive");
  return Dimensions{n, m, p, q};
}

TransferFunction g_part(const Realization& r) { return {r.D1, r.C, r.A, r.B1}; }
TransferFunction k_part(const Realization& r) { return {r.D2, r.C, r.A, r.B2}; }

double spectral_radius(const Matrix& M) {
  if (M.rows() != M.cols()) throw DimensionError("spectral_radius: matrix not square");
  if (M.rows() == 0) return 0.0;
  Eigen::ComplexEigenSolver<Matrix> es(M, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw SolverError("eigenvalue iteration did not converge");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix observability_matrix(const Matrix& C, const Matrix& A) {
  const Index n = A.rows();
  const Index m = C.rows();
  Matrix W(n * m, n);
  Matrix CAk = C;
  for (Index k = 0; k < n; ++k) {
    W.middleRows(k * m, m) = CAk;
    if (k + 1 < n) CAk = CAk * A;
  }
  return W;
}

std::vector<Violation> validate_realization(const Realization& r) {
  const Dimensions d = r.dims();
  std::vector<Violation> out;

  const double rho = spectral_radius(r.A);
  if (!(rho < 1.0)) {
    std::ostringstream os;
    os << "state matrix not stable: spectral radius " << rho << " >= 1";
    out.push_back({Violation::Kind::Unstable, rho, os.str()});
  }

  if (d.n > 0) {
    Matrix W = observability_matrix(r.C, r.A);
    Eigen::JacobiSVD<Matrix> svd(W);
    const auto& sv = svd.singularValues();
    const double tol =
        static_cast<double>(d.n) * sv(0) * std::numeric_limits<double>::epsilon() * 64.0;
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i)
      if (sv(i) > tol) ++rank;
    if (rank < d.n) {
      std::ostringstream os;
      os << "pair (C, A) not observable: observability rank " << rank << " < " << d.n;
      out.push_back({Violation::Kind::NotObservable, static_cast<double>(rank), os.str()});
    }
  }
  return out;
}

Matrix eval_transfer(const TransferFunction& tf, Complex z) {
  const Index n = tf.A.rows();
  if (tf.A.cols() != n || tf.C.cols() != n || tf.B.rows() != n || tf.D.rows() != tf.C.rows() ||
      tf.D.cols() != tf.B.cols())
    throw DimensionError("eval_transfer: inconsistent realization matrices");
  if (n == 0) return tf.D;
  Matrix M = Matrix::Identity(n, n) - z * tf.A;
  Eigen::PartialPivLU<Matrix> lu(M);
  const double rc = lu.rcond();
  if (!(rc > n * std::numeric_limits<double>::epsilon()))
    throw SingularityError("eval_transfer: I - zA numerically singular", 1.0 / rc);
  return tf.D + z * tf.C * lu.solve(tf.B);
}

Matrix eval_R(const Realization& r, const ProblemData& pd, Complex z, double circle_tol) {
  const Dimensions d = r.dims();
  if (std::abs(std::abs(z) - 1.0) > circle_tol) {
    std::ostringstream os;
    os << "eval_R requires |z| = 1, got |z| = " << std::abs(z);
    throw DomainError(os.str());
  }
  if (d.n == 0) return pd.R0;
  const Matrix In = Matrix::Identity(d.n, d.n);
  Matrix analytic = z * r.C * (In - z * r.A).partialPivLu().solve(pd.Gamma);
  Matrix antianalytic =
      pd.Gamma.adjoint() * (z * In - r.A.adjoint()).partialPivLu().solve(r.C.adjoint());
  return analytic + pd.R0 + antianalytic;
}

Index mcmillan_degree_estimate(const TransferFunction& tf, const RankOptions& opts) {
  const Index n = tf.states();
  if (n == 0) return 0;
  const double rho = spectral_radius(tf.A);
  if (!(rho < 1.0)) throw DomainError("mcmillan_degree_estimate requires a stable realization");
  Matrix Gc = solve_stein_symmetric(tf.A, tf.B);
  Matrix Go = solve_stein_symmetric(tf.A.adjoint(), tf.C.adjoint());
  Eigen::JacobiSVD<Matrix> svd(Gc * Go);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0) return 0;
  Index rank = 0;
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > opts.rel_tol * sv(0)) ++rank;
  return rank;
}

}  // namespace leech
