#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace leech {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;

// State dimensions of a problem instance. n = 0 denotes constant functions.
struct Dimensions {
  Index n = 0;  // state order
  Index m = 1;  // output rows of G and K
  Index p = 1;  // columns of G
  Index q = 1;  // columns of K

  bool operator==(const Dimensions&) const = default;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structural problems (inconsistent matrix sizes), distinct from validity
// violations reported by validate_realization.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation (e.g. |z| != 1).
class DomainError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, double condition_estimate)
      : Error(what), condition_estimate_(condition_estimate) {}
  double condition_estimate() const { return condition_estimate_; }

 private:
  double condition_estimate_ = 0.0;
};

// Iterative method failed to converge. Distinct from a NotStrictlyPositive
// diagnosis, which is a legitimate answer rather than a numerical failure.
class SolverError : public Error {
 public:
  using Error::Error;
};

// A quantity required to be positive definite (e.g. I - X*X on the circle)
// is not, at the point of use.
class MetricError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

inline Matrix hermitize(const Matrix& M) { return 0.5 * (M + M.adjoint()); }

// Margin below which a Hermitian matrix is not accepted as strictly
// positive: eps_pd = 1e-10 * (1 + ||M||).
inline double strict_positivity_threshold(const Matrix& M, double tol_scale = 1.0) {
  return 1e-10 * (1.0 + M.norm()) * tol_scale;
}

double min_eig_hermitian(const Matrix& M);
double max_eig_hermitian(const Matrix& M);

// Principal (Hermitian PSD) square root.
Matrix hermitian_sqrt(const Matrix& M);

// log det of a Hermitian positive definite matrix; throws MetricError when
// the Cholesky factorization fails.
double log_det_hermitian_pd(const Matrix& M);

double operator_norm(const Matrix& M);  // largest singular value

}  // namespace leech
