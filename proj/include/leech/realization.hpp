#pragma once

#include <string>
#include <vector>

#include "leech/types.hpp"

namespace leech {

struct ProblemData;  // matrix_equations.hpp

// Joint observable stable realization of a pair of stable rational matrix
// functions G (m x p) and K (m x q):
//
//   [G(z) K(z)] = [D1 D2] + z C (I - z A)^{-1} [B1 B2],
//
// with rho(A) < 1 and (C, A) observable.
struct Realization {
  Matrix A;   // n x n
  Matrix B1;  // n x p
  Matrix B2;  // n x q
  Matrix C;   // m x n
  Matrix D1;  // m x p
  Matrix D2;  // m x q

  // Throws DimensionError if the six matrices are not consistent.
  Dimensions dims() const;
};

// D + z C (I - z A)^{-1} B, analytic on the closed unit disc when
// rho(A) < 1. n = 0 (empty state) represents a constant function.
struct TransferFunction {
  Matrix D;  // k x r
  Matrix C;  // k x n
  Matrix A;  // n x n
  Matrix B;  // n x r

  Index rows() const { return D.rows(); }
  Index cols() const { return D.cols(); }
  Index states() const { return A.rows(); }
};

TransferFunction g_part(const Realization& r);  // (D1, C, A, B1)
TransferFunction k_part(const Realization& r);  // (D2, C, A, B2)

struct Violation {
  enum class Kind { Unstable, NotObservable };
  Kind kind;
  double value;  // spectral radius, or observability rank
  std::string message;
};

// Validity of an observable stable realization: rho(A) < 1 and the
// observability matrix [C; CA; ...; CA^{n-1}] has full column rank.
// Dimension inconsistencies throw DimensionError instead of being reported.
std::vector<Violation> validate_realization(const Realization& r);

double spectral_radius(const Matrix& M);

Matrix observability_matrix(const Matrix& C, const Matrix& A);  // (n*m) x n

Matrix eval_transfer(const TransferFunction& tf, Complex z);

// R(z) = z C (I - zA)^{-1} Gamma + R0 + Gamma^* (zI - A^*)^{-1} C^* for z on
// the unit circle, where for |z| = 1 it coincides with
// G(z)G(z)^* - K(z)K(z)^*. Throws DomainError when | |z| - 1 | > tol.
Matrix eval_R(const Realization& r, const ProblemData& pd, Complex z,
              double circle_tol = 1e-9);

struct RankOptions {
  // Singular values below rel_tol * sigma_max count as zero.
  double rel_tol = 1e-9;
};

// Numerical rank of the product of the controllability and observability
// Gramians of the realization; equals the McMillan degree in exact
// arithmetic. Requires rho(A) < 1.
Index mcmillan_degree_estimate(const TransferFunction& tf, const RankOptions& opts = {});

}  // namespace leech
