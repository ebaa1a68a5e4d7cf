#pragma once

#include <string>
#include <variant>

#include "leech/realization.hpp"
#include "leech/types.hpp"

namespace leech {

// Derived data of an instance:
//   P1 - A P1 A^* = B1 B1^*,   P2 - A P2 A^* = B2 B2^*,
//   R0    = D1 D1^* - D2 D2^* + C (P1 - P2) C^*,
//   Gamma = B1 D1^* - B2 D2^* + A (P1 - P2) C^*.
struct ProblemData {
  Matrix P1;     // n x n Hermitian PSD
  Matrix P2;     // n x n Hermitian PSD
  Matrix R0;     // m x m Hermitian
  Matrix Gamma;  // n x m
};

// Evidence that the instance is strictly positive: the stabilizing solution
// Q of
//   Q = A^* Q A + (C - Gamma^* Q A)^* Delta^{-1} (C - Gamma^* Q A),
//   Delta = R0 - Gamma^* Q Gamma,
// together with C0 = Delta^{-1}(C - Gamma^* Q A), A0 = A - Gamma C0, and the
// scalar witnesses for each certificate condition.
struct RiccatiCertificate {
  Matrix Q;      // n x n Hermitian strictly positive
  Matrix Delta;  // m x m Hermitian strictly positive
  Matrix C0;     // m x n
  Matrix A0;     // n x n, stable
  double rhoA0 = 0.0;
  double minEigDelta = 0.0;
  double minEigQ = 0.0;
  double riccatiResidual = 0.0;  // Frobenius norm
  double minEigCondII = 0.0;     // min eigenvalue of Q^{-1} + P2 - P1
};

enum class PositivityFailure {
  ToeplitzRNotPositive,  // T_R not strictly positive / no stabilizing Q
  DeltaNotPositive,
  ClosedLoopUnstable,  // rho(A0) >= 1
  QNotPositive,
  CondIINotPositive,  // Q^{-1} + P2 - P1 not strictly positive
};

std::string to_string(PositivityFailure f);

// Diagnosis returned when the instance is not strictly positive: the first
// violated certificate condition and the offending eigenvalue (or spectral
// radius for ClosedLoopUnstable).
struct NotStrictlyPositive {
  PositivityFailure cause;
  double offendingValue = 0.0;
  std::string message;
};

using DareResult = std::variant<RiccatiCertificate, NotStrictlyPositive>;

// Unique solution P of P - A P A^* = B B^* for rho(A) < 1; Hermitian PSD.
Matrix solve_stein_symmetric(const Matrix& A, const Matrix& B);

// Unique solution X of X - E X F = S, provided no eigenvalue product
// lambda(E) mu(F) equals 1. Throws SingularityError on resonance.
Matrix solve_stein_general(const Matrix& E, const Matrix& F, const Matrix& S);

ProblemData compute_problem_data(const Realization& r);

struct DareOptions {
  // Section phase: initial number of block sections (0 = automatic policy
  // max(64, 8 ceil(1/(1-rho(A))))), doubled until the Q estimate moves less
  // than section_tol, up to max_sections. The section estimate only has to
  // land inside the Newton basin; the refinement supplies full accuracy, so
  // a loose section tolerance avoids O((Nm)^3) work at large N when the
  // closed-loop modes sit near the circle.
  Index initial_sections = 0;
  Index max_sections = 4096;
  double section_tol = 1e-3;
  // Newton phase on the Riccati residual.
  int max_newton_iterations = 50;
  double residual_tol = 1e-12;
  // Multiplier applied to all strict-positivity thresholds.
  double tol_scale = 1.0;
};

// Stabilizing solution of the Riccati equation with the full certificate,
// or a NotStrictlyPositive diagnosis. Certificate conditions are checked in
// the order: T_R / stabilizing Q, Delta > 0, rho(A0) < 1, Q > 0,
// Q^{-1} + P2 - P1 > 0; the first failure is reported. Numerical
// non-convergence throws SolverError instead.
DareResult solve_dare_stabilizing(const Realization& r, const ProblemData& pd,
                                  const DareOptions& opts = {});

// Newton refinement of the Riccati equation from a given Hermitian start;
// each step solves one Stein equation H - A0^* H A0 = residual(Q).
// Returns the refined Q; throws SolverError when the iteration does not
// reach residual_tol or a Delta factorization breaks down en route.
Matrix refine_riccati_newton(const Realization& r, const ProblemData& pd, Matrix Q,
                             int max_iterations = 50, double residual_tol = 1e-12);

double riccati_residual_norm(const Realization& r, const ProblemData& pd, const Matrix& Q);

// Omega = (P1 - P2)(I + Q (P2 - P1))^{-1}, the coupling matrix entering the
// inverse formula for T_G T_G^* - T_K T_K^* and the synthesis pipeline.
Matrix coupling_omega(const ProblemData& pd, const Matrix& Q);

}  // namespace leech
