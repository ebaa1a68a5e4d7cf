#pragma once

#include "leech/matrix_equations.hpp"
#include "leech/realization.hpp"
#include "leech/types.hpp"

namespace leech {

// Everything produced by the synthesis pipeline: the solution matrices
//
//   C_j = D_j^* C0 + B_j^* Q A0                      (j = 1, 2)
//   D0  = Delta^{-1}(D2 - Gamma^* Q B2) + C0 Omega C2^*
//   B0  = B2 - Gamma Delta^{-1}(D2 - Gamma^* Q B2) + A0 Omega C2^*
//   D_U = D1^* D0 + B1^* Q B0,   D_V = I + D2^* D0 + B2^* Q B0
//   A^x = A0 - B0 D_V^{-1} C2
//
// with Omega = (P1 - P2)(I + Q(P2 - P1))^{-1} and Omega0 = I + (P2 - P1)Q,
// the realizations of X, U, V, V^{-1}, Theta, and the entropy -ln det D_V.
struct SolutionBundle {
  Matrix Omega;   // n x n
  Matrix Omega0;  // n x n
  Matrix C1;      // p x n
  Matrix C2;      // q x n
  Matrix D0;      // m x q
  Matrix B0;      // n x q
  Matrix DU;      // p x q
  Matrix DV;      // q x q Hermitian strictly positive
  Matrix Across;  // n x n, stable

  TransferFunction X;      // D_U D_V^{-1} + z (C1 - D_U D_V^{-1} C2)(I - z A^x)^{-1} B0 D_V^{-1}
  TransferFunction U;      // D_U + z C1 (I - z A0)^{-1} B0
  TransferFunction V;      // D_V + z C2 (I - z A0)^{-1} B0
  TransferFunction Vinv;   // D_V^{-1} - z D_V^{-1} C2 (I - z A^x)^{-1} B0 D_V^{-1}
  TransferFunction Theta;  // D_V^{1/2} V^{-1}, outer spectral factor of I - X^*X

  double entropy = 0.0;  // -ln det D_V
};

SolutionBundle synthesize(const Realization& r, const ProblemData& pd,
                          const RiccatiCertificate& cert);

// (1/2 pi) integral of ln det[I - X(e^{iw})^* X(e^{iw})] over [0, 2 pi),
// trapezoidal rule on a uniform grid. Throws MetricError when I - X^*X is
// not positive definite at a grid point.
double entropy_integral(const TransferFunction& X, Index grid_points = 4096);

struct SupNormEstimate {
  double value = 0.0;  // lower bound for sup norm on the circle
  double omega = 0.0;  // angle attaining the reported value
  Index grid_points = 0;
  int refine_depth = 0;
};

// Largest spectral norm of tf on a uniform circle grid, with golden-section
// refinement around the grid maximizer.
SupNormEstimate supnorm_estimate(const TransferFunction& tf, Index grid_points = 512,
                                 int refine_depth = 40);

}  // namespace leech
