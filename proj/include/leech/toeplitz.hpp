#pragma once

#include <vector>

#include "leech/matrix_equations.hpp"
#include "leech/realization.hpp"
#include "leech/types.hpp"

namespace leech {

// Leading N x N block truncation of the block lower triangular Toeplitz
// operator of a transfer function: block (i, j) = F_{i-j} for i >= j,
// where F_0 = D and F_nu = C A^{nu-1} B.
struct BlockToeplitzSection {
  Index block_rows = 0;
  Index block_cols = 0;
  Index sections = 0;
  Matrix dense;  // (sections*block_rows) x (sections*block_cols)
};

// Taylor coefficients F_0, ..., F_{count-1} of a transfer function.
std::vector<Matrix> taylor_coefficients(const TransferFunction& tf, Index count);

BlockToeplitzSection toeplitz_section(const TransferFunction& tf, Index N);

// Section assemblies used by both the oracle bundle and the Riccati solver.
Matrix wobs_section(const Matrix& C, const Matrix& A, Index N);        // Nm x n
Matrix wcon_section(const Matrix& A, const Matrix& B, Index N);        // n x Nk
Matrix hankel_section(const TransferFunction& tf, Index N);            // Nk x Nr
Matrix toeplitz_r_section(const Realization& r, const ProblemData& pd, Index N);

// Finite-section model of the operators of one instance. Raw sections are
// always populated; the derived operators (Lambda, Xi, F, the central
// solution data) require the section of T_G T_G^* - T_K T_K^* to be
// positive definite and are left empty otherwise (section_positive false).
struct OperatorModelBundle {
  Dimensions dims;
  Index N = 0;
  Realization source;  // symbol provenance

  Matrix TG;     // Nm x Np, lower triangular block Toeplitz
  Matrix TK;     // Nm x Nq
  Matrix TR;     // Nm x Nm, Hermitian block Toeplitz
  Matrix Wobs;   // Nm x n
  Matrix HG;     // Nm x Np Hankel
  Matrix HK;     // Nm x Nq
  Matrix Wcon1;  // n x Np
  Matrix Wcon2;  // n x Nq
  Matrix M;      // TG TG^* - TK TK^*, Hermitian

  bool section_positive = false;
  Matrix Lambda;  // Np x Nq, TG^* (TG TG^*)^{-1} TK
  Matrix Xi;      // Nm x q,  M^{-1} TK E_q
  Matrix DV;      // q x q,   I + E_q^* TK^* Xi
  Matrix F;       // Nm x Nm, S^* - S^* Xi DV^{-1} E_q^* TK^*
};

OperatorModelBundle build_sections(const Realization& r, Index N);

// Smallest eigenvalue of the section of T_G T_G^* - T_K T_K^*.
double positivity_margin(const OperatorModelBundle& bundle);

// Default section-count policy: max(64, 8 ceil(1/(1-rho(A)))).
Index default_section_count(const Realization& r);

// Taylor coefficients of the central solution X = U V^{-1} computed purely
// from sections: Xi = M^{-1} T_K E_q, the coefficients of U and V read off
// through shifts of Xi, and V^{-1} by power-series forward substitution.
// Requires a positive section (throws MetricError otherwise).
std::vector<Matrix> central_solution_taylor(const OperatorModelBundle& bundle, Index count);

// Residuals of the operator-level identities, reported raw together with
// the conditioning quantities used to scale their tolerances. The W0 and Q
// recoveries against a finite section carry an irreducible truncation term;
// it has the closed form T_R,N W0,N = W_N - E_N with
//   E_N = [Gamma^* (A^*)^{N-1-i}]_{i<N} Q A0^N,
//   Q - W_N^* W0,N = (A^*)^N Q A0^N,
// both consequences of the Stein identity Q - A^* Q A0 = C^* C0, so the
// expected truncation magnitudes are computed exactly and reported.
struct InversionResiduals {
  double decomposition = 0.0;      // M = T_R + W (P2 - P1) W^*   (section-exact)
  double inverse_formula = 0.0;    // M^{-1} = T_R^{-1} + T_R^{-1} W Omega W^* T_R^{-1}
  double w0_recovery = 0.0;        // T_R^{-1} W_obs vs observability stack of (C0, A0)
  double q_recovery = 0.0;         // Q vs W_obs^* T_R^{-1} W_obs
  double lambda_norm = 0.0;        // largest singular value of the Lambda section
  double tr_inverse_norm = 0.0;    // ||T_R,N^{-1}||
  double w0_truncation = 0.0;      // ||T_R,N^{-1} E_N||
  double q_truncation = 0.0;       // ||(A^*)^N Q A0^N - W_N^* T_R,N^{-1} E_N||
  double f_spectral_radius = 0.0;  // informational: rho of the F section
};

InversionResiduals check_inversion_identities(const OperatorModelBundle& bundle,
                                              const ProblemData& pd,
                                              const RiccatiCertificate& cert);

}  // namespace leech
