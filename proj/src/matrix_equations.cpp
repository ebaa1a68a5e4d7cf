#include "leech/matrix_equations.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <sstream>

#include "leech/toeplitz.hpp"

namespace leech {

namespace {

// Back-substitution for Y - TE Y TF = S with TE, TF upper triangular.
// Processing rows bottom-up and columns left-to-right keeps every entry of
// the partial product known when it is needed.
Matrix solve_triangular_stein(const Matrix& TE, const Matrix& TF, const Matrix& S) {
  const Index ne = TE.rows();
  const Index nf = TF.rows();
  Matrix Y = Matrix::Zero(ne, nf);
  for (Index i = ne - 1; i >= 0; --i) {
    for (Index j = 0; j < nf; ++j) {
      const Complex lam = TE(i, i);
      const Complex mu = TF(j, j);
      const Complex denom = Complex(1.0, 0.0) - lam * mu;
      const double denom_floor = 1e-12 * std::max(1.0, std::abs(lam) * std::abs(mu));
      if (std::abs(denom) < denom_floor)
        throw SingularityError("Stein equation resonance: eigenvalue product within tolerance of 1",
                               1.0 / std::max(std::abs(denom), 1e-300));
      // Y(i, j) is still zero here, so the block product collects exactly
      // the already-computed terms with k >= i, l <= j.
      const Complex known =
          (TE.row(i).segment(i, ne - i) * Y.block(i, 0, ne - i, j + 1) * TF.col(j).head(j + 1))(0);
      Y(i, j) = (S(i, j) + known) / denom;
    }
  }
  return Y;
}

struct NewtonState {
  Matrix Q, Delta, C0, A0;
  double minEigDelta = 0.0;
  double residualNorm = 0.0;
};

// One evaluation of the Riccati data at Q. Returns false when Delta is not
// positive definite (minEigDelta then carries the offending eigenvalue).
bool eval_riccati_state(const Realization& r, const ProblemData& pd, const Matrix& Q,
                        double tol_scale, NewtonState& st) {
  st.Q = Q;
  const Matrix GsQ = pd.Gamma.adjoint() * Q;
  st.Delta = hermitize(pd.R0 - GsQ * pd.Gamma);
  st.minEigDelta = min_eig_hermitian(st.Delta);
  if (st.minEigDelta <= strict_positivity_threshold(st.Delta, tol_scale)) return false;
  const Matrix CmGQA = r.C - GsQ * r.A;
  st.C0 = st.Delta.llt().solve(CmGQA);
  st.A0 = r.A - pd.Gamma * st.C0;
  const Matrix res =
      hermitize(r.A.adjoint() * Q * r.A + CmGQA.adjoint() * st.C0 - Q);
  st.residualNorm = res.norm();
  return true;
}

Matrix riccati_residual(const Realization& r, const ProblemData& pd, const Matrix& Q,
                        const Matrix& C0, const Matrix& GsQ) {
  const Matrix CmGQA = r.C - GsQ * r.A;
  return hermitize(r.A.adjoint() * Q * r.A + CmGQA.adjoint() * C0 - Q);
}

// Cheap lower-eigenvalue estimate via inverse power iteration with an
// existing Cholesky factor; used only to gate against the strict-positivity
// threshold, the exact eigenvalue is recomputed on the failure path.
double min_eig_estimate(const Eigen::LLT<Matrix>& llt, Index dim) {
  Vector v = Vector::Ones(dim);
  v.normalize();
  double lam = 1.0;
  for (int it = 0; it < 25; ++it) {
    Vector w = llt.solve(v);
    const double nw = w.norm();
    if (!(nw > 0.0) || !std::isfinite(nw)) return 0.0;
    const double next = 1.0 / nw;
    w /= nw;
    if (it > 3 && std::abs(next - lam) < 1e-3 * next) {
      lam = next;
      break;
    }
    lam = next;
    v.swap(w);
  }
  return lam;
}

}  // namespace

std::string to_string(PositivityFailure f) {
  switch (f) {
    case PositivityFailure::ToeplitzRNotPositive:
      return "T_R not strictly positive (no stabilizing Q)";
    case PositivityFailure::DeltaNotPositive:
      return "Delta = R0 - Gamma* Q Gamma not strictly positive";
    case PositivityFailure::ClosedLoopUnstable:
      return "closed-loop matrix A0 not stable";
    case PositivityFailure::QNotPositive:
      return "Q not strictly positive";
    case PositivityFailure::CondIINotPositive:
      return "Q^{-1} + P2 - P1 not strictly positive";
  }
  return "unknown";
}

Matrix solve_stein_symmetric(const Matrix& A, const Matrix& B) {
  if (A.rows() != A.cols()) throw DimensionError("solve_stein_symmetric: A not square");
  if (B.rows() != A.rows()) throw DimensionError("solve_stein_symmetric: B row mismatch");
  if (A.rows() == 0) return Matrix(0, 0);
  const double rho = spectral_radius(A);
  if (!(rho < 1.0)) {
    std::ostringstream os;
    os << "solve_stein_symmetric: no unique solution, spectral radius " << rho << " >= 1";
    throw DomainError(os.str());
  }
  Matrix P = solve_stein_general(A, A.adjoint(), B * B.adjoint());
  return hermitize(P);
}

Matrix solve_stein_general(const Matrix& E, const Matrix& F, const Matrix& S) {
  if (E.rows() != E.cols() || F.rows() != F.cols())
    throw DimensionError("solve_stein_general: E and F must be square");
  if (S.rows() != E.rows() || S.cols() != F.rows())
    throw DimensionError("solve_stein_general: S shape mismatch");
  if (E.rows() == 0 || F.rows() == 0) return S;
  if (E.norm() == 0.0 || F.norm() == 0.0) return S;

  Eigen::ComplexSchur<Matrix> schurE(E);
  Eigen::ComplexSchur<Matrix> schurF(F);
  if (schurE.info() != Eigen::Success || schurF.info() != Eigen::Success)
    throw SolverError("Schur decomposition failed");
  const Matrix& UE = schurE.matrixU();
  const Matrix& UF = schurF.matrixU();
  Matrix Stil = UE.adjoint() * S * UF;
  Matrix Y = solve_triangular_stein(schurE.matrixT(), schurF.matrixT(), Stil);
  return UE * Y * UF.adjoint();
}

ProblemData compute_problem_data(const Realization& r) {
  r.dims();
  ProblemData pd;
  pd.P1 = solve_stein_symmetric(r.A, r.B1);
  pd.P2 = solve_stein_symmetric(r.A, r.B2);
  const Matrix P12 = pd.P1 - pd.P2;
  pd.R0 = hermitize(r.D1 * r.D1.adjoint() - r.D2 * r.D2.adjoint() + r.C * P12 * r.C.adjoint());
  pd.Gamma = r.B1 * r.D1.adjoint() - r.B2 * r.D2.adjoint() + r.A * P12 * r.C.adjoint();
  return pd;
}

Matrix coupling_omega(const ProblemData& pd, const Matrix& Q) {
  const Index n = Q.rows();
  if (n == 0) return Matrix(0, 0);
  const Matrix N = pd.P2 - pd.P1;
  const Matrix lhs = Matrix::Identity(n, n) + Q * N;
  // right division: Omega (I + Q N) = P1 - P2
  return lhs.transpose().partialPivLu().solve((-N).transpose()).transpose();
}

double riccati_residual_norm(const Realization& r, const ProblemData& pd, const Matrix& Q) {
  NewtonState st;
  if (!eval_riccati_state(r, pd, Q, 1.0, st))
    throw MetricError("riccati_residual_norm: Delta not positive definite at this Q");
  return st.residualNorm;
}

Matrix refine_riccati_newton(const Realization& r, const ProblemData& pd, Matrix Q,
                             int max_iterations, double residual_tol) {
  NewtonState st;
  for (int it = 0; it < max_iterations; ++it) {
    if (!eval_riccati_state(r, pd, Q, 1.0, st))
      throw SolverError("Newton refinement: Delta lost positive definiteness");
    if (st.residualNorm <= residual_tol * (1.0 + Q.norm())) return Q;
    if (!(spectral_radius(st.A0) < 1.0))
      throw SolverError("Newton refinement: closed-loop matrix not stable at iterate");
    const Matrix res = riccati_residual(r, pd, Q, st.C0, pd.Gamma.adjoint() * Q);
    const Matrix H = solve_stein_general(st.A0.adjoint(), st.A0, res);
    Q = hermitize(Q + H);
  }
  if (eval_riccati_state(r, pd, Q, 1.0, st) &&
      st.residualNorm <= 100.0 * residual_tol * (1.0 + Q.norm()))
    return Q;
  throw SolverError("Newton refinement did not converge");
}

DareResult solve_dare_stabilizing(const Realization& r, const ProblemData& pd,
                                  const DareOptions& opts) {
  const Dimensions d = r.dims();
  const double ts = opts.tol_scale;
  const double inf = std::numeric_limits<double>::infinity();

  auto nsp = [](PositivityFailure cause, double value) {
    std::ostringstream os;
    os << to_string(cause) << ": offending value " << value;
    return NotStrictlyPositive{cause, value, os.str()};
  };

  if (d.n == 0) {
    const Matrix R0 = hermitize(pd.R0);
    const double me = min_eig_hermitian(R0);
    if (me <= strict_positivity_threshold(R0, ts))
      return nsp(PositivityFailure::ToeplitzRNotPositive, me);
    RiccatiCertificate cert;
    cert.Q = Matrix(0, 0);
    cert.Delta = R0;
    cert.C0 = Matrix(d.m, 0);
    cert.A0 = Matrix(0, 0);
    cert.rhoA0 = 0.0;
    cert.minEigDelta = me;
    cert.minEigQ = inf;
    cert.riccatiResidual = 0.0;
    cert.minEigCondII = inf;
    return cert;
  }

  // Finite-section phase: Q_N = W_obs,N^* T_R,N^{-1} W_obs,N, N doubled
  // until the estimate settles. Geometric decay of the section tail makes
  // this converge whenever rho(A) < 1 and T_R is strictly positive.
  Index N = opts.initial_sections > 0 ? opts.initial_sections : default_section_count(r);
  Matrix Q;
  bool have_prev = false;
  Matrix Q_prev;
  for (;;) {
    const Matrix TR = toeplitz_r_section(r, pd, N);
    const Matrix W = wobs_section(r.C, r.A, N);
    Eigen::LLT<Matrix> llt(TR);
    const double threshold = strict_positivity_threshold(TR, ts);
    bool positive = llt.info() == Eigen::Success;
    if (positive && min_eig_estimate(llt, TR.rows()) <= 4.0 * threshold)
      positive = min_eig_hermitian(TR) > threshold;
    if (!positive)
      return nsp(PositivityFailure::ToeplitzRNotPositive, min_eig_hermitian(TR));
    Q = hermitize(W.adjoint() * llt.solve(W));
    if (have_prev && (Q - Q_prev).norm() <= opts.section_tol * (1.0 + Q.norm())) break;
    Q_prev = Q;
    have_prev = true;
    if (2 * N > opts.max_sections)
      throw SolverError("finite-section Riccati estimate did not settle within the section budget");
    N *= 2;
  }

  // Newton refinement: each step solves H - A0^* H A0 = residual(Q).
  NewtonState st;
  bool converged = false;
  for (int it = 0; it < opts.max_newton_iterations; ++it) {
    if (!eval_riccati_state(r, pd, Q, ts, st))
      return nsp(PositivityFailure::DeltaNotPositive, st.minEigDelta);
    if (st.residualNorm <= opts.residual_tol * (1.0 + Q.norm())) {
      converged = true;
      break;
    }
    const double rho0 = spectral_radius(st.A0);
    if (!(rho0 < 1.0)) return nsp(PositivityFailure::ClosedLoopUnstable, rho0);
    const Matrix res = riccati_residual(r, pd, Q, st.C0, pd.Gamma.adjoint() * Q);
    const Matrix H = solve_stein_general(st.A0.adjoint(), st.A0, res);
    Q = hermitize(Q + H);
  }
  if (!converged) {
    // Accept a stalled iterate only if it still meets the certificate bar.
    if (!eval_riccati_state(r, pd, Q, ts, st))
      return nsp(PositivityFailure::DeltaNotPositive, st.minEigDelta);
    if (st.residualNorm > 1e-10 * (1.0 + Q.norm()) * ts)
      throw SolverError("Riccati Newton iteration did not converge");
  }

  // Certificate conditions, in order.
  RiccatiCertificate cert;
  cert.Q = Q;
  cert.Delta = st.Delta;
  cert.C0 = st.C0;
  cert.A0 = st.A0;
  cert.minEigDelta = st.minEigDelta;
  cert.riccatiResidual = st.residualNorm;
  if (cert.riccatiResidual > 1e-10 * (1.0 + Q.norm()) * ts)
    throw SolverError("Riccati residual above certificate tolerance after refinement");

  cert.rhoA0 = spectral_radius(st.A0);
  if (!(cert.rhoA0 < 1.0)) return nsp(PositivityFailure::ClosedLoopUnstable, cert.rhoA0);

  cert.minEigQ = min_eig_hermitian(Q);
  if (cert.minEigQ <= strict_positivity_threshold(Q, ts))
    return nsp(PositivityFailure::QNotPositive, cert.minEigQ);

  // Q^{-1} + P2 - P1, computed from a Cholesky solve and cross-checked via
  // the congruence I + Q^{1/2} (P2 - P1) Q^{1/2}, which has the same
  // signature without forming Q^{-1}.
  const Matrix In = Matrix::Identity(d.n, d.n);
  const Matrix Qinv = hermitize(Q.llt().solve(In));
  const Matrix cond2 = hermitize(Qinv + pd.P2 - pd.P1);
  cert.minEigCondII = min_eig_hermitian(cond2);
  const Matrix Qh = hermitian_sqrt(Q);
  const double congruence_eig = min_eig_hermitian(hermitize(In + Qh * (pd.P2 - pd.P1) * Qh));
  if (cert.minEigCondII <= strict_positivity_threshold(cond2, ts) ||
      congruence_eig <= strict_positivity_threshold(In, ts))
    return nsp(PositivityFailure::CondIINotPositive, cert.minEigCondII);

  return cert;
}

}  // namespace leech
