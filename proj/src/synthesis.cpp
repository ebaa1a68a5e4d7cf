#include "leech/synthesis.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>
#include <sstream>

namespace leech {

namespace {

// Second algebraic form (P1 - P2)(Q^{-1} + P2 - P1)^{-1} Q^{-1}, evaluated
// literally through solves against Q; used to cross-check coupling_omega.
Matrix omega_second_form(const ProblemData& pd, const Matrix& Q) {
  const Index n = Q.rows();
  if (n == 0) return Matrix(0, 0);
  const Matrix In = Matrix::Identity(n, n);
  const Matrix Qinv = hermitize(Q.llt().solve(In));
  const Matrix mid = Qinv + pd.P2 - pd.P1;
  return (pd.P1 - pd.P2) * mid.partialPivLu().solve(Qinv);
}

double circle_norm(const TransferFunction& tf, double omega) {
  return operator_norm(eval_transfer(tf, std::polar(1.0, omega)));
}

}  // namespace

SolutionBundle synthesize(const Realization& r, const ProblemData& pd,
                          const RiccatiCertificate& cert) {
  const Dimensions d = r.dims();
  const Matrix& Q = cert.Q;
  const Matrix& C0 = cert.C0;
  const Matrix& A0 = cert.A0;

  SolutionBundle sol;
  sol.Omega = coupling_omega(pd, Q);
  const Matrix omega2 = omega_second_form(pd, Q);
  if ((sol.Omega - omega2).norm() > 1e-8 * (1.0 + sol.Omega.norm()))
    throw SolverError("synthesize: the two forms of Omega disagree, certificate inconsistent");
  sol.Omega0 = Matrix::Identity(d.n, d.n) + (pd.P2 - pd.P1) * Q;

  sol.C1 = r.D1.adjoint() * C0 + r.B1.adjoint() * Q * A0;
  sol.C2 = r.D2.adjoint() * C0 + r.B2.adjoint() * Q * A0;

  const Matrix core = r.D2 - pd.Gamma.adjoint() * Q * r.B2;  // D2 - Gamma^* Q B2
  const Matrix deltaInvCore = cert.Delta.llt().solve(core);
  const Matrix omegaC2s = sol.Omega * sol.C2.adjoint();
  sol.D0 = deltaInvCore + C0 * omegaC2s;
  sol.B0 = r.B2 - pd.Gamma * deltaInvCore + A0 * omegaC2s;
  const Matrix b0alt = r.B2 - pd.Gamma * sol.D0 + r.A * omegaC2s;
  if ((sol.B0 - b0alt).norm() > 1e-10 * (1.0 + sol.B0.norm()))
    throw SolverError("synthesize: B0 cross-check failed, upstream data inconsistent");

  sol.DU = r.D1.adjoint() * sol.D0 + r.B1.adjoint() * Q * sol.B0;
  sol.DV = hermitize(Matrix::Identity(d.q, d.q) + r.D2.adjoint() * sol.D0 +
                     r.B2.adjoint() * Q * sol.B0);

  Eigen::LLT<Matrix> lltDV(sol.DV);
  if (lltDV.info() != Eigen::Success ||
      min_eig_hermitian(sol.DV) <= strict_positivity_threshold(sol.DV))
    throw SolverError("synthesize: D_V not strictly positive, certificate breakdown");

  const Matrix DVinv = hermitize(lltDV.solve(Matrix::Identity(d.q, d.q)));
  const Matrix DVinvC2 = lltDV.solve(sol.C2);
  sol.Across = A0 - sol.B0 * DVinvC2;

  const Matrix XD = lltDV.solve(sol.DU.adjoint()).adjoint();  // D_U D_V^{-1}
  const Matrix XB = lltDV.solve(sol.B0.adjoint()).adjoint();  // B0 D_V^{-1}
  sol.X = {XD, sol.C1 - XD * sol.C2, sol.Across, XB};
  sol.U = {sol.DU, sol.C1, A0, sol.B0};
  sol.V = {sol.DV, sol.C2, A0, sol.B0};
  sol.Vinv = {DVinv, -DVinvC2, sol.Across, XB};

  // Theta = D_V^{1/2} V^{-1}; the principal Hermitian square root fixes the
  // branch of V(0)^{1/2}.
  const Matrix DVhalf = hermitian_sqrt(sol.DV);
  const Matrix DVhalfInv = hermitize(DVhalf.llt().solve(Matrix::Identity(d.q, d.q)));
  sol.Theta = {DVhalfInv, -DVhalfInv * sol.C2, sol.Across, XB};

  const double logdet = log_det_hermitian_pd(sol.DV);
  sol.entropy = logdet == 0.0 ? 0.0 : -logdet;
  return sol;
}

double entropy_integral(const TransferFunction& X, Index grid_points) {
  if (grid_points < 1) throw DomainError("entropy_integral: grid_points must be >= 1");
  const Index q = X.cols();
  const Matrix Iq = Matrix::Identity(q, q);
  double acc = 0.0;
  for (Index k = 0; k < grid_points; ++k) {
    const double omega = 2.0 * std::numbers::pi * static_cast<double>(k) /
                         static_cast<double>(grid_points);
    const Matrix Xw = eval_transfer(X, std::polar(1.0, omega));
    try {
      acc += log_det_hermitian_pd(Iq - Xw.adjoint() * Xw);
    } catch (const MetricError&) {
      std::ostringstream os;
      os << "entropy_integral: I - X*X not positive definite at omega = " << omega;
      throw MetricError(os.str());
    }
  }
  // trapezoidal rule on the periodic grid
  return acc / static_cast<double>(grid_points);
}

SupNormEstimate supnorm_estimate(const TransferFunction& tf, Index grid_points,
                                 int refine_depth) {
  if (grid_points < 1) throw DomainError("supnorm_estimate: grid_points must be >= 1");
  const double twopi = 2.0 * std::numbers::pi;
  SupNormEstimate est;
  est.grid_points = grid_points;
  est.refine_depth = refine_depth;

  Index argmax = 0;
  for (Index k = 0; k < grid_points; ++k) {
    const double omega = twopi * static_cast<double>(k) / static_cast<double>(grid_points);
    const double v = circle_norm(tf, omega);
    if (v > est.value) {
      est.value = v;
      est.omega = omega;
      argmax = k;
    }
  }

  // golden-section refinement around the grid maximizer
  const double h = twopi / static_cast<double>(grid_points);
  double a = twopi * static_cast<double>(argmax) / static_cast<double>(grid_points) - h;
  double b = a + 2.0 * h;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double dd = a + inv_phi * (b - a);
  double fc = circle_norm(tf, c);
  double fd = circle_norm(tf, dd);
  for (int it = 0; it < refine_depth; ++it) {
    if (fc > fd) {
      b = dd;
      dd = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = circle_norm(tf, c);
    } else {
      a = c;
      c = dd;
      fc = fd;
      dd = a + inv_phi * (b - a);
      fd = circle_norm(tf, dd);
    }
    const double best = std::max(fc, fd);
    if (best > est.value) {
      est.value = best;
      est.omega = fc > fd ? c : dd;
    }
  }
  return est;
}

}  // namespace leech
