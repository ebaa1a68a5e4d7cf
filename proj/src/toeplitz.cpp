#include "leech/toeplitz.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <sstream>

namespace leech {

std::vector<Matrix> taylor_coefficients(const TransferFunction& tf, Index count) {
  std::vector<Matrix> coeffs;
  coeffs.reserve(static_cast<std::size_t>(count));
  if (count <= 0) return coeffs;
  coeffs.push_back(tf.D);
  Matrix power = tf.B;  // A^{nu-1} B
  for (Index nu = 1; nu < count; ++nu) {
    coeffs.push_back(tf.C * power);
    if (nu + 1 < count) power = tf.A * power;
  }
  return coeffs;
}

BlockToeplitzSection toeplitz_section(const TransferFunction& tf, Index N) {
  if (N < 1) throw DimensionError("toeplitz_section: N must be >= 1");
  const Index k = tf.rows();
  const Index r = tf.cols();
  const auto coeffs = taylor_coefficients(tf, N);
  BlockToeplitzSection sec;
  sec.block_rows = k;
  sec.block_cols = r;
  sec.sections = N;
  sec.dense = Matrix::Zero(N * k, N * r);
  for (Index d = 0; d < N; ++d)
    for (Index i = d; i < N; ++i)
      sec.dense.block(i * k, (i - d) * r, k, r) = coeffs[static_cast<std::size_t>(d)];
  return sec;
}

Matrix wobs_section(const Matrix& C, const Matrix& A, Index N) {
  const Index m = C.rows();
  const Index n = A.rows();
  Matrix W(N * m, n);
  Matrix CAk = C;
  for (Index k = 0; k < N; ++k) {
    W.middleRows(k * m, m) = CAk;
    if (k + 1 < N) CAk = CAk * A;
  }
  return W;
}

Matrix wcon_section(const Matrix& A, const Matrix& B, Index N) {
  const Index n = A.rows();
  const Index k = B.cols();
  Matrix W(n, N * k);
  Matrix AkB = B;
  for (Index j = 0; j < N; ++j) {
    W.middleCols(j * k, k) = AkB;
    if (j + 1 < N) AkB = A * AkB;
  }
  return W;
}

Matrix hankel_section(const TransferFunction& tf, Index N) {
  const Index k = tf.rows();
  const Index r = tf.cols();
  const auto coeffs = taylor_coefficients(tf, 2 * N);  // needs F_1 .. F_{2N-1}
  Matrix H(N * k, N * r);
  for (Index i = 0; i < N; ++i)
    for (Index j = 0; j < N; ++j)
      H.block(i * k, j * r, k, r) = coeffs[static_cast<std::size_t>(i + j + 1)];
  return H;
}

Matrix toeplitz_r_section(const Realization& r, const ProblemData& pd, Index N) {
  if (N < 1) throw DimensionError("toeplitz_r_section: N must be >= 1");
  const Dimensions d = r.dims();
  const Index m = d.m;
  Matrix TR = Matrix::Zero(N * m, N * m);
  for (Index i = 0; i < N; ++i) TR.block(i * m, i * m, m, m) = pd.R0;
  Matrix power = pd.Gamma;  // A^{nu-1} Gamma
  for (Index nu = 1; nu < N; ++nu) {
    const Matrix Rnu = r.C * power;
    for (Index i = nu; i < N; ++i) {
      TR.block(i * m, (i - nu) * m, m, m) = Rnu;
      TR.block((i - nu) * m, i * m, m, m) = Rnu.adjoint();
    }
    if (nu + 1 < N) power = r.A * power;
  }
  return TR;
}

Index default_section_count(const Realization& r) {
  const double rho = spectral_radius(r.A);
  if (!(rho < 1.0)) throw DomainError("default_section_count requires rho(A) < 1");
  const double blocks = 8.0 * std::ceil(1.0 / (1.0 - rho));
  return std::max<Index>(64, static_cast<Index>(blocks));
}

OperatorModelBundle build_sections(const Realization& r, Index N) {
  if (N < 1) throw DimensionError("build_sections: N must be >= 1");
  OperatorModelBundle b;
  b.dims = r.dims();
  b.N = N;
  b.source = r;

  const TransferFunction G = g_part(r);
  const TransferFunction K = k_part(r);
  b.TG = toeplitz_section(G, N).dense;
  b.TK = toeplitz_section(K, N).dense;
  b.TR = toeplitz_r_section(r, compute_problem_data(r), N);
  b.Wobs = wobs_section(r.C, r.A, N);
  b.HG = hankel_section(G, N);
  b.HK = hankel_section(K, N);
  b.Wcon1 = wcon_section(r.A, r.B1, N);
  b.Wcon2 = wcon_section(r.A, r.B2, N);
  b.M = hermitize(b.TG * b.TG.adjoint() - b.TK * b.TK.adjoint());

  Eigen::LLT<Matrix> lltM(b.M);
  if (lltM.info() == Eigen::Success) {
    const Index m = b.dims.m;
    const Index q = b.dims.q;
    b.section_positive = true;

    Eigen::LLT<Matrix> lltGG(hermitize(b.TG * b.TG.adjoint()));
    if (lltGG.info() != Eigen::Success)
      throw SolverError("build_sections: T_G T_G^* section lost positivity");
    b.Lambda = b.TG.adjoint() * lltGG.solve(b.TK);

    b.Xi = lltM.solve(b.TK.leftCols(q));
    b.DV = hermitize(Matrix::Identity(q, q) + (b.TK.adjoint() * b.Xi).topRows(q));

    Matrix shiftedXi = Matrix::Zero(N * m, q);  // S_m^* Xi
    shiftedXi.topRows((N - 1) * m) = b.Xi.bottomRows((N - 1) * m);
    Matrix shiftUp = Matrix::Zero(N * m, N * m);
    for (Index i = 0; i + 1 < N; ++i)
      shiftUp.block(i * m, (i + 1) * m, m, m) = Matrix::Identity(m, m);
    const Matrix firstRowTKadj = b.TK.leftCols(q).adjoint();  // E_q^* T_K^*
    b.F = shiftUp - shiftedXi * b.DV.llt().solve(firstRowTKadj);
  }
  return b;
}

double positivity_margin(const OperatorModelBundle& bundle) {
  return min_eig_hermitian(bundle.M);
}

std::vector<Matrix> central_solution_taylor(const OperatorModelBundle& b, Index count) {
  if (!b.section_positive)
    throw MetricError("central_solution_taylor: section of T_G T_G^* - T_K T_K^* not positive");
  if (count > b.N) {
    std::ostringstream os;
    os << "central_solution_taylor: " << count << " coefficients requested from " << b.N
       << " sections";
    throw DomainError(os.str());
  }
  const Index p = b.dims.p;
  const Index q = b.dims.q;

  // Coefficients of U and V are the block rows of T_G^* Xi and T_K^* Xi.
  const Matrix Ustack = b.TG.adjoint() * b.Xi;  // Np x q
  const Matrix Vstack = b.TK.adjoint() * b.Xi;  // Nq x q
  std::vector<Matrix> U, V;
  for (Index nu = 0; nu < count; ++nu) {
    U.push_back(Ustack.middleRows(nu * p, p));
    Matrix Vnu = Vstack.middleRows(nu * q, q);
    if (nu == 0) Vnu += Matrix::Identity(q, q);
    V.push_back(std::move(Vnu));
  }

  // V^{-1} by forward substitution on the power series; V_0 = D_V is
  // invertible on a positive section.
  Eigen::PartialPivLU<Matrix> v0(V[0]);
  std::vector<Matrix> Winv;
  Winv.push_back(v0.solve(Matrix::Identity(q, q)));
  for (Index nu = 1; nu < count; ++nu) {
    Matrix acc = Matrix::Zero(q, q);
    for (Index j = 1; j <= nu; ++j)
      acc += V[static_cast<std::size_t>(j)] * Winv[static_cast<std::size_t>(nu - j)];
    Winv.push_back(-v0.solve(acc));
  }

  std::vector<Matrix> X;
  for (Index nu = 0; nu < count; ++nu) {
    Matrix acc = Matrix::Zero(p, q);
    for (Index j = 0; j <= nu; ++j)
      acc += U[static_cast<std::size_t>(j)] * Winv[static_cast<std::size_t>(nu - j)];
    X.push_back(std::move(acc));
  }
  return X;
}

namespace {

Matrix matrix_power(const Matrix& A, Index k) {
  Matrix P = Matrix::Identity(A.rows(), A.cols());
  Matrix base = A;
  while (k > 0) {
    if (k & 1) P = P * base;
    k >>= 1;
    if (k > 0) base = base * base;
  }
  return P;
}

}  // namespace

InversionResiduals check_inversion_identities(const OperatorModelBundle& b,
                                              const ProblemData& pd,
                                              const RiccatiCertificate& cert) {
  InversionResiduals out;
  const Index dim = b.TR.rows();
  const Index m = b.dims.m;

  Eigen::LLT<Matrix> lltTR(b.TR);
  if (lltTR.info() != Eigen::Success)
    throw MetricError("check_inversion_identities: T_R section not positive definite");
  const Matrix TRinv = hermitize(lltTR.solve(Matrix::Identity(dim, dim)));
  out.tr_inverse_norm = max_eig_hermitian(TRinv);

  out.decomposition =
      (b.M - (b.TR + b.Wobs * (pd.P2 - pd.P1) * b.Wobs.adjoint())).norm();

  Eigen::LLT<Matrix> lltM(b.M);
  if (lltM.info() != Eigen::Success)
    throw MetricError("check_inversion_identities: section of T_G T_G^* - T_K T_K^* not positive");
  const Matrix Minv = hermitize(lltM.solve(Matrix::Identity(dim, dim)));
  const Matrix TRinvW = lltTR.solve(b.Wobs);
  // inversion formula applied at the section level, with the coupling
  // matrix built from the section's own Q = W^* T_R,N^{-1} W
  const Matrix Qsec = hermitize(b.Wobs.adjoint() * TRinvW);
  const Matrix omega = coupling_omega(pd, Qsec);
  out.inverse_formula = (Minv - (TRinv + TRinvW * omega * TRinvW.adjoint())).norm();

  const Matrix W0stack = wobs_section(cert.C0, cert.A0, b.N);
  out.w0_recovery = (TRinvW - W0stack).norm();
  out.q_recovery = (cert.Q - b.Wobs.adjoint() * TRinvW).norm();

  // exact truncation terms of the two recoveries
  const Matrix A0N = matrix_power(cert.A0, b.N);
  const Matrix AadjN = matrix_power(b.source.A.adjoint(), b.N);
  const Matrix gammaStack = wobs_section(pd.Gamma.adjoint(), b.source.A.adjoint(), b.N);
  Matrix E(dim, cert.Q.cols());
  for (Index i = 0; i < b.N; ++i)
    E.middleRows(i * m, m) = gammaStack.middleRows((b.N - 1 - i) * m, m);
  E = E * (cert.Q * A0N);
  const Matrix TRinvE = lltTR.solve(E);
  out.w0_truncation = TRinvE.norm();
  out.q_truncation = (AadjN * cert.Q * A0N - b.Wobs.adjoint() * TRinvE).norm();

  if (!b.section_positive)
    throw MetricError("check_inversion_identities: Lambda section unavailable");
  out.lambda_norm = operator_norm(b.Lambda);
  out.f_spectral_radius = spectral_radius(b.F);
  return out;
}

}  // namespace leech
