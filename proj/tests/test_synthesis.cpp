#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <variant>

#include "leech/problem_io.hpp"
#include "leech/synthesis.hpp"
#include "oracles.hpp"

using namespace leech;

namespace {

Matrix scalar(double v) {
  Matrix M(1, 1);
  M(0, 0) = v;
  return M;
}

RiccatiCertificate certify(const Realization& r, const ProblemData& pd) {
  DareResult res = solve_dare_stabilizing(r, pd);
  REQUIRE(std::holds_alternative<RiccatiCertificate>(res));
  return std::get<RiccatiCertificate>(res);
}

struct Pipeline {
  Realization r;
  ProblemData pd;
  RiccatiCertificate cert;
  SolutionBundle sol;
};

Pipeline run_pipeline(const Realization& r) {
  Pipeline p;
  p.r = r;
  p.pd = compute_problem_data(r);
  p.cert = certify(r, p.pd);
  p.sol = synthesize(r, p.pd, p.cert);
  return p;
}

Pipeline generated_pipeline(std::uint64_t seed, Dimensions dims, double radius = 0.7) {
  GenerateOptions gopts;
  gopts.seed = seed;
  gopts.dims = dims;
  gopts.radius = radius;
  return run_pipeline(generate_instance(gopts).realization);
}

}  // namespace

TEST_CASE("synthesize: zero interpolation data gives the zero solution") {
  std::mt19937_64 rng(42);
  Realization r = oracles::random_realization(4, 2, 2, 3, 0.6, rng);
  r.B2.setZero();
  r.D2.setZero();
  // G must be invertible outer for a K = 0 instance to be strictly
  // positive; push its zeros inside the disc by shrinking C against a
  // well-conditioned D1.
  r.D1 += 3.0 * Matrix::Identity(2, 2);
  while (spectral_radius(r.A - r.B1 * r.D1.partialPivLu().solve(r.C)) >= 0.95) r.C *= 0.5;
  const Pipeline p = run_pipeline(r);
  CHECK(p.sol.C2.norm() == 0.0);
  CHECK(p.sol.D0.norm() == 0.0);
  CHECK(p.sol.B0.norm() == 0.0);
  CHECK(p.sol.DU.norm() == 0.0);
  CHECK((p.sol.DV - Matrix::Identity(3, 3)).norm() == 0.0);
  CHECK(p.sol.X.D.norm() == 0.0);
  CHECK(p.sol.X.B.norm() == 0.0);
  CHECK(p.sol.entropy == 0.0);
}

TEST_CASE("synthesize: constant closed form") {
  Realization r;
  r.A = Matrix(0, 0);
  r.B1 = Matrix(0, 1);
  r.B2 = Matrix(0, 1);
  r.C = Matrix(1, 0);
  r.D1 = scalar(2.0);
  r.D2 = scalar(1.0);
  const Pipeline p = run_pipeline(r);
  CHECK(std::abs(p.sol.D0(0, 0) - Complex(1.0 / 3.0)) < 1e-15);
  CHECK(std::abs(p.sol.DU(0, 0) - Complex(2.0 / 3.0)) < 1e-15);
  CHECK(std::abs(p.sol.DV(0, 0) - Complex(4.0 / 3.0)) < 1e-15);
  CHECK(p.sol.X.D(0, 0) == Complex(0.5));  // exact in floating point
  CHECK(std::abs(p.sol.entropy - std::log(0.75)) < 1e-15);
  CHECK((eval_transfer(p.sol.X, Complex(0.3, 0.2)) - scalar(0.5)).norm() == 0.0);
}

TEST_CASE("synthesized solution interpolates and both factor identities hold") {
  for (std::uint64_t seed : {101, 102, 103}) {
    const Pipeline p = generated_pipeline(seed, {3, 2, 2, 2});
    const TransferFunction G = g_part(p.r);
    const TransferFunction K = k_part(p.r);
    double kscale = 1.0;
    double worstInterp = 0.0;
    double worstFactor = 0.0;
    double worstOuter = 0.0;
    const Matrix Iq = Matrix::Identity(p.r.dims().q, p.r.dims().q);
    for (int k = 0; k < 512; ++k) {
      const Complex z = std::polar(1.0, 2.0 * std::numbers::pi * k / 512.0);
      const Matrix Gz = eval_transfer(G, z);
      const Matrix Kz = eval_transfer(K, z);
      const Matrix Xz = eval_transfer(p.sol.X, z);
      const Matrix Tz = eval_transfer(p.sol.Theta, z);
      kscale = std::max(kscale, Kz.norm());
      worstInterp = std::max(worstInterp, (Gz * Xz - Kz).norm());
      worstFactor = std::max(
          worstFactor,
          (Gz * eval_transfer(p.sol.U, z) - Kz * eval_transfer(p.sol.V, z)).norm());
      worstOuter = std::max(worstOuter, (Iq - Xz.adjoint() * Xz - Tz.adjoint() * Tz).norm());
    }
    CHECK(worstInterp <= 1e-9 * kscale);
    CHECK(worstFactor <= 1e-9 * kscale);
    CHECK(worstOuter <= 1e-8);
  }
}

TEST_CASE("solution bundle invariants on generated instances") {
  for (std::uint64_t seed : {111, 112, 113}) {
    const Pipeline p = generated_pipeline(seed, {2, 2, 2, 1});
    const Dimensions d = p.r.dims();

    CHECK(spectral_radius(p.sol.Across) < 1.0);
    CHECK(min_eig_hermitian(p.sol.DV) > 0.0);
    CHECK((p.sol.DV - p.sol.DV.adjoint()).norm() <= 1e-14 * (1.0 + p.sol.DV.norm()));

    // coupling annihilation and the two Omega forms
    const Matrix null_resid =
        p.sol.Omega + (p.pd.P2 - p.pd.P1) + (p.pd.P2 - p.pd.P1) * p.cert.Q * p.sol.Omega;
    CHECK(null_resid.norm() <= 1e-10 * (1.0 + p.sol.Omega.norm()));
    const Matrix In = Matrix::Identity(d.n, d.n);
    const Matrix Qinv = hermitize(p.cert.Q.llt().solve(In));
    const Matrix form2 =
        (p.pd.P1 - p.pd.P2) * (Qinv + p.pd.P2 - p.pd.P1).partialPivLu().solve(Qinv);
    CHECK((p.sol.Omega - form2).norm() <= 1e-10 * (1.0 + p.sol.Omega.norm()));

    // B0 via the equivalent route
    const Matrix b0alt =
        p.r.B2 - p.pd.Gamma * p.sol.D0 + p.r.A * p.sol.Omega * p.sol.C2.adjoint();
    CHECK((p.sol.B0 - b0alt).norm() <= 1e-10 * (1.0 + p.sol.B0.norm()));

    // metric constraint, entropy, degree
    const SupNormEstimate nrm = supnorm_estimate(p.sol.X);
    CHECK(nrm.value < 1.0 - 1e-6);
    CHECK(p.sol.entropy < 0.0);
    const double viaIntegral = entropy_integral(p.sol.X, 4096);
    CHECK(std::abs(viaIntegral - p.sol.entropy) <= 1e-6 * std::abs(p.sol.entropy));
    CHECK(mcmillan_degree_estimate(p.sol.X) <= d.n);

    // V V^{-1} = I and Theta = DV^{1/2} V^{-1} on a few circle points
    for (int k = 0; k < 16; ++k) {
      const Complex z = std::polar(1.0, 2.0 * std::numbers::pi * k / 16.0);
      const Matrix VV = eval_transfer(p.sol.V, z) * eval_transfer(p.sol.Vinv, z);
      CHECK((VV - Matrix::Identity(d.q, d.q)).norm() <= 1e-10);
      const Matrix lhs = eval_transfer(p.sol.Theta, z);
      const Matrix rhs = hermitian_sqrt(p.sol.DV) * eval_transfer(p.sol.Vinv, z);
      CHECK((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }
  }
}

TEST_CASE("entropy_integral closed forms") {
  TransferFunction zero{Matrix::Zero(1, 1), Matrix(1, 0), Matrix(0, 0), Matrix(0, 1)};
  CHECK(entropy_integral(zero, 128) == 0.0);
  TransferFunction half{scalar(0.5), Matrix(1, 0), Matrix(0, 0), Matrix(0, 1)};
  CHECK(std::abs(entropy_integral(half, 128) - std::log(0.75)) < 1e-15);
}

TEST_CASE("entropy_integral rejects an expansive function") {
  TransferFunction big{scalar(1.2), Matrix(1, 0), Matrix(0, 0), Matrix(0, 1)};
  CHECK_THROWS_AS(entropy_integral(big, 16), MetricError);
}

TEST_CASE("supnorm_estimate closed forms") {
  TransferFunction zero{Matrix::Zero(1, 1), Matrix(1, 0), Matrix(0, 0), Matrix(0, 1)};
  CHECK(supnorm_estimate(zero).value == 0.0);
  // X(z) = 0.5 z attains modulus 0.5 everywhere on the circle
  TransferFunction halfz{scalar(0.0), scalar(1.0), scalar(0.0), scalar(0.5)};
  const SupNormEstimate est = supnorm_estimate(halfz, 64, 20);
  CHECK(est.value == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(est.grid_points == 64);
}

TEST_CASE("supnorm_estimate refinement improves on a coarse grid") {
  // pole near the circle gives a sharp peak between coarse grid points
  TransferFunction tf{scalar(0.0), scalar(1.0), scalar(0.0), scalar(1.0)};
  tf.A(0, 0) = std::polar(0.93, 0.37);
  const double coarse = supnorm_estimate(tf, 16, 0).value;
  const double refined = supnorm_estimate(tf, 16, 48).value;
  const double dense = supnorm_estimate(tf, 16384, 48).value;
  CHECK(refined >= coarse);
  CHECK(refined <= dense * (1.0 + 1e-9));
  CHECK(refined >= dense * (1.0 - 1e-6));
}

TEST_CASE("synthesize flags an inconsistent certificate") {
  const Pipeline p = generated_pipeline(131, {2, 2, 2, 1});
  RiccatiCertificate broken = p.cert;
  broken.A0 += 0.5 * Matrix::Identity(broken.A0.rows(), broken.A0.cols());
  CHECK_THROWS_AS(synthesize(p.r, p.pd, broken), SolverError);
}
