#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "leech/matrix_equations.hpp"
#include "leech/synthesis.hpp"
#include "leech/toeplitz.hpp"

namespace leech {

struct CheckRecord {
  std::string name;
  std::string statement;  // the identity being checked, in plain matrix notation
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  bool mandatory = true;  // informational checks never affect overall_pass
};

struct VerificationReport {
  std::vector<CheckRecord> checks;
  bool overall_pass = true;  // all mandatory checks pass

  // instance fingerprint
  Dimensions dims;
  std::optional<std::uint64_t> seed;
  double rhoA = 0.0;

  void add(CheckRecord rec);
  void merge(const VerificationReport& other);
};

struct VerifyOptions {
  double tol_scale = 1.0;
  Index circle_points = 512;       // residual grids
  Index entropy_points = 4096;     // entropy integral grid
  bool unproved_identity_mandatory = false;
};

// Residuals of the closed-form matrix identities tying the solution
// matrices to the instance data, plus the function-level residuals
// (interpolation G X = K, the factor identity G U = K V, the spectral
// factorization of I - X^*X, and the entropy integral consistency).
VerificationReport run_identity_suite(const Realization& r, const ProblemData& pd,
                                      const RiccatiCertificate& cert,
                                      const SolutionBundle& sol,
                                      const VerifyOptions& opts = {});

// Operator-level checks against the finite-section model: the section
// decomposition, inverse formula, Q and W0 recovery, strict contractivity
// of Lambda, oracle-vs-synthesis Taylor agreement, and the section entropy
// -ln det[E_q^*(I - Lambda^* Lambda)^{-1} E_q] against -ln det D_V.
VerificationReport run_operator_suite(const Realization& r, const ProblemData& pd,
                                      const RiccatiCertificate& cert,
                                      const SolutionBundle& sol, Index N,
                                      const VerifyOptions& opts = {});

}  // namespace leech
