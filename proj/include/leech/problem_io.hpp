#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "leech/realization.hpp"
#include "leech/synthesis.hpp"
#include "leech/verification.hpp"

namespace leech {

// On-disk problem instance (schema "leech-problem/1"): dimensions plus the
// six realization matrices as row-major arrays of [re, im] pairs.
struct ProblemFile {
  Realization realization;
  std::optional<std::uint64_t> seed;
  std::string description;
};

// Parses and validates; throws IoError with located diagnostics on
// malformed input, dimension mismatches, or validity violations.
ProblemFile load_problem(const std::string& path);
ProblemFile parse_problem(const std::string& text, const std::string& origin = "<string>");

std::string problem_to_string(const ProblemFile& pf);
void save_problem(const ProblemFile& pf, const std::string& path);

struct GenerateOptions {
  std::uint64_t seed = 1;
  Dimensions dims;       // n is the state order of G before composition
  double radius = 0.7;   // sup-norm bound of the hidden contraction, in (0, 1)
  int retry_budget = 200;
  Index grid_points = 1024;  // sup-norm scaling grid
};

// Random instance with a solvability guarantee: G is sampled invertible
// outer (m = p required), X0 is a random stable contraction scaled to
// sup norm `radius`, and K = G X0 is realized by series composition, so
// T_G T_G^* - T_K T_K^* = T_G (I - T_X0 T_X0^*) T_G^* is strictly positive
// by construction. The returned realization has state order n + states(X0).
ProblemFile generate_instance(const GenerateOptions& opts);

// Series interconnection: the joint realization of (G, K = G * X0).
Realization compose_instance(const TransferFunction& G, const TransferFunction& X0);

// Report / solution serialization (schemas "leech-report/1",
// "leech-solution/1").
std::string report_to_string(const VerificationReport& report);
VerificationReport report_from_string(const std::string& text);
std::string solution_to_string(const Realization& r, const RiccatiCertificate& cert,
                               const SolutionBundle& sol, const SupNormEstimate& nrm);

// Sweep rows (omega, ||X(e^{iw})||, min eig(I - X^*X), ||G X - K||) as
// comma-separated text with a header, omega in radians increasing over
// [0, 2 pi).
void write_sweep(std::ostream& out, const Realization& r, const TransferFunction& X,
                 Index grid_points);

// Command layer. Each returns the process exit code: 0 success, 1 error,
// 2 not strictly positive. Diagnostics go to `err`, results to `out`.
struct SolveArgs {
  std::string input;
  std::string output;  // solution file; empty = do not write
  Index sections = 0;  // 0 = automatic
  double tol_scale = 1.0;
};
struct VerifyArgs {
  std::string input;
  std::string output;  // report file; empty = do not write
  Index sections = 64;
  Index grid_points = 512;
  double tol_scale = 1.0;
};
struct SweepArgs {
  std::string input;
  std::string output;  // csv; empty = stdout
  Index grid_points = 512;
};
struct GenerateArgs {
  std::string output;
  std::uint64_t seed = 1;
  Dimensions dims;
  double radius = 0.7;
};

int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err);
int cmd_generate(const GenerateArgs& args, std::ostream& out, std::ostream& err);

}  // namespace leech
