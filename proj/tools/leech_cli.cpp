#include <CLI11.hpp>

#include <iostream>
#include <vector>

#include "leech/problem_io.hpp"

namespace {

leech::Dimensions parse_dims(const std::vector<long long>& v) {
  if (v.size() != 4) throw CLI::ValidationError("--dims expects n,m,p,q");
  return {v[0], v[1], v[2], v[3]};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Leech problem solver: maximum entropy interpolation G X = K, |X| <= 1"};
  app.require_subcommand(1);

  leech::SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "solve an instance and write the solution");
  solve->add_option("--input", solve_args.input, "problem file")->required();
  solve->add_option("--output", solve_args.output, "solution file");
  solve->add_option("--sections", solve_args.sections, "Riccati section count (0 = automatic)");
  solve->add_option("--tol-scale", solve_args.tol_scale, "tolerance multiplier");

  leech::VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "run the identity and operator suites");
  verify->add_option("--input", verify_args.input, "problem file")->required();
  verify->add_option("--output", verify_args.output, "report file");
  verify->add_option("--sections", verify_args.sections, "operator section count");
  verify->add_option("--grid", verify_args.grid_points, "circle grid points");
  verify->add_option("--tol-scale", verify_args.tol_scale, "tolerance multiplier");

  leech::SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "tabulate X along the unit circle as CSV");
  sweep->add_option("--input", sweep_args.input, "problem file")->required();
  sweep->add_option("--output", sweep_args.output, "csv file (default stdout)");
  sweep->add_option("--grid", sweep_args.grid_points, "circle grid points");

  leech::GenerateArgs gen_args;
  std::vector<long long> dims{2, 2, 2, 2};
  auto* gen = app.add_subcommand("generate", "write a random solvable instance");
  gen->add_option("--output", gen_args.output, "problem file")->required();
  gen->add_option("--seed", gen_args.seed, "random seed");
  gen->add_option("--dims", dims, "n,m,p,q (m = p required)")->delimiter(',')->expected(4);
  gen->add_option("--radius", gen_args.radius, "contraction radius in (0, 1)");

  CLI11_PARSE(app, argc, argv);

  if (solve->parsed()) return leech::cmd_solve(solve_args, std::cout, std::cerr);
  if (verify->parsed()) return leech::cmd_verify(verify_args, std::cout, std::cerr);
  if (sweep->parsed()) return leech::cmd_sweep(sweep_args, std::cout, std::cerr);
  if (gen->parsed()) {
    try {
      gen_args.dims = parse_dims(dims);
    } catch (const CLI::Error& e) {
      std::cerr << e.what() << "\n";
      return 1;
    }
    return leech::cmd_generate(gen_args, std::cout, std::cerr);
  }
  return 1;
}
