#include "leech/problem_io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace leech {

namespace {

using nlohmann::json;

constexpr const char* kProblemSchema = "leech-problem/1";
constexpr const char* kReportSchema = "leech-report/1";
constexpr const char* kSolutionSchema = "leech-solution/1";

std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

json matrix_to_json(const Matrix& M) {
  json arr = json::array();
  for (Index i = 0; i < M.rows(); ++i)
    for (Index j = 0; j < M.cols(); ++j)
      arr.push_back(json::array({M(i, j).real(), M(i, j).imag()}));
  return arr;
}

Matrix matrix_from_json(const json& j, Index rows, Index cols, const std::string& field,
                        const std::string& origin) {
  auto fail = [&](Index entry, const std::string& why) {
    std::ostringstream os;
    os << origin << ": field '" << field << "'";
    if (entry >= 0) os << ", entry " << entry;
    os << ": " << why;
    throw IoError(os.str());
  };
  if (!j.is_array()) fail(-1, "expected a row-major array of [re, im] pairs");
  if (static_cast<Index>(j.size()) != rows * cols) {
    std::ostringstream os;
    os << "expected " << rows * cols << " entries for a " << rows << "x" << cols
       << " matrix, got " << j.size();
    fail(-1, os.str());
  }
  Matrix M(rows, cols);
  Index k = 0;
  for (Index i = 0; i < rows; ++i) {
    for (Index c = 0; c < cols; ++c, ++k) {
      const json& e = j[static_cast<std::size_t>(k)];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        fail(k, "expected a [re, im] pair of numbers");
      M(i, c) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  }
  return M;
}

Index dim_from_json(const json& dims, const char* key, const std::string& origin) {
  if (!dims.contains(key) || !dims[key].is_number_integer() || dims[key].get<long long>() < 0) {
    std::ostringstream os;
    os << origin << ": field 'dimensions." << key << "': expected a nonnegative integer";
    throw IoError(os.str());
  }
  return dims[key].get<Index>();
}

json transfer_to_json(const TransferFunction& tf) {
  json j;
  j["rows"] = tf.rows();
  j["cols"] = tf.cols();
  j["states"] = tf.states();
  j["D"] = matrix_to_json(tf.D);
  j["C"] = matrix_to_json(tf.C);
  j["A"] = matrix_to_json(tf.A);
  j["B"] = matrix_to_json(tf.B);
  return j;
}

Matrix randn_complex(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix M(rows, cols);
  const double s = 1.0 / std::sqrt(2.0);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) M(i, j) = Complex(g(rng) * s, g(rng) * s);
  return M;
}

// Normal stable matrix with explicitly placed, well-separated eigenvalues;
// random gaussian state matrices cluster their spectra, which degrades the
// observability conditioning of the composed instance.
Matrix random_stable(Index n, double rho_target, std::mt19937_64& rng) {
  if (n == 0) return Matrix(0, 0);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);
  Vector lam(n);
  for (Index k = 0; k < n; ++k) {
    const double radius =
        rho_target * (0.45 + 0.55 * (static_cast<double>(k) + 1.0) / static_cast<double>(n));
    const double angle = 2.0 * std::numbers::pi *
                         ((static_cast<double>(k) + 0.25 * jitter(rng)) / static_cast<double>(n));
    lam(k) = std::polar(radius, angle);
  }
  const Matrix U = Eigen::HouseholderQR<Matrix>(randn_complex(n, n, rng)).householderQ();
  return U * lam.asDiagonal() * U.adjoint();
}

// random unitary-diagonal-unitary product with singular values in [1, 2]
Matrix random_well_conditioned(Index m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(1.0, 2.0);
  const Matrix Q1 = Eigen::HouseholderQR<Matrix>(randn_complex(m, m, rng)).householderQ();
  const Matrix Q2 = Eigen::HouseholderQR<Matrix>(randn_complex(m, m, rng)).householderQ();
  Eigen::VectorXd d(m);
  for (Index i = 0; i < m; ++i) d(i) = u(rng);
  return Q1 * d.cast<Complex>().asDiagonal() * Q2.adjoint();
}

// G sampled invertible outer: D invertible with sigma_min >= 1, zeros of G
// (eigenvalues of A - B D^{-1} C) pushed inside the disc by shrinking C.
TransferFunction sample_invertible_outer(Index n, Index m, std::mt19937_64& rng,
                                         int& budget) {
  std::uniform_real_distribution<double> rho(0.3, 0.75);
  while (budget-- > 0) {
    TransferFunction G;
    G.A = random_stable(n, rho(rng), rng);
    G.B = randn_complex(n, m, rng);
    G.C = randn_complex(m, n, rng) / std::sqrt(static_cast<double>(std::max<Index>(1, n)));
    G.D = random_well_conditioned(m, rng);
    if (n == 0) return G;
    // zeros of G become closed-loop modes downstream; keep them away from
    // the circle so section truncations decay at a useful rate
    Eigen::PartialPivLU<Matrix> dlu(G.D);
    for (int shrink = 0; shrink < 8; ++shrink) {
      const Matrix zerosA = G.A - G.B * dlu.solve(G.C);
      if (spectral_radius(zerosA) < 0.9) return G;
      G.C *= 0.5;
    }
  }
  throw GenerationError("generate_instance: retry budget exhausted while sampling an outer G");
}

TransferFunction sample_contraction(Index nx, Index p, Index q, double radius,
                                    Index grid_points, std::mt19937_64& rng, int& budget) {
  std::uniform_real_distribution<double> rho(0.2, 0.6);
  while (budget-- > 0) {
    TransferFunction X0;
    X0.A = random_stable(nx, rho(rng), rng);
    X0.B = randn_complex(nx, q, rng);
    X0.C = randn_complex(p, nx, rng);
    X0.D = randn_complex(p, q, rng);
    const double s = supnorm_estimate(X0, grid_points, 40).value;
    if (!(s > 0.0)) continue;
    const double f = radius / s;
    X0.C *= f;
    X0.D *= f;
    return X0;
  }
  throw GenerationError("generate_instance: retry budget exhausted while sampling a contraction");
}

int run_guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

ProblemFile parse_problem(const std::string& text, const std::string& origin) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(origin + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("schema") || !j["schema"].is_string() ||
      j["schema"].get<std::string>() != kProblemSchema)
    throw IoError(origin + ": missing or unsupported schema (expected \"" +
                  std::string(kProblemSchema) + "\")");
  if (!j.contains("dimensions") || !j["dimensions"].is_object())
    throw IoError(origin + ": missing 'dimensions' object");
  const json& dims = j["dimensions"];
  Dimensions d;
  d.n = dim_from_json(dims, "n", origin);
  d.m = dim_from_json(dims, "m", origin);
  d.p = dim_from_json(dims, "p", origin);
  d.q = dim_from_json(dims, "q", origin);
  if (d.m < 1 || d.p < 1 || d.q < 1)
    throw IoError(origin + ": dimensions m, p, q must be at least 1");

  auto need = [&](const char* key) -> const json& {
    if (!j.contains(key)) throw IoError(origin + ": missing matrix field '" + key + "'");
    return j[key];
  };
  ProblemFile pf;
  pf.realization.A = matrix_from_json(need("A"), d.n, d.n, "A", origin);
  pf.realization.B1 = matrix_from_json(need("B1"), d.n, d.p, "B1", origin);
  pf.realization.B2 = matrix_from_json(need("B2"), d.n, d.q, "B2", origin);
  pf.realization.C = matrix_from_json(need("C"), d.m, d.n, "C", origin);
  pf.realization.D1 = matrix_from_json(need("D1"), d.m, d.p, "D1", origin);
  pf.realization.D2 = matrix_from_json(need("D2"), d.m, d.q, "D2", origin);

  if (j.contains("metadata")) {
    const json& meta = j["metadata"];
    if (!meta.is_object()) throw IoError(origin + ": 'metadata' must be an object");
    if (meta.contains("seed")) pf.seed = meta["seed"].get<std::uint64_t>();
    if (meta.contains("description")) pf.description = meta["description"].get<std::string>();
  }

  const auto violations = validate_realization(pf.realization);
  if (!violations.empty()) {
    std::ostringstream os;
    os << origin << ": realization invalid:";
    for (const auto& v : violations) os << " [" << v.message << "]";
    throw IoError(os.str());
  }
  return pf;
}

ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str(), path);
}

std::string problem_to_string(const ProblemFile& pf) {
  const Dimensions d = pf.realization.dims();
  json j;
  j["schema"] = kProblemSchema;
  j["dimensions"] = {{"n", d.n}, {"m", d.m}, {"p", d.p}, {"q", d.q}};
  j["A"] = matrix_to_json(pf.realization.A);
  j["B1"] = matrix_to_json(pf.realization.B1);
  j["B2"] = matrix_to_json(pf.realization.B2);
  j["C"] = matrix_to_json(pf.realization.C);
  j["D1"] = matrix_to_json(pf.realization.D1);
  j["D2"] = matrix_to_json(pf.realization.D2);
  if (pf.seed || !pf.description.empty()) {
    json meta = json::object();
    if (pf.seed) meta["seed"] = *pf.seed;
    if (!pf.description.empty()) meta["description"] = pf.description;
    j["metadata"] = meta;
  }
  return j.dump(2) + "\n";
}

void save_problem(const ProblemFile& pf, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path + ": cannot open for writing");
  out << problem_to_string(pf);
  if (!out) throw IoError(path + ": write failed");
}

Realization compose_instance(const TransferFunction& G, const TransferFunction& X0) {
  if (G.cols() != X0.rows())
    throw DimensionError("compose_instance: inner dimensions of G and X0 differ");
  const Index n = G.states();
  const Index nx = X0.states();
  const Index m = G.rows();
  const Index p = G.cols();
  const Index q = X0.cols();

  Realization r;
  r.A = Matrix::Zero(n + nx, n + nx);
  r.A.topLeftCorner(n, n) = G.A;
  r.A.topRightCorner(n, nx) = G.B * X0.C;
  r.A.bottomRightCorner(nx, nx) = X0.A;
  r.B1 = Matrix::Zero(n + nx, p);
  r.B1.topRows(n) = G.B;
  r.B2 = Matrix::Zero(n + nx, q);
  r.B2.topRows(n) = G.B * X0.D;
  r.B2.bottomRows(nx) = X0.B;
  r.C = Matrix::Zero(m, n + nx);
  r.C.leftCols(n) = G.C;
  r.C.rightCols(nx) = G.D * X0.C;
  r.D1 = G.D;
  r.D2 = G.D * X0.D;
  return r;
}

ProblemFile generate_instance(const GenerateOptions& opts) {
  if (opts.dims.m != opts.dims.p)
    throw GenerationError("generate_instance: solvability guarantee requires m = p");
  if (!(opts.radius > 0.0 && opts.radius < 1.0))
    throw GenerationError("generate_instance: radius must lie in (0, 1)");
  std::mt19937_64 rng(opts.seed);
  int budget = opts.retry_budget;
  while (budget > 0) {
    const TransferFunction G = sample_invertible_outer(opts.dims.n, opts.dims.m, rng, budget);
    const Index nx = opts.dims.n == 0 ? 0 : 1 + static_cast<Index>(rng() % 3);
    const TransferFunction X0 =
        sample_contraction(nx, opts.dims.p, opts.dims.q, opts.radius, opts.grid_points, rng,
                           budget);
    ProblemFile pf;
    pf.realization = compose_instance(G, X0);
    if (!validate_realization(pf.realization).empty()) continue;
    // the certificate tests strict positivity of Q against an absolute
    // margin, so nearly unobservable composites (Q close to singular) must
    // be resampled even though they pass the rank test
    if (pf.realization.A.rows() > 0) {
      const Matrix gramian = solve_stein_symmetric(pf.realization.A.adjoint(),
                                                   pf.realization.C.adjoint());
      if (min_eig_hermitian(gramian) <= 3e-7 * (1.0 + max_eig_hermitian(gramian))) continue;
    }
    pf.seed = opts.seed;
    std::ostringstream os;
    os << "generated instance: contraction radius " << opts.radius;
    pf.description = os.str();
    return pf;
  }
  throw GenerationError("generate_instance: retry budget exhausted");
}

std::string report_to_string(const VerificationReport& report) {
  json j;
  j["schema"] = kReportSchema;
  json fp;
  fp["dimensions"] = {{"n", report.dims.n},
                      {"m", report.dims.m},
                      {"p", report.dims.p},
                      {"q", report.dims.q}};
  fp["rhoA"] = report.rhoA;
  if (report.seed) fp["seed"] = *report.seed;
  j["fingerprint"] = fp;
  j["overall_pass"] = report.overall_pass;
  json checks = json::array();
  for (const auto& c : report.checks) {
    json rec;
    rec["name"] = c.name;
    rec["statement"] = c.statement;
    rec["residual"] = c.residual;
    rec["tolerance"] = c.tolerance;
    rec["pass"] = c.pass;
    rec["mandatory"] = c.mandatory;
    checks.push_back(rec);
  }
  j["checks"] = checks;
  return j.dump(2) + "\n";
}

VerificationReport report_from_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("report: ") + e.what());
  }
  if (!j.contains("schema") || j["schema"].get<std::string>() != kReportSchema)
    throw IoError("report: missing or unsupported schema");
  VerificationReport rep;
  const json& fp = j.at("fingerprint");
  const json& dims = fp.at("dimensions");
  rep.dims = {dims.at("n").get<Index>(), dims.at("m").get<Index>(), dims.at("p").get<Index>(),
              dims.at("q").get<Index>()};
  rep.rhoA = fp.at("rhoA").get<double>();
  if (fp.contains("seed")) rep.seed = fp["seed"].get<std::uint64_t>();
  for (const json& rec : j.at("checks")) {
    CheckRecord c;
    c.name = rec.at("name").get<std::string>();
    c.statement = rec.at("statement").get<std::string>();
    c.residual = rec.at("residual").get<double>();
    c.tolerance = rec.at("tolerance").get<double>();
    c.pass = rec.at("pass").get<bool>();
    c.mandatory = rec.at("mandatory").get<bool>();
    rep.checks.push_back(std::move(c));
  }
  rep.overall_pass = j.at("overall_pass").get<bool>();
  return rep;
}

std::string solution_to_string(const Realization& r, const RiccatiCertificate& cert,
                               const SolutionBundle& sol, const SupNormEstimate& nrm) {
  const Dimensions d = r.dims();
  json j;
  j["schema"] = kSolutionSchema;
  j["dimensions"] = {{"n", d.n}, {"m", d.m}, {"p", d.p}, {"q", d.q}};
  j["entropy"] = sol.entropy;
  j["supnorm"] = {{"value", nrm.value},
                  {"omega", nrm.omega},
                  {"grid_points", nrm.grid_points},
                  {"refine_depth", nrm.refine_depth}};
  json cj;
  cj["Q"] = matrix_to_json(cert.Q);
  cj["Delta"] = matrix_to_json(cert.Delta);
  cj["C0"] = matrix_to_json(cert.C0);
  cj["A0"] = matrix_to_json(cert.A0);
  cj["rhoA0"] = cert.rhoA0;
  cj["minEigDelta"] = cert.minEigDelta;
  cj["minEigQ"] = cert.minEigQ;
  cj["riccatiResidual"] = cert.riccatiResidual;
  cj["minEigCondII"] = cert.minEigCondII;
  j["certificate"] = cj;
  j["X"] = transfer_to_json(sol.X);
  j["U"] = transfer_to_json(sol.U);
  j["V"] = transfer_to_json(sol.V);
  return j.dump(2) + "\n";
}

void write_sweep(std::ostream& out, const Realization& r, const TransferFunction& X,
                 Index grid_points) {
  if (grid_points < 1) throw DomainError("write_sweep: grid_points must be >= 1");
  const TransferFunction G = g_part(r);
  const TransferFunction K = k_part(r);
  const Matrix Iq = Matrix::Identity(X.cols(), X.cols());
  out << "omega,norm_X,min_eig_I_minus_XstarX,resid_GX_K\n";
  for (Index k = 0; k < grid_points; ++k) {
    const double omega = 2.0 * std::numbers::pi * static_cast<double>(k) /
                         static_cast<double>(grid_points);
    const Complex z = std::polar(1.0, omega);
    const Matrix Xz = eval_transfer(X, z);
    const double nx = operator_norm(Xz);
    const double me = min_eig_hermitian(Iq - Xz.adjoint() * Xz);
    const double resid = operator_norm(eval_transfer(G, z) * Xz - eval_transfer(K, z));
    out << fmt_double(omega) << ',' << fmt_double(nx) << ',' << fmt_double(me) << ','
        << fmt_double(resid) << '\n';
  }
}

int cmd_solve(const SolveArgs& args, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&]() -> int {
    const ProblemFile pf = load_problem(args.input);
    const ProblemData pd = compute_problem_data(pf.realization);
    DareOptions dopts;
    dopts.initial_sections = args.sections;
    dopts.tol_scale = args.tol_scale;
    const DareResult res = solve_dare_stabilizing(pf.realization, pd, dopts);
    if (const auto* fail = std::get_if<NotStrictlyPositive>(&res)) {
      out << "not strictly positive: " << fail->message << "\n";
      return 2;
    }
    const auto& cert = std::get<RiccatiCertificate>(res);
    const SolutionBundle sol = synthesize(pf.realization, pd, cert);
    const SupNormEstimate nrm = supnorm_estimate(sol.X);
    out << "entropy " << fmt_double(sol.entropy) << "\n";
    out << "supnorm_estimate " << fmt_double(nrm.value) << "\n";
    if (!args.output.empty()) {
      std::ofstream f(args.output, std::ios::binary);
      if (!f) throw IoError(args.output + ": cannot open for writing");
      f << solution_to_string(pf.realization, cert, sol, nrm);
    }
    return 0;
  });
}

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&]() -> int {
    const ProblemFile pf = load_problem(args.input);
    const ProblemData pd = compute_problem_data(pf.realization);
    DareOptions dopts;
    dopts.tol_scale = args.tol_scale;
    const DareResult res = solve_dare_stabilizing(pf.realization, pd, dopts);
    if (const auto* fail = std::get_if<NotStrictlyPositive>(&res)) {
      out << "not strictly positive: " << fail->message << "\n";
      return 2;
    }
    const auto& cert = std::get<RiccatiCertificate>(res);
    const SolutionBundle sol = synthesize(pf.realization, pd, cert);
    VerifyOptions vopts;
    vopts.tol_scale = args.tol_scale;
    vopts.circle_points = args.grid_points;
    VerificationReport rep = run_identity_suite(pf.realization, pd, cert, sol, vopts);
    rep.merge(run_operator_suite(pf.realization, pd, cert, sol, args.sections, vopts));
    rep.seed = pf.seed;
    for (const auto& c : rep.checks)
      out << (c.pass ? "PASS " : "FAIL ") << c.name << " residual " << fmt_double(c.residual)
          << " tolerance " << fmt_double(c.tolerance) << (c.mandatory ? "" : " (informational)")
          << "\n";
    out << (rep.overall_pass ? "overall PASS" : "overall FAIL") << "\n";
    if (!args.output.empty()) {
      std::ofstream f(args.output, std::ios::binary);
      if (!f) throw IoError(args.output + ": cannot open for writing");
      f << report_to_string(rep);
    }
    return rep.overall_pass ? 0 : 1;
  });
}

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&]() -> int {
    const ProblemFile pf = load_problem(args.input);
    const ProblemData pd = compute_problem_data(pf.realization);
    const DareResult res = solve_dare_stabilizing(pf.realization, pd);
    if (const auto* fail = std::get_if<NotStrictlyPositive>(&res)) {
      err << "not strictly positive: " << fail->message << "\n";
      return 2;
    }
    const SolutionBundle sol = synthesize(pf.realization, pd, std::get<RiccatiCertificate>(res));
    if (!args.output.empty()) {
      std::ofstream f(args.output, std::ios::binary);
      if (!f) throw IoError(args.output + ": cannot open for writing");
      write_sweep(f, pf.realization, sol.X, args.grid_points);
    } else {
      write_sweep(out, pf.realization, sol.X, args.grid_points);
    }
    return 0;
  });
}

int cmd_generate(const GenerateArgs& args, std::ostream& out, std::ostream& err) {
  return run_guarded(err, [&]() -> int {
    GenerateOptions opts;
    opts.seed = args.seed;
    opts.dims = args.dims;
    opts.radius = args.radius;
    const ProblemFile pf = generate_instance(opts);
    save_problem(pf, args.output);
    const Dimensions d = pf.realization.dims();
    out << "wrote " << args.output << " (state order " << d.n << ")\n";
    return 0;
  });
}

}  // namespace leech
