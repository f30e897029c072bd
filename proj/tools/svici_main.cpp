// svici - confidence intervals for piecewise normal centers and for true
// solutions of stochastic variational inequalities from SAA solutions.

#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "svici/bench.hpp"
#include "svici/inference.hpp"
#include "svici/pwnormal.hpp"
#include "svici/svi.hpp"
#include "svici/textio.hpp"

namespace {

using namespace svici;

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void print_vector(std::ostream& out, const std::string& name,
                  const Vector& v) {
  out << name << " = (";
  for (std::size_t j = 0; j < v.size(); ++j)
    out << (j ? ", " : "") << fmt(v[j], "%.6g");
  out << ")\n";
}

void print_matrix(std::ostream& out, const std::string& name,
                  const Matrix& m) {
  out << name << " =\n";
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << "  ";
    for (std::size_t j = 0; j < m.cols(); ++j)
      out << (j ? " " : "") << fmt(m(i, j), "%12.6g");
    out << '\n';
  }
}

void print_intervals(std::ostream& out, const std::string& what,
                     const IntervalReport& r) {
  out << what << " intervals (level " << fmt(100 * (1 - r.alpha1 - r.alpha2),
                                             "%.4g")
      << "%):\n";
  for (std::size_t j = 0; j < r.center.size(); ++j) {
    out << "  [" << j + 1 << "] ";
    if (r.half_widths[j] == 0.0)
      out << "{" << fmt(r.center[j], "%.6g") << "}";
    else
      out << "[" << fmt(r.lower(j), "%.6g") << ", " << fmt(r.upper(j), "%.6g")
          << "]";
    out << "  center " << fmt(r.center[j], "%.6g") << "  half-width "
        << fmt(r.half_widths[j], "%.6g") << '\n';
  }
}

ConePattern parse_cone(const std::string& s) {
  ConePattern k;
  k.c.reserve(s.size());
  for (char ch : s) {
    switch (ch) {
      case '+': k.c.push_back(ConeCoord::kNonneg); break;
      case '-': k.c.push_back(ConeCoord::kNonpos); break;
      case '0': k.c.push_back(ConeCoord::kZero); break;
      case '*': k.c.push_back(ConeCoord::kFull); break;
      default:
        throw ParseError(std::string("cone: unexpected character '") + ch +
                         "' (use + - 0 *)");
    }
  }
  return k;
}

int cmd_exact_ci(const std::string& model_path, double alpha_override) {
  KeyFile kf = KeyFile::load_file(model_path);
  const auto n = static_cast<std::size_t>(kf.get_number("dim"));
  PiecewiseLinearMap gamma =
      normal_map_pieces(kf.matrix("l"), parse_cone(kf.get_string("cone")));
  if (gamma.dim() != n) throw Error("model: l/cone dimension mismatch");
  CovMatrix sigma = CovMatrix::from_matrix(kf.matrix("sigma"));
  Vector a0 = kf.has_vector("a0") ? kf.vec("a0") : Vector(n, 0.0);
  PiecewiseNormalModel model(std::move(gamma), std::move(sigma), a0);
  Vector z = kf.vec("z");
  double alpha = alpha_override > 0 ? alpha_override
                                    : kf.get_number("alpha", 0.05);
  IntervalReport r = exact_ci(model, z, alpha);
  std::cout << "piece: " << r.selected << '\n';
  print_vector(std::cout, "center", r.center);
  print_intervals(std::cout, "z0", r);
  return 0;
}

struct SaaInputs {
  BoxSet set;
  Matrix a_bar;
  Vector b_bar;
  std::optional<CovMatrix> sigma;
  std::size_t n_samples = 0;
  std::optional<std::size_t> band;
};

SaaInputs load_saa_file(const std::string& path) {
  KeyFile kf = KeyFile::load_file(path);
  SaaInputs in;
  const auto n = static_cast<std::size_t>(kf.get_number("dim"));
  in.set = parse_box_set(kf, n);
  in.a_bar = kf.matrix("a_bar");
  in.b_bar = kf.vec("b_bar");
  in.n_samples = static_cast<std::size_t>(kf.get_number("samples"));
  if (kf.has_matrix("sigma_n"))
    in.sigma = CovMatrix::from_matrix(kf.matrix("sigma_n"));
  in.band = kf.declared_bandwidth("a_bar");
  return in;
}

int cmd_svi_solve(const std::string& saa_file, const std::string& problem,
                  std::size_t n, std::size_t n_samples, std::uint64_t seed) {
  if (!saa_file.empty()) {
    SaaInputs in = load_saa_file(saa_file);
    Vector start = Vector(in.b_bar.size(), 0.0) - in.b_bar;
    auto [z, x] = solve_normal_map(in.a_bar, in.b_bar, in.set, start, in.band);
    Matrix m_n = jacobian_mn(in.a_bar, z, in.set);
    print_vector(std::cout, "z_N", z);
    print_vector(std::cout, "x_N", x);
    print_matrix(std::cout, "M_N", m_n);
    if (in.sigma) print_matrix(std::cout, "Sigma_N", in.sigma->mat());
    return 0;
  }
  auto prob = make_builtin_problem(problem, n);
  RngStream stream = RngStream::derive(seed, 0, StreamRole::kSample);
  SaaSolution sol = solve_saa(*prob, n_samples, stream);
  print_vector(std::cout, "z_N", sol.z_n);
  print_vector(std::cout, "x_N", sol.x_n);
  print_matrix(std::cout, "M_N", sol.m_n);
  print_matrix(std::cout, "Sigma_N", sol.sigma_n.mat());
  return 0;
}

int cmd_svi_ci(const std::string& saa_file, const std::string& problem,
               std::size_t n, std::size_t n_samples, std::uint64_t seed,
               double alpha1, double alpha2) {
  SaaSolution sol = [&] {
    if (!saa_file.empty()) {
      SaaInputs in = load_saa_file(saa_file);
      if (!in.sigma)
        throw Error("svi-ci from an saa file needs 'matrix sigma_n'");
      return solution_from_saa_data(in.a_bar, in.b_bar, in.set, *in.sigma,
                                    in.n_samples, in.band);
    }
    auto prob = make_builtin_problem(problem, n);
    RngStream stream = RngStream::derive(seed, 0, StreamRole::kSample);
    return solve_saa(*prob, n_samples, stream);
  }();
  const BoxSet set = !saa_file.empty() ? load_saa_file(saa_file).set
                                       : make_builtin_problem(problem, n)
                                             ->feasible_set();

  print_vector(std::cout, "z_N", sol.z_n);
  print_vector(std::cout, "x_N", sol.x_n);
  print_matrix(std::cout, "M_N", sol.m_n);
  ConfidenceRegion region = confidence_region(sol, alpha1);
  print_matrix(std::cout, "Q_N shape (M_N^T Sigma_N^{-1} M_N)", region.shape);
  std::cout << "Q_N threshold chi2_n(alpha1)/N = "
            << fmt(region.threshold, "%.6g") << '\n';
  Cell cell = select_cell(region, sol.cell, set);
  std::cout << "selected cell: " << cell.id() << " (dimension " << cell.dim()
            << ")\n";
  IntervalReport rz = ci_z0(sol, cell, alpha1, alpha2);
  print_vector(std::cout, "z-tilde", rz.center);
  print_intervals(std::cout, "z0", rz);
  IntervalReport rx = ci_x0(sol, cell, set, alpha1, alpha2);
  print_vector(std::cout, "x-tilde", rx.center);
  print_intervals(std::cout, "x0", rx);
  return 0;
}

int cmd_coverage(const std::string& config_path, std::uint64_t seed,
                 long reps, const std::string& out_dir,
                 const std::string& format, bool full_scale,
                 long threads, double alpha1, double alpha2) {
  bench::ExperimentConfig cfg = bench::ExperimentConfig::from_file(config_path);
  if (seed) cfg.seed = seed;
  if (reps >= 0) cfg.reps = static_cast<std::size_t>(reps);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (!format.empty()) cfg.format = format;
  if (full_scale) cfg.full_scale = true;
  if (threads >= 0) cfg.threads = static_cast<std::size_t>(threads);
  if (alpha1 > 0 && alpha2 > 0) cfg.budgets = {{alpha1, alpha2}};
  cfg.apply_full_scale();

  auto problem = bench::make_problem(cfg);
  auto t0 = std::chrono::steady_clock::now();
  std::vector<bench::RepRecord> records = bench::run_all(*problem, cfg);
  auto t1 = std::chrono::steady_clock::now();
  bench::CoverageSummary summary = bench::aggregate(*problem, cfg, records);
  std::vector<std::string> files = bench::emit(cfg, summary, records);

  bench::emit_table(summary, std::cout);
  std::cout << "\nelapsed: "
            << std::chrono::duration<double>(t1 - t0).count() << " s\n";
  for (const auto& f : files) std::cout << "wrote " << f << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"confidence intervals for piecewise normal distributions and "
               "stochastic variational inequalities"};
  app.require_subcommand(1);

  std::string model_path, saa_file, config_path, out_dir, format;
  std::string problem = "lcp-example3";
  std::size_t n = 10, n_samples = 500;
  std::uint64_t seed = 1;
  double alpha = 0.0, alpha1 = 0.05, alpha2 = 0.05;
  long reps = -1, threads = -1;
  bool full_scale = false;

  auto* exact = app.add_subcommand(
      "exact-ci", "finite-sample intervals for a piecewise normal center");
  exact->add_option("--model", model_path, "model file")->required();
  exact->add_option("--alpha", alpha, "level override");

  auto* solve = app.add_subcommand(
      "svi-solve", "solve one SAA problem and print z_N, x_N, M_N, Sigma_N");
  solve->add_option("--saa-file", saa_file, "assembled SAA data file");
  solve->add_option("--problem", problem, "built-in generator name");
  solve->add_option("--n", n, "problem dimension");
  solve->add_option("--samples", n_samples, "SAA sample size N");
  solve->add_option("--seed", seed, "master seed");

  auto* ci = app.add_subcommand(
      "svi-ci", "single-shot inference pipeline from SAA data");
  ci->add_option("--saa-file", saa_file, "assembled SAA data file");
  ci->add_option("--problem", problem, "built-in generator name");
  ci->add_option("--n", n, "problem dimension");
  ci->add_option("--samples", n_samples, "SAA sample size N");
  ci->add_option("--seed", seed, "master seed");
  ci->add_option("--alpha1", alpha1, "confidence-region budget");
  ci->add_option("--alpha2", alpha2, "interval budget");

  auto* cov = app.add_subcommand("coverage",
                                 "Monte Carlo coverage study from a config");
  cov->add_option("--config", config_path, "experiment config file")
      ->required();
  std::uint64_t seed_override = 0;
  cov->add_option("--seed", seed_override, "master seed override");
  cov->add_option("--reps", reps, "replication count override");
  cov->add_option("--out", out_dir, "output directory");
  cov->add_option("--format", format, "csv or table");
  cov->add_flag("--full-scale", full_scale,
                "restore the paper-scale dimensions");
  cov->add_option("--threads", threads, "worker count (0 = hardware)");
  double ca1 = 0, ca2 = 0;
  cov->add_option("--alpha1", ca1, "single-budget alpha1 override");
  cov->add_option("--alpha2", ca2, "single-budget alpha2 override");

  CLI11_PARSE(app, argc, argv);

  try {
    if (exact->parsed()) return cmd_exact_ci(model_path, alpha);
    if (solve->parsed())
      return cmd_svi_solve(saa_file, problem, n, n_samples, seed);
    if (ci->parsed())
      return cmd_svi_ci(saa_file, problem, n, n_samples, seed, alpha1, alpha2);
    if (cov->parsed())
      return cmd_coverage(config_path, seed_override, reps, out_dir, format,
                          full_scale, threads, ca1, ca2);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
