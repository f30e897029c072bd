#include "svici/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

namespace svici::bench {

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_keyfile(KeyFile::load_file(path));
}

ExperimentConfig ExperimentConfig::from_keyfile(const KeyFile& kf) {
  ExperimentConfig cfg;
  cfg.problem = kf.get_string("problem", cfg.problem);
  cfg.n = static_cast<std::size_t>(kf.get_number("n", 10));
  cfg.n_samples = static_cast<std::size_t>(kf.get_number("samples", 500));
  cfg.reps = static_cast<std::size_t>(kf.get_number("reps", 200));
  cfg.seed = kf.get_u64("seed", 1);
  cfg.out_dir = kf.get_string("out", ".");
  cfg.format = kf.get_string("format", "csv");
  cfg.baseline = kf.get_number("baseline", 0) != 0;
  cfg.raw_records = kf.get_number("raw", 0) != 0;
  cfg.full_scale = kf.get_number("full-scale", 0) != 0;
  cfg.threads = static_cast<std::size_t>(kf.get_number("threads", 0));
  if (kf.has("budget")) {
    for (const auto& e : kf.entries("budget")) {
      if (e.size() != 2)
        throw ParseError("budget expects two values: alpha1 alpha2");
      cfg.budgets.push_back({parse_number(e[0]), parse_number(e[1])});
    }
  }
  if (cfg.budgets.empty()) cfg.budgets = {{0.025, 0.025}, {0.01, 0.04}};
  if (cfg.problem == "custom") {
    CustomProblemDef def;
    def.dim = static_cast<std::size_t>(kf.get_number("dim", cfg.n));
    cfg.n = def.dim;
    def.set = parse_box_set(kf, def.dim);
    def.a_lo = kf.matrix("a_lo");
    def.a_hi = kf.matrix("a_hi");
    def.b_lo = kf.vec("b_lo");
    def.b_hi = kf.vec("b_hi");
    if (kf.has_vector("z0")) def.z0 = kf.vec("z0");
    def.band = kf.declared_bandwidth("a_lo");
    cfg.custom = std::move(def);
  }
  return cfg;
}

void ExperimentConfig::apply_full_scale() {
  if (!full_scale) return;
  if (problem.rfind("lcp-example", 0) == 0) {
    n = 30;
    n_samples = 500;
    reps = 500;
  } else if (problem == "qp-banded") {
    n = 3000;
    n_samples = 10000;
    reps = 1000;
  }
}

std::unique_ptr<SviProblem> make_problem(const ExperimentConfig& cfg) {
  if (cfg.problem == "custom") {
    if (!cfg.custom) throw Error("custom problem definition missing");
    return make_custom_problem(*cfg.custom);
  }
  return make_builtin_problem(cfg.problem, cfg.n);
}

namespace {

void score_report(const IntervalReport& r, const Vector& truth,
                  std::vector<std::uint8_t>& hits, Vector& widths) {
  const std::size_t n = truth.size();
  hits.resize(n);
  widths.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    hits[j] = r.covers(j, truth[j]) ? 1 : 0;
    widths[j] = r.half_widths[j];
  }
}

}  // namespace

RepRecord run_replication(const SviProblem& problem,
                          const ExperimentConfig& cfg, std::size_t rep) {
  RepRecord rec;
  rec.rep = rep;
  const BoxSet& s = problem.feasible_set();
  const auto truth_z = problem.true_z();
  const auto truth_x = problem.true_x();
  try {
    RngStream stream = RngStream::derive(cfg.seed, rep, StreamRole::kSample);
    SaaSolution sol = solve_saa(problem, cfg.n_samples, stream);
    CovMatrix lambda = lambda_hat(sol);
    ConfidenceRegion region = confidence_region(sol, cfg.budgets.front().alpha1);
    const double n_dbl = static_cast<double>(sol.n_samples);

    for (const AlphaBudget& budget : cfg.budgets) {
      region.alpha1 = budget.alpha1;
      region.threshold =
          chi2_quantile(static_cast<int>(problem.dim()), budget.alpha1) /
          n_dbl;
      Cell cell = select_cell(region, sol.cell, s);
      IntervalReport rz =
          detail::ci_z0_with(sol, cell, lambda, budget.alpha1, budget.alpha2);
      IntervalReport rx = detail::ci_x0_with(sol, cell, s, lambda,
                                             budget.alpha1, budget.alpha2);
      BudgetOutcome out;
      out.cell = cell.id();
      if (truth_z) score_report(rz, *truth_z, out.z_hit, out.z_width);
      if (truth_x) score_report(rx, *truth_x, out.x_hit, out.x_width);

      if (cfg.baseline && truth_z && truth_x) {
        // Comparison intervals: half-widths sqrt(chi2_1(a1+a2) Lambda_jj / N)
        // around z_N, and their clamp onto S for x0. Not asymptotically
        // exact when the derivative map has more than one piece.
        const std::size_t n = problem.dim();
        const double alpha = budget.alpha1 + budget.alpha2;
        const double c1 = chi2_quantile(1, alpha);
        out.vz_hit.resize(n);
        out.vx_hit.resize(n);
        out.vz_width.resize(n);
        out.vx_width.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
          const double v =
              std::sqrt(std::max(0.0, c1 * lambda(j, j) / n_dbl));
          out.vz_width[j] = v;
          out.vz_hit[j] = std::abs(sol.z_n[j] - (*truth_z)[j]) <= v;
          const double lo =
              std::min(std::max(sol.z_n[j] - v, s.lower[j]), s.upper[j]);
          const double hi =
              std::min(std::max(sol.z_n[j] + v, s.lower[j]), s.upper[j]);
          out.vx_width[j] = 0.5 * (hi - lo);
          out.vx_hit[j] = hi - lo == 0.0
                              ? std::abs((*truth_x)[j] - lo) <= 1e-9
                              : ((*truth_x)[j] >= lo && (*truth_x)[j] <= hi);
        }
      }
      rec.budgets.push_back(std::move(out));
    }
  } catch (const Error& e) {
    rec.skipped = true;
    rec.skip_reason = e.what();
    rec.budgets.clear();
  }
  return rec;
}

std::vector<RepRecord> run_all(const SviProblem& problem,
                               const ExperimentConfig& cfg) {
  std::vector<RepRecord> records(cfg.reps);
  std::size_t workers = cfg.threads
                            ? cfg.threads
                            : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, cfg.reps ? cfg.reps : std::size_t{1});
  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    while (true) {
      std::size_t r = next.fetch_add(1);
      if (r >= cfg.reps) break;
      records[r] = run_replication(problem, cfg, r);
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return records;
}

FiveNumber five_number(Vector values) {
  FiveNumber f;
  if (values.empty()) return f;
  std::sort(values.begin(), values.end());
  auto quantile = [&](double p) {
    const double h = p * static_cast<double>(values.size() - 1);
    const std::size_t i = static_cast<std::size_t>(h);
    if (i + 1 >= values.size()) return values.back();
    return values[i] + (h - static_cast<double>(i)) * (values[i + 1] -
                                                       values[i]);
  };
  f.min = values.front();
  f.q1 = quantile(0.25);
  f.median = quantile(0.5);
  f.q3 = quantile(0.75);
  f.max = values.back();
  return f;
}

CoverageSummary aggregate(const SviProblem& problem,
                          const ExperimentConfig& cfg,
                          const std::vector<RepRecord>& records) {
  const std::size_t n = problem.dim();
  CoverageSummary s;
  s.reps_total = records.size();
  s.budgets = cfg.budgets;
  s.active_z = problem.active_z();
  s.active_x = problem.active_x();

  const std::size_t nb = cfg.budgets.size();
  s.per_budget.assign(nb, {});
  std::vector<std::array<Vector, 2>> hit_sum(nb), width_sum(nb), vhit(nb),
      vwidth(nb);
  for (std::size_t b = 0; b < nb; ++b)
    for (int t = 0; t < 2; ++t) {
      hit_sum[b][t].assign(n, 0.0);
      width_sum[b][t].assign(n, 0.0);
      vhit[b][t].assign(n, 0.0);
      vwidth[b][t].assign(n, 0.0);
    }

  for (const RepRecord& rec : records) {
    if (rec.skipped) {
      ++s.reps_skipped;
      continue;
    }
    ++s.reps_valid;
    if (!rec.budgets.empty())
      ++s.cell_histogram[rec.budgets.front().cell];
    for (std::size_t b = 0; b < nb && b < rec.budgets.size(); ++b) {
      const BudgetOutcome& o = rec.budgets[b];
      for (std::size_t j = 0; j < n; ++j) {
        if (!o.z_hit.empty()) {
          hit_sum[b][0][j] += o.z_hit[j];
          width_sum[b][0][j] += o.z_width[j];
        }
        if (!o.x_hit.empty()) {
          hit_sum[b][1][j] += o.x_hit[j];
          width_sum[b][1][j] += o.x_width[j];
        }
        if (!o.vz_hit.empty()) {
          vhit[b][0][j] += o.vz_hit[j];
          vwidth[b][0][j] += o.vz_width[j];
          vhit[b][1][j] += o.vx_hit[j];
          vwidth[b][1][j] += o.vx_width[j];
        }
      }
    }
  }

  const double denom = s.reps_valid ? static_cast<double>(s.reps_valid) : 1.0;
  for (std::size_t b = 0; b < nb; ++b) {
    for (int t = 0; t < 2; ++t) {
      TargetSummary& ts = s.per_budget[b][t];
      ts.coverage.resize(n);
      ts.mean_width.resize(n);
      ts.baseline_coverage.resize(n);
      ts.baseline_mean_width.resize(n);
      for (std::size_t j = 0; j < n; ++j) {
        ts.coverage[j] = hit_sum[b][t][j] / denom;
        ts.mean_width[j] = width_sum[b][t][j] / denom;
        ts.baseline_coverage[j] = vhit[b][t][j] / denom;
        ts.baseline_mean_width[j] = vwidth[b][t][j] / denom;
      }
      const auto& active = t == 0 ? s.active_z : s.active_x;
      Vector act;
      for (std::size_t j : active) act.push_back(ts.coverage[j]);
      ts.active = five_number(std::move(act));
      ts.inactive_min = 1.0;
      std::vector<bool> is_active(n, false);
      for (std::size_t j : active) is_active[j] = true;
      for (std::size_t j = 0; j < n; ++j)
        if (!is_active[j])
          ts.inactive_min = std::min(ts.inactive_min, ts.coverage[j]);
    }
  }
  return s;
}

namespace {

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

void emit_csv(const CoverageSummary& s, std::ostream& out) {
  out << "# svici coverage csv v1\n";
  out << "alpha1,alpha2,target,coordinate,coverage,mean_width,"
         "baseline_coverage,baseline_mean_width\n";
  for (std::size_t b = 0; b < s.budgets.size(); ++b) {
    for (int t = 0; t < 2; ++t) {
      const TargetSummary& ts = s.per_budget[b][t];
      for (std::size_t j = 0; j < ts.coverage.size(); ++j) {
        out << fmt(s.budgets[b].alpha1, "%.6g") << ','
            << fmt(s.budgets[b].alpha2, "%.6g") << ','
            << (t == 0 ? "z0" : "x0") << ',' << j + 1 << ','
            << fmt(ts.coverage[j]) << ',' << fmt(ts.mean_width[j], "%.9g")
            << ',' << fmt(ts.baseline_coverage[j]) << ','
            << fmt(ts.baseline_mean_width[j], "%.9g") << '\n';
      }
    }
  }
}

void emit_table(const CoverageSummary& s, std::ostream& out) {
  out << "replications: " << s.reps_total << " (valid " << s.reps_valid
      << ", skipped " << s.reps_skipped << ")\n";
  out << "selected cells (first budget):\n";
  for (const auto& [cell, count] : s.cell_histogram)
    out << "  " << cell << "  x" << count << '\n';
  for (std::size_t b = 0; b < s.budgets.size(); ++b) {
    out << "\nbudget (alpha1, alpha2) = (" << fmt(s.budgets[b].alpha1, "%g")
        << ", " << fmt(s.budgets[b].alpha2, "%g") << ")\n";
    for (int t = 0; t < 2; ++t) {
      const TargetSummary& ts = s.per_budget[b][t];
      const auto& active = t == 0 ? s.active_z : s.active_x;
      out << "  coverage of " << (t == 0 ? "z0" : "x0") << " over "
          << active.size() << " active coordinates (% of valid reps):\n";
      out << "    MIN    " << fmt(100 * ts.active.min, "%.1f") << " %\n";
      out << "    Q1     " << fmt(100 * ts.active.q1, "%.1f") << " %\n";
      out << "    MEDIAN " << fmt(100 * ts.active.median, "%.1f") << " %\n";
      out << "    Q3     " << fmt(100 * ts.active.q3, "%.1f") << " %\n";
      out << "    MAX    " << fmt(100 * ts.active.max, "%.1f") << " %\n";
      out << "    inactive minimum " << fmt(100 * ts.inactive_min, "%.1f")
          << " %\n";
    }
  }
}

void emit_raw(const ExperimentConfig& cfg,
              const std::vector<RepRecord>& records, std::ostream& out) {
  out << "# svici raw records csv v1\n";
  out << "rep,alpha1,alpha2,cell,skipped,z_hits,x_hits\n";
  for (const RepRecord& rec : records) {
    if (rec.skipped) {
      out << rec.rep << ",,,," << 1 << ",,\n";
      continue;
    }
    for (std::size_t b = 0; b < rec.budgets.size(); ++b) {
      const BudgetOutcome& o = rec.budgets[b];
      out << rec.rep << ',' << fmt(cfg.budgets[b].alpha1, "%.6g") << ','
          << fmt(cfg.budgets[b].alpha2, "%.6g") << ',' << o.cell << ",0,";
      for (auto h : o.z_hit) out << (h ? '1' : '0');
      out << ',';
      for (auto h : o.x_hit) out << (h ? '1' : '0');
      out << '\n';
    }
  }
}

std::vector<std::string> emit(const ExperimentConfig& cfg,
                              const CoverageSummary& summary,
                              const std::vector<RepRecord>& records) {
  namespace fs = std::filesystem;
  fs::path dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::vector<std::string> written;
  auto write = [&](const std::string& name, auto&& fn) {
    fs::path p = dir / name;
    std::ofstream out(p);
    if (!out) throw Error("cannot write " + p.string());
    fn(out);
    written.push_back(p.string());
  };
  if (cfg.format == "table")
    write("coverage.txt", [&](std::ostream& o) { emit_table(summary, o); });
  else
    write("coverage.csv", [&](std::ostream& o) { emit_csv(summary, o); });
  if (cfg.raw_records)
    write("raw.csv", [&](std::ostream& o) { emit_raw(cfg, records, o); });
  return written;
}

}  // namespace svici::bench
