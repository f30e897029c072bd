#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "svici/inference.hpp"
#include "svici/svi.hpp"
#include "svici/textio.hpp"

namespace svici::bench {

struct AlphaBudget {
  double alpha1 = 0.025;
  double alpha2 = 0.025;
};

struct ExperimentConfig {
  std::string problem = "lcp-example2";
  std::size_t n = 10;
  std::size_t n_samples = 500;
  std::size_t reps = 200;
  std::vector<AlphaBudget> budgets;  // defaults to (0.025,0.025),(0.01,0.04)
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::string format = "csv";  // csv | table
  bool baseline = false;       // also compute the v/nu comparison intervals
  bool raw_records = false;
  bool full_scale = false;
  std::size_t threads = 0;  // 0 = hardware concurrency
  std::optional<CustomProblemDef> custom;

  static ExperimentConfig from_file(const std::string& path);
  static ExperimentConfig from_keyfile(const KeyFile& kf);
  /// Applies the paper-scale dimensions when full_scale is set.
  void apply_full_scale();
};

std::unique_ptr<SviProblem> make_problem(const ExperimentConfig& cfg);

/// Outcome of one replication under one alpha budget.
struct BudgetOutcome {
  std::string cell;
  std::vector<std::uint8_t> z_hit, x_hit;
  Vector z_width, x_width;
  // Baseline comparison intervals (half-widths v and their clamp nu).
  std::vector<std::uint8_t> vz_hit, vx_hit;
  Vector vz_width, vx_width;
};

struct RepRecord {
  std::size_t rep = 0;
  bool skipped = false;
  std::string skip_reason;
  std::vector<BudgetOutcome> budgets;
};

RepRecord run_replication(const SviProblem& problem,
                          const ExperimentConfig& cfg, std::size_t rep);

/// Runs all replications on a worker pool; the result is ordered by
/// replication index and independent of the worker count.
std::vector<RepRecord> run_all(const SviProblem& problem,
                               const ExperimentConfig& cfg);

struct FiveNumber {
  double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

FiveNumber five_number(Vector values);  // linear-interpolation quantiles

struct TargetSummary {
  Vector coverage;    // per coordinate
  Vector mean_width;  // per coordinate
  FiveNumber active;  // over the active coordinate set
  double inactive_min = 1.0;
  Vector baseline_coverage, baseline_mean_width;
};

struct CoverageSummary {
  std::size_t reps_total = 0, reps_valid = 0, reps_skipped = 0;
  std::vector<std::size_t> active_z, active_x;
  std::map<std::string, std::size_t> cell_histogram;  // first budget's cells
  std::vector<AlphaBudget> budgets;
  std::vector<std::array<TargetSummary, 2>> per_budget;  // [z, x]
};

CoverageSummary aggregate(const SviProblem& problem,
                          const ExperimentConfig& cfg,
                          const std::vector<RepRecord>& records);

void emit_csv(const CoverageSummary& s, std::ostream& out);
void emit_table(const CoverageSummary& s, std::ostream& out);
void emit_raw(const ExperimentConfig& cfg, const std::vector<RepRecord>& records,
              std::ostream& out);

/// Writes coverage.<csv|txt> (and raw.csv when requested) under cfg.out_dir;
/// returns the paths written.
std::vector<std::string> emit(const ExperimentConfig& cfg,
                              const CoverageSummary& summary,
                              const std::vector<RepRecord>& records);

}  // namespace svici::bench
