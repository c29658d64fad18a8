#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gainlab/analysis/trial_log.hpp"
#include "gainlab/harness/config.hpp"

namespace gainlab {

struct TrialSummary {
  std::string label;
  std::uint64_t seed = 0;
  std::string config_hash;
  int episodes = 0;
  long steps = 0;
  int failed_episodes = 0;
  long falls = 0;
  double final_primary = 0.0;             // mean over the final window
  std::vector<long> violation_steps;      // per constraint, strict > tau
  std::vector<double> max_deviation;      // per constraint
  std::string log_path;
};

struct TrialResult {
  TrialLog log;
  TrialSummary summary;
  std::string error;  // non-empty when the trial aborted (divergence)

  bool ok() const { return error.empty(); }
};

// Deterministic single trial: a pure function of (config, seed). On
// divergence the partial log up to the failing episode is returned.
TrialResult run_trial(const ExperimentConfig& cfg, std::uint64_t seed);

// Runs the trial and writes the log plus a manifest row under
// cfg.out_dir. Returns the summary.
TrialSummary run_trial_to_disk(const ExperimentConfig& cfg, std::uint64_t seed,
                               LogFormat format);

struct AdapterReport {
  std::string label;
  int seeds = 0;
  int trials_failed = 0;  // aborted trials (recorded, others unaffected)
  double final_primary_mean = 0.0;
  double final_primary_std = 0.0;
  long falls = 0;
  long total_steps = 0;
  std::vector<long> violation_steps;
  std::vector<double> violation_empirical;  // per constraint
  std::vector<double> violation_kde;        // per constraint
  std::vector<double> p999_deviation;       // per constraint
  std::vector<double> final_primary_per_seed;
};

struct PairwiseReport {
  std::string a;
  std::string b;
  double t_test_p = 1.0;
  bool low_power = false;  // fewer than two seeds per side
  std::vector<double> two_proportion_p;  // per constraint
};

struct ComparisonReport {
  std::string env;
  std::vector<AdapterReport> adapters;
  std::vector<PairwiseReport> pairwise;
};

ComparisonReport run_compare(const CompareConfig& cc, int jobs,
                             LogFormat format);
nlohmann::json comparison_to_json(const ComparisonReport& rep);
void write_comparison(const ComparisonReport& rep, const std::string& out_dir);

struct SweepCell {
  std::vector<nlohmann::json> values;  // one per axis
  int repetitions = 0;
  double final_primary_mean = 0.0;
  double final_primary_max = 0.0;
  std::vector<double> violation_fraction;  // per constraint, pooled steps
  std::vector<double> p999_deviation;      // per constraint, pooled
  long falls = 0;
  bool failed = false;  // any fall or aborted trial in the cell
};

struct SweepTable {
  std::vector<std::string> axis_paths;
  std::vector<SweepCell> cells;
};

SweepTable run_sweep(const SweepConfig& sc, int jobs, LogFormat format);
std::string sweep_to_csv(const SweepTable& table);

}  // namespace gainlab
