#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gainlab/analysis/checks.hpp"
#include "gainlab/analysis/stats.hpp"
#include "gainlab/harness/runner.hpp"

namespace {

using namespace gainlab;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

LogFormat parse_format(const std::string& s) {
  if (s == "csv") return LogFormat::Csv;
  if (s == "jsonl") return LogFormat::Jsonl;
  throw ConfigError("--format: must be 'csv' or 'jsonl'");
}

int cmd_run(const std::string& config_path, std::int64_t seed_override,
            const std::string& out_override, const std::string& format_name) {
  ExperimentConfig cfg = load_experiment(config_path);
  if (!out_override.empty()) cfg.out_dir = out_override;
  const LogFormat format = parse_format(format_name);
  const std::uint64_t seed = seed_override >= 0
                                 ? static_cast<std::uint64_t>(seed_override)
                                 : cfg.seeds.front();
  const TrialSummary sum = run_trial_to_disk(cfg, seed, format);

  nlohmann::json out;
  out["label"] = sum.label;
  out["seed"] = sum.seed;
  out["config_hash"] = sum.config_hash;
  out["episodes"] = sum.episodes;
  out["steps"] = sum.steps;
  out["failed_episodes"] = sum.failed_episodes;
  out["falls"] = sum.falls;
  out["final_primary"] = sum.final_primary;
  out["violation_steps"] = sum.violation_steps;
  out["max_deviation"] = sum.max_deviation;
  out["log"] = sum.log_path;
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int cmd_compare(const std::string& config_path, const std::string& out_override,
                int jobs, const std::string& format_name) {
  CompareConfig cc = load_compare(config_path);
  if (!out_override.empty()) cc.base.out_dir = out_override;
  const ComparisonReport rep =
      run_compare(cc, jobs, parse_format(format_name));
  write_comparison(rep, cc.base.out_dir);
  std::cout << comparison_to_json(rep).dump(2) << "\n";
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_override,
              int jobs, const std::string& format_name) {
  SweepConfig sc = load_sweep(config_path);
  if (!out_override.empty())
    sc.base_doc["out_dir"] = out_override;
  const SweepTable table = run_sweep(sc, jobs, parse_format(format_name));
  const std::string csv = sweep_to_csv(table);
  const std::string out_dir =
      sc.base_doc.value("out_dir", std::string("out"));
  fs::create_directories(out_dir);
  std::ofstream out(fs::path(out_dir) / "sweep.csv");
  out << csv;
  std::cout << csv;
  return kExitOk;
}

int cmd_surface(int resolution, const std::string& out_path,
                std::vector<double> tau) {
  if (tau.empty()) tau = {1.0, 1.0};
  if (tau.size() != 2) throw ConfigError("--tau: expected two thresholds");
  ConstraintSpec spec;
  spec.tau = tau;
  spec.delta = {0.0, 0.0};
  spec.names = {"c1", "c2"};
  const std::string csv = surface_to_csv(surface_grid(resolution, spec));
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) throw ConfigError("cannot open output file: " + out_path);
    out << csv;
  } else {
    std::cout << csv;
  }
  return kExitOk;
}

int cmd_analyze(const std::string& config_path,
                const std::vector<std::string>& log_paths) {
  const ExperimentConfig cfg = load_experiment(config_path);
  const ConstraintSpec spec = cfg.constraint_spec();
  nlohmann::json out;
  out["reward_identity_max_dev"] =
      check_reward_identity({0.0, 1.0}, {0.0, 0.99}, 100);

  auto write_trajectory = [](const std::string& log_path,
                             const InequalityReport& rep) {
    const std::string path = log_path + ".r0r1.csv";
    std::ofstream tr(path);
    tr << "episode,primary_window_mean,penalty_window_mean\n";
    for (const auto& row : rep.trajectory)
      tr << static_cast<long>(row[0]) << "," << format_double(row[1]) << ","
         << format_double(row[2]) << "\n";
    return path;
  };

  out["logs"] = nlohmann::json::array();
  for (const std::string& path : log_paths) {
    const TrialLog log = load_trial_log(path);
    nlohmann::json jl;
    jl["path"] = path;
    jl["rows"] = log.rows.size();
    jl["seed"] = log.header.seed;

    // per-constraint tail behaviour
    jl["violation"] = nlohmann::json::array();
    for (std::size_t i = 0; i < spec.arity(); ++i) {
      std::vector<double> samples;
      samples.reserve(log.rows.size());
      long k = 0;
      for (const TrialRow& r : log.rows) {
        samples.push_back(r.penalties[i]);
        if (r.penalties[i] > spec.tau[i]) ++k;
      }
      nlohmann::json jv;
      jv["name"] = log.header.penalty_names[i];
      jv["empirical"] = log.rows.empty()
                            ? 0.0
                            : static_cast<double>(k) /
                                  static_cast<double>(log.rows.size());
      jv["kde_tail"] =
          samples.size() >= 2 ? kde_tail_probability(samples, spec.tau[i]) : 0.0;
      jv["p999"] = samples.empty() ? 0.0 : percentile(samples, 99.9);
      jl["violation"].push_back(std::move(jv));
    }

    const int window = cfg.learner.episodes_per_window;
    try {
      // epsilon: 5% of the observed window-mean reward range
      InequalityReport probe = check_learning_inequality(log, 0.0, window);
      double lo = HUGE_VAL, hi = -HUGE_VAL;
      for (const auto& row : probe.trajectory) {
        lo = std::min(lo, row[1]);
        hi = std::max(hi, row[1]);
      }
      const double eps = 0.05 * (hi - lo);
      const InequalityReport rep = check_learning_inequality(log, eps, window);
      jl["learning_inequality"] = {{"epsilon", eps},
                                   {"checkpoints", rep.checkpoints},
                                   {"violation_fraction",
                                    rep.violation_fraction}};
      jl["trajectory_table"] = write_trajectory(path, rep);
    } catch (const std::invalid_argument& e) {
      jl["learning_inequality"] = {{"error", e.what()}};
    }

    const LyapunovReport ly =
        check_lyapunov_boundary(log, spec, cfg.estimator, window);
    jl["lyapunov"] = {{"events", ly.events},
                      {"sufficient", ly.sufficient},
                      {"mean_change", ly.mean_change},
                      {"upper_bound_95", ly.upper_bound_95}};
    out["logs"].push_back(std::move(jl));
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

int cmd_validate(const std::string& config_path) {
  // accepts a single-experiment, compare, or sweep document
  std::ifstream in(config_path);
  if (!in) throw ConfigError("cannot open config file: " + config_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  if (j.contains("axes"))
    (void)sweep_from_json(j);
  else if (j.contains("adapters"))
    (void)compare_from_json(j);
  else
    (void)experiment_from_json(j);
  std::cout << "{\"valid\": true}\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"constrained-RL reward-weighting laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_path, format_name = "csv";
  std::int64_t seed = -1;
  int jobs = 1, resolution = 101;
  std::vector<double> tau;
  std::vector<std::string> log_paths;

  CLI::App* run = app.add_subcommand("run", "run a single trial");
  run->add_option("--config", config_path, "experiment config")->required();
  run->add_option("--seed", seed, "seed override");
  run->add_option("--out", out_path, "output directory override");
  run->add_option("--format", format_name, "log format: csv or jsonl");

  CLI::App* compare =
      app.add_subcommand("compare", "run several adapters on one environment");
  compare->add_option("--config", config_path, "compare config")->required();
  compare->add_option("--out", out_path, "output directory override");
  compare->add_option("--jobs", jobs, "max concurrent trials");
  compare->add_option("--format", format_name, "log format: csv or jsonl");

  CLI::App* sweep = app.add_subcommand("sweep", "grid search over config axes");
  sweep->add_option("--config", config_path, "sweep config")->required();
  sweep->add_option("--out", out_path, "output directory override");
  sweep->add_option("--jobs", jobs, "max concurrent trials");
  sweep->add_option("--format", format_name, "log format: csv or jsonl");

  CLI::App* surface =
      app.add_subcommand("surface", "adaptation-surface grid as CSV");
  surface->add_option("--resolution", resolution, "grid resolution");
  surface->add_option("--out", out_path, "output file (default stdout)");
  surface->add_option("--tau", tau, "two constraint thresholds");

  CLI::App* analyze =
      app.add_subcommand("analyze", "post-hoc checks on existing logs");
  analyze->add_option("--config", config_path, "experiment config")->required();
  analyze->add_option("logs", log_paths, "trial log files");

  CLI::App* validate = app.add_subcommand("validate", "check a config file");
  validate->add_option("--config", config_path, "config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help();
    return kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, seed, out_path, format_name);
    if (compare->parsed())
      return cmd_compare(config_path, out_path, jobs, format_name);
    if (sweep->parsed())
      return cmd_sweep(config_path, out_path, jobs, format_name);
    if (surface->parsed()) return cmd_surface(resolution, out_path, tau);
    if (analyze->parsed()) return cmd_analyze(config_path, log_paths);
    if (validate->parsed()) return cmd_validate(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
