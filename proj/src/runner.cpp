#include "gainlab/harness/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include "gainlab/analysis/stats.hpp"

namespace gainlab {

namespace {

namespace fs = std::filesystem;

// bounded deterministic worker pool: task i writes results[i]
void run_pool(int jobs, int n_tasks, const std::function<void(int)>& task) {
  jobs = std::max(1, jobs);
  if (jobs == 1) {
    for (int i = 0; i < n_tasks; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> workers;
  const int n_workers = std::min(jobs, n_tasks);
  workers.reserve(static_cast<std::size_t>(n_workers));
  for (int w = 0; w < n_workers; ++w) {
    workers.emplace_back([&]() {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= n_tasks) return;
        task(i);
      }
    });
  }
  for (auto& t : workers) t.join();
}

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double m = 0.0;
  for (double x : xs) m += x;
  return m / static_cast<double>(xs.size());
}

double std_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

std::string log_filename(const std::string& label, std::uint64_t seed,
                         LogFormat format) {
  return "trial_" + label + "_s" + std::to_string(seed) +
         (format == LogFormat::Csv ? ".csv" : ".jsonl");
}

}  // namespace

TrialResult run_trial(const ExperimentConfig& cfg, std::uint64_t seed) {
  const std::unique_ptr<Env> env = cfg.make_env();
  const std::unique_ptr<Policy> pol = cfg.make_policy();
  const ConstraintSpec spec = cfg.constraint_spec();
  GainAdapter adapter(cfg.adapter.to_state(spec.arity()), spec);
  TrajectoryBuffer buffer(cfg.learner.episodes_per_window);

  PolicyState policy;
  policy.theta = cfg.theta_init;
  policy.sigma_theta.assign(policy.theta.size(), cfg.learner.sigma_init);
  policy.theta_explored = policy.theta;

  TrialResult out;
  out.log.header.config_hash = config_hash(cfg);
  out.log.header.seed = seed;
  out.log.header.state_names = env->state_names();
  out.log.header.penalty_names = env->constraint_names();

  TrialSummary& sum = out.summary;
  sum.label = cfg.adapter.label;
  sum.seed = seed;
  sum.config_hash = out.log.header.config_hash;
  sum.violation_steps.assign(spec.arity(), 0);
  sum.max_deviation.assign(spec.arity(), 0.0);

  const double fall_angle =
      cfg.env_kind == EnvKind::CartTilt ? cfg.cart.fall_angle : HUGE_VAL;

  for (int e = 0; e < cfg.episodes; ++e) {
    EpisodeOutcome ep;
    try {
      ep = run_episode(*env, *pol, policy, adapter, buffer, cfg.learner,
                       cfg.estimator, seed, e);
    } catch (const std::runtime_error& err) {
      out.error = err.what();  // learner abort; keep the partial log
    }
    if (ep.failed) ++sum.failed_episodes;
    bool fell = false;
    for (TrialRow& row : ep.rows) {
      for (std::size_t i = 0; i < spec.arity(); ++i) {
        const double p = row.penalties[i];
        if (p > spec.tau[i]) ++sum.violation_steps[i];
        sum.max_deviation[i] = std::max(sum.max_deviation[i], p);
        if (p >= fall_angle) fell = true;
      }
      out.log.rows.push_back(std::move(row));
    }
    if (fell) ++sum.falls;
    if (!out.error.empty()) break;
  }
  sum.episodes = cfg.episodes;
  sum.steps = static_cast<long>(out.log.rows.size());

  // final-window mean primary reward
  if (!out.log.rows.empty()) {
    const int last_episode = out.log.rows.back().episode;
    const int first = last_episode - cfg.learner.episodes_per_window + 1;
    double acc = 0.0;
    long n = 0;
    for (const TrialRow& r : out.log.rows) {
      if (r.episode >= first) {
        acc += r.primary;
        ++n;
      }
    }
    sum.final_primary = n > 0 ? acc / static_cast<double>(n) : 0.0;
  }
  return out;
}

TrialSummary run_trial_to_disk(const ExperimentConfig& cfg, std::uint64_t seed,
                               LogFormat format) {
  fs::create_directories(cfg.out_dir);
  TrialResult res = run_trial(cfg, seed);
  const std::string file = log_filename(cfg.adapter.label, seed, format);
  const std::string path = (fs::path(cfg.out_dir) / file).string();
  write_trial_log(res.log, path, format);
  res.summary.log_path = path;

  // one summary row per trial
  const fs::path manifest = fs::path(cfg.out_dir) / "manifest.csv";
  static std::mutex manifest_mutex;
  {
    std::lock_guard<std::mutex> lock(manifest_mutex);
    const bool fresh = !fs::exists(manifest);
    std::ofstream mf(manifest, std::ios::app);
    if (fresh)
      mf << "label,seed,config_hash,episodes,steps,failed_episodes,falls,"
            "final_primary,violation_steps,max_deviation,status,file\n";
    mf << res.summary.label << "," << res.summary.seed << ","
       << res.summary.config_hash << "," << res.summary.episodes << ","
       << res.summary.steps << "," << res.summary.failed_episodes << ","
       << res.summary.falls << "," << format_double(res.summary.final_primary)
       << ",";
    for (std::size_t i = 0; i < res.summary.violation_steps.size(); ++i)
      mf << (i ? ";" : "") << res.summary.violation_steps[i];
    mf << ",";
    for (std::size_t i = 0; i < res.summary.max_deviation.size(); ++i)
      mf << (i ? ";" : "") << format_double(res.summary.max_deviation[i]);
    mf << "," << (res.ok() ? "ok" : "error") << "," << file << "\n";
  }
  if (!res.ok()) throw std::runtime_error(res.error);
  return res.summary;
}

namespace {

struct TrialExtract {
  TrialSummary summary;
  std::vector<std::vector<double>> penalty_samples;  // per constraint
  bool aborted = false;
  std::string error;
};

TrialExtract extract_trial(const ExperimentConfig& cfg, std::uint64_t seed,
                           LogFormat format) {
  TrialExtract ex;
  try {
    TrialResult res = run_trial(cfg, seed);
    if (!res.ok()) {
      ex.aborted = true;
      ex.error = res.error;
    } else {
      ex.summary = res.summary;
      const std::size_t arity = res.summary.violation_steps.size();
      ex.penalty_samples.resize(arity);
      for (const TrialRow& r : res.log.rows)
        for (std::size_t i = 0; i < arity; ++i)
          ex.penalty_samples[i].push_back(r.penalties[i]);
    }
    fs::create_directories(cfg.out_dir);
    const std::string path =
        (fs::path(cfg.out_dir) / log_filename(cfg.adapter.label, seed, format))
            .string();
    write_trial_log(res.log, path, format);
    ex.summary.log_path = path;
  } catch (const std::exception& e) {
    // one broken trial must not take its siblings down
    ex.aborted = true;
    if (ex.error.empty()) ex.error = e.what();
  }
  ex.summary.label = cfg.adapter.label;
  ex.summary.seed = seed;
  return ex;
}

}  // namespace

ComparisonReport run_compare(const CompareConfig& cc, int jobs,
                             LogFormat format) {
  const std::size_t n_adapters = cc.entries.size();
  const std::size_t n_seeds = cc.base.seeds.size();
  const int n_tasks = static_cast<int>(n_adapters * n_seeds);

  std::vector<ExperimentConfig> cfgs = cc.entries;
  for (ExperimentConfig& cfg : cfgs) {
    cfg.out_dir = cc.base.out_dir;
    cfg.validate();
  }

  std::vector<TrialExtract> extracts(static_cast<std::size_t>(n_tasks));
  run_pool(jobs, n_tasks, [&](int i) {
    const std::size_t a = static_cast<std::size_t>(i) / n_seeds;
    const std::size_t s = static_cast<std::size_t>(i) % n_seeds;
    extracts[static_cast<std::size_t>(i)] =
        extract_trial(cfgs[a], cc.base.seeds[s], format);
  });

  ComparisonReport rep;
  rep.env = cc.base.env_kind == EnvKind::Landscape ? "landscape" : "cart_tilt";
  const ConstraintSpec spec = cc.base.constraint_spec();
  const std::size_t arity = spec.arity();

  for (std::size_t a = 0; a < n_adapters; ++a) {
    AdapterReport ar;
    ar.label = cc.adapters[a].label;
    ar.violation_steps.assign(arity, 0);
    ar.violation_empirical.assign(arity, 0.0);
    ar.violation_kde.assign(arity, 0.0);
    ar.p999_deviation.assign(arity, 0.0);
    std::vector<std::vector<double>> pooled(arity);
    for (std::size_t s = 0; s < n_seeds; ++s) {
      const TrialExtract& ex = extracts[a * n_seeds + s];
      if (ex.aborted) {
        ++ar.trials_failed;
        continue;
      }
      ++ar.seeds;
      ar.final_primary_per_seed.push_back(ex.summary.final_primary);
      ar.falls += ex.summary.falls;
      ar.total_steps += ex.summary.steps;
      for (std::size_t i = 0; i < arity; ++i) {
        ar.violation_steps[i] += ex.summary.violation_steps[i];
        pooled[i].insert(pooled[i].end(), ex.penalty_samples[i].begin(),
                         ex.penalty_samples[i].end());
      }
    }
    ar.final_primary_mean = mean_of(ar.final_primary_per_seed);
    ar.final_primary_std = std_of(ar.final_primary_per_seed);
    for (std::size_t i = 0; i < arity; ++i) {
      if (ar.total_steps > 0)
        ar.violation_empirical[i] = static_cast<double>(ar.violation_steps[i]) /
                                    static_cast<double>(ar.total_steps);
      if (!pooled[i].empty()) {
        ar.violation_kde[i] = kde_tail_probability(pooled[i], spec.tau[i]);
        ar.p999_deviation[i] = percentile(pooled[i], 99.9);
      }
    }
    rep.adapters.push_back(std::move(ar));
  }

  for (std::size_t a = 0; a < n_adapters; ++a) {
    for (std::size_t b = a + 1; b < n_adapters; ++b) {
      PairwiseReport pr;
      pr.a = rep.adapters[a].label;
      pr.b = rep.adapters[b].label;
      const auto& fa = rep.adapters[a].final_primary_per_seed;
      const auto& fb = rep.adapters[b].final_primary_per_seed;
      pr.low_power = fa.size() < 2 || fb.size() < 2;
      if (!pr.low_power) pr.t_test_p = welch_t_test(fa, fb);
      for (std::size_t i = 0; i < arity; ++i) {
        const long na = rep.adapters[a].total_steps;
        const long nb = rep.adapters[b].total_steps;
        if (na > 0 && nb > 0)
          pr.two_proportion_p.push_back(
              two_proportion_test(rep.adapters[a].violation_steps[i], na,
                                  rep.adapters[b].violation_steps[i], nb));
        else
          pr.two_proportion_p.push_back(1.0);
      }
      rep.pairwise.push_back(std::move(pr));
    }
  }
  return rep;
}

nlohmann::json comparison_to_json(const ComparisonReport& rep) {
  nlohmann::json j;
  j["env"] = rep.env;
  j["adapters"] = nlohmann::json::array();
  for (const AdapterReport& a : rep.adapters) {
    nlohmann::json ja;
    ja["label"] = a.label;
    ja["seeds"] = a.seeds;
    ja["trials_failed"] = a.trials_failed;
    ja["final_primary_mean"] = a.final_primary_mean;
    ja["final_primary_std"] = a.final_primary_std;
    ja["falls"] = a.falls;
    ja["total_steps"] = a.total_steps;
    ja["violation_steps"] = a.violation_steps;
    ja["violation_empirical"] = a.violation_empirical;
    ja["violation_kde"] = a.violation_kde;
    ja["p999_deviation"] = a.p999_deviation;
    ja["final_primary_per_seed"] = a.final_primary_per_seed;
    j["adapters"].push_back(std::move(ja));
  }
  j["pairwise"] = nlohmann::json::array();
  for (const PairwiseReport& p : rep.pairwise) {
    nlohmann::json jp;
    jp["a"] = p.a;
    jp["b"] = p.b;
    jp["t_test_p"] = p.t_test_p;
    jp["low_power"] = p.low_power;
    jp["two_proportion_p"] = p.two_proportion_p;
    j["pairwise"].push_back(std::move(jp));
  }
  return j;
}

void write_comparison(const ComparisonReport& rep, const std::string& out_dir) {
  fs::create_directories(out_dir);
  {
    std::ofstream out(fs::path(out_dir) / "report.json");
    out << comparison_to_json(rep).dump(2) << "\n";
  }
  {
    std::ofstream out(fs::path(out_dir) / "report_adapters.csv");
    out << "label,seeds,trials_failed,final_primary_mean,final_primary_std,"
           "falls,total_steps,violation_empirical,violation_kde,p999\n";
    for (const AdapterReport& a : rep.adapters) {
      out << a.label << "," << a.seeds << "," << a.trials_failed << ","
          << format_double(a.final_primary_mean) << ","
          << format_double(a.final_primary_std) << "," << a.falls << ","
          << a.total_steps << ",";
      for (std::size_t i = 0; i < a.violation_empirical.size(); ++i)
        out << (i ? ";" : "") << format_double(a.violation_empirical[i]);
      out << ",";
      for (std::size_t i = 0; i < a.violation_kde.size(); ++i)
        out << (i ? ";" : "") << format_double(a.violation_kde[i]);
      out << ",";
      for (std::size_t i = 0; i < a.p999_deviation.size(); ++i)
        out << (i ? ";" : "") << format_double(a.p999_deviation[i]);
      out << "\n";
    }
  }
  {
    std::ofstream out(fs::path(out_dir) / "report_pairwise.csv");
    out << "a,b,t_test_p,low_power,two_proportion_p\n";
    for (const PairwiseReport& p : rep.pairwise) {
      out << p.a << "," << p.b << "," << format_double(p.t_test_p) << ","
          << (p.low_power ? 1 : 0) << ",";
      for (std::size_t i = 0; i < p.two_proportion_p.size(); ++i)
        out << (i ? ";" : "") << format_double(p.two_proportion_p[i]);
      out << "\n";
    }
  }
}

SweepTable run_sweep(const SweepConfig& sc, int jobs, LogFormat format) {
  const int n_cells = sc.cell_count();
  const int reps = sc.repetitions;
  const int n_tasks = n_cells * reps;

  // enumerate cells in row-major axis order
  std::vector<std::vector<std::size_t>> cell_idx;
  {
    std::vector<std::size_t> idx(sc.axes.size(), 0);
    for (int c = 0; c < n_cells; ++c) {
      cell_idx.push_back(idx);
      for (std::size_t a = sc.axes.size(); a-- > 0;) {
        if (++idx[a] < sc.axes[a].values.size()) break;
        idx[a] = 0;
      }
    }
  }

  std::vector<ExperimentConfig> cell_cfgs;
  cell_cfgs.reserve(static_cast<std::size_t>(n_cells));
  for (int c = 0; c < n_cells; ++c) {
    ExperimentConfig cfg = sc.cell(cell_idx[static_cast<std::size_t>(c)]);
    cfg.adapter.label += "_cell" + std::to_string(c);
    cell_cfgs.push_back(std::move(cfg));
  }

  std::vector<TrialExtract> extracts(static_cast<std::size_t>(n_tasks));
  run_pool(jobs, n_tasks, [&](int i) {
    const int c = i / reps;
    const int r = i % reps;
    extracts[static_cast<std::size_t>(i)] = extract_trial(
        cell_cfgs[static_cast<std::size_t>(c)],
        static_cast<std::uint64_t>(r + 1), format);
  });

  SweepTable table;
  for (const SweepAxis& a : sc.axes) table.axis_paths.push_back(a.path);
  const std::size_t arity = cell_cfgs.empty()
                                ? 0
                                : cell_cfgs[0].constraint_spec().arity();
  for (int c = 0; c < n_cells; ++c) {
    SweepCell cell;
    for (std::size_t a = 0; a < sc.axes.size(); ++a)
      cell.values.push_back(
          sc.axes[a].values[cell_idx[static_cast<std::size_t>(c)][a]]);
    cell.repetitions = reps;
    cell.violation_fraction.assign(arity, 0.0);
    cell.p999_deviation.assign(arity, 0.0);
    std::vector<double> finals;
    std::vector<std::vector<double>> pooled(arity);
    std::vector<long> violations(arity, 0);
    long steps = 0;
    for (int r = 0; r < reps; ++r) {
      const TrialExtract& ex =
          extracts[static_cast<std::size_t>(c * reps + r)];
      if (ex.aborted) {
        cell.failed = true;
        continue;
      }
      finals.push_back(ex.summary.final_primary);
      cell.falls += ex.summary.falls;
      steps += ex.summary.steps;
      for (std::size_t i = 0; i < arity; ++i) {
        violations[i] += ex.summary.violation_steps[i];
        pooled[i].insert(pooled[i].end(), ex.penalty_samples[i].begin(),
                         ex.penalty_samples[i].end());
      }
    }
    cell.final_primary_mean = mean_of(finals);
    cell.final_primary_max =
        finals.empty() ? 0.0 : *std::max_element(finals.begin(), finals.end());
    for (std::size_t i = 0; i < arity; ++i) {
      if (steps > 0)
        cell.violation_fraction[i] = static_cast<double>(violations[i]) /
                                     static_cast<double>(steps);
      if (!pooled[i].empty()) cell.p999_deviation[i] = percentile(pooled[i], 99.9);
    }
    if (cell.falls > 0) cell.failed = true;
    table.cells.push_back(std::move(cell));
  }
  return table;
}

std::string sweep_to_csv(const SweepTable& table) {
  std::string out;
  for (const std::string& p : table.axis_paths) {
    std::string name = p;
    std::replace(name.begin(), name.end(), '/', '.');
    if (!name.empty() && name[0] == '.') name.erase(0, 1);
    out += name + ",";
  }
  out +=
      "repetitions,final_primary_mean,final_primary_max,violation_fraction,"
      "p999_deviation,falls,failed\n";
  for (const SweepCell& c : table.cells) {
    for (const nlohmann::json& v : c.values) out += v.dump() + ",";
    out += std::to_string(c.repetitions) + "," +
           format_double(c.final_primary_mean) + "," +
           format_double(c.final_primary_max) + ",";
    for (std::size_t i = 0; i < c.violation_fraction.size(); ++i)
      out += (i ? ";" : "") + format_double(c.violation_fraction[i]);
    out += ",";
    for (std::size_t i = 0; i < c.p999_deviation.size(); ++i)
      out += (i ? ";" : "") + format_double(c.p999_deviation[i]);
    out += "," + std::to_string(c.falls) + "," + (c.failed ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace gainlab
