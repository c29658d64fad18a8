#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "gainlab/harness/runner.hpp"

using namespace gainlab;
namespace fs = std::filesystem;

namespace {

nlohmann::json landscape_doc() {
  return nlohmann::json{{"env", {{"kind", "landscape"}}},
                        {"episodes", 40},
                        {"seeds", {1, 2}},
                        {"out_dir", "/tmp/gainlab_test_out"}};
}

nlohmann::json cart_doc() {
  return nlohmann::json{{"env", {{"kind", "cart_tilt"}}},
                        {"episodes", 12},
                        {"seeds", {1}},
                        {"out_dir", "/tmp/gainlab_test_out"}};
}

}  // namespace

TEST_CASE("config: defaults, validation messages, hashing") {
  const ExperimentConfig cfg = experiment_from_json(landscape_doc());
  CHECK(cfg.env_kind == EnvKind::Landscape);
  CHECK(cfg.learner.timesteps_per_episode == 1);
  CHECK(cfg.adapter.kind == AdapterKind::Simplex);
  CHECK(cfg.constraint_spec().tau == std::vector<double>{0.75});
  CHECK(cfg.theta_init == std::vector<double>{0.1, 0.5});

  // invalid threshold names the field
  auto bad = landscape_doc();
  bad["env"]["tau"] = -0.1;
  CHECK_THROWS_WITH_AS(experiment_from_json(bad),
                       "landscape: tau must lie in (0, 1)", ConfigError);

  bad = landscape_doc();
  bad["envv"] = 1;
  CHECK_THROWS_AS(experiment_from_json(bad), ConfigError);

  bad = landscape_doc();
  bad["constraints"] = {{"delta", {0.8}}};
  CHECK_THROWS_AS(experiment_from_json(bad), ConfigError);  // delta >= tau

  bad = landscape_doc();
  bad["adapter"] = {{"kind", "fixed_penalty"}};
  CHECK_THROWS_AS(experiment_from_json(bad), ConfigError);  // no fixed_gains

  bad = landscape_doc();
  bad["seeds"] = nlohmann::json::array();
  CHECK_THROWS_AS(experiment_from_json(bad), ConfigError);

  // hash: stable for equal configs, sensitive to any field
  const ExperimentConfig same = experiment_from_json(landscape_doc());
  CHECK(config_hash(cfg) == config_hash(same));
  auto other_doc = landscape_doc();
  other_doc["episodes"] = 41;
  CHECK(config_hash(cfg) != config_hash(experiment_from_json(other_doc)));
}

TEST_CASE("run_trial: determinism is byte-exact") {
  const ExperimentConfig cfg = experiment_from_json(landscape_doc());
  const TrialResult a = run_trial(cfg, 7);
  const TrialResult b = run_trial(cfg, 7);
  REQUIRE(a.ok());
  CHECK(trial_log_to_csv(a.log) == trial_log_to_csv(b.log));
  CHECK(a.summary.final_primary == b.summary.final_primary);

  const TrialResult c = run_trial(cfg, 8);
  CHECK(trial_log_to_csv(a.log) != trial_log_to_csv(c.log));
}

TEST_CASE("run_trial: zero episodes yields an empty log with a valid header") {
  auto doc = landscape_doc();
  doc["episodes"] = 0;
  const ExperimentConfig cfg = experiment_from_json(doc);
  const TrialResult res = run_trial(cfg, 1);
  CHECK(res.ok());
  CHECK(res.log.rows.empty());
  const std::string csv = trial_log_to_csv(res.log);
  CHECK(csv.find("episode,t,th0,th1,primary,hazard,lambda0,lambda1,delta") !=
        std::string::npos);
}

TEST_CASE("run_trial: csv schema and jsonl writing") {
  const ExperimentConfig cfg = experiment_from_json(cart_doc());
  const TrialResult res = run_trial(cfg, 3);
  REQUIRE(res.ok());
  const std::string csv = trial_log_to_csv(res.log);
  const std::string header = csv.substr(csv.find('\n') + 1);
  CHECK(header.substr(0, header.find('\n')) ==
        "episode,t,x,x_dot,phi,phi_dot,primary,tilt,lambda0,lambda1,delta");

  fs::create_directories("/tmp/gainlab_test_out");
  write_trial_log(res.log, "/tmp/gainlab_test_out/t.jsonl", LogFormat::Jsonl);
  const TrialLog back = load_trial_log("/tmp/gainlab_test_out/t.jsonl");
  CHECK(back.rows.size() == res.log.rows.size());
  CHECK(back.header.seed == 3);
}

TEST_CASE("run_trial: divergence aborts with the partial log kept") {
  auto doc = landscape_doc();
  doc["learner"] = {{"eta_theta", 1e308}};
  const ExperimentConfig cfg = experiment_from_json(doc);
  const TrialResult res = run_trial(cfg, 1);
  CHECK_FALSE(res.ok());
  CHECK(res.error == "non-finite parameter update");
  // the seven warm-up episodes before the first (failing) update were logged
  CHECK(res.log.rows.size() == 7);
}

TEST_CASE("run_compare: aggregation, pairwise tests, self-comparison") {
  fs::remove_all("/tmp/gainlab_test_out");
  nlohmann::json doc;
  doc["base"] = landscape_doc();
  doc["adapters"] = {{{"kind", "simplex"}},
                     {{"kind", "primary_only"}},
                     {{"kind", "primary_only"}, {"label", "primary_again"}}};
  const CompareConfig cc = compare_from_json(doc);
  CHECK(cc.adapters[0].label == "a0_simplex");

  const ComparisonReport rep = run_compare(cc, 2, LogFormat::Csv);
  REQUIRE(rep.adapters.size() == 3);
  REQUIRE(rep.pairwise.size() == 3);
  for (const AdapterReport& a : rep.adapters) {
    CHECK(a.seeds == 2);
    CHECK(a.total_steps == 2 * 40);
    CHECK(a.violation_kde.size() == 1);
  }
  // identical adapters under identical seeds: no detectable difference
  for (const PairwiseReport& p : rep.pairwise) {
    if (p.a == "a1_primary_only" && p.b == "primary_again") {
      CHECK(p.t_test_p == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(p.two_proportion_p[0] == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  write_comparison(rep, cc.base.out_dir);
  CHECK(fs::exists("/tmp/gainlab_test_out/report.json"));
  CHECK(fs::exists("/tmp/gainlab_test_out/report_adapters.csv"));
  CHECK(fs::exists("/tmp/gainlab_test_out/report_pairwise.csv"));
  // per-trial logs and the manifest were written by the workers
  CHECK(fs::exists("/tmp/gainlab_test_out/trial_a0_simplex_s1.csv"));
}

TEST_CASE("run_compare: entries may patch the weighting side") {
  nlohmann::json doc;
  doc["base"] = landscape_doc();
  doc["adapters"] = {
      {{"kind", "simplex"}},
      {{"adapter", {{"kind", "crpo"}, {"label", "crpo_tol"}}},
       {"constraints", {{"delta", {0.075}}}}}};
  const CompareConfig cc = compare_from_json(doc);
  REQUIRE(cc.entries.size() == 2);
  CHECK(cc.entries[0].delta == std::vector<double>{0.0});
  CHECK(cc.entries[1].delta == std::vector<double>{0.075});
  CHECK(cc.entries[1].adapter.label == "crpo_tol");

  // the environment and seeds stay shared
  nlohmann::json bad = doc;
  bad["adapters"][1]["env"] = {{"kind", "landscape"}, {"tau", 0.6}};
  CHECK_THROWS_AS(compare_from_json(bad), ConfigError);
  bad = doc;
  bad["adapters"][1]["seeds"] = {9};
  CHECK_THROWS_AS(compare_from_json(bad), ConfigError);
}

TEST_CASE("run_compare: single seed marks tests low power") {
  nlohmann::json doc;
  doc["base"] = landscape_doc();
  doc["base"]["seeds"] = {5};
  doc["adapters"] = {{{"kind", "simplex"}}, {{"kind", "primary_only"}}};
  const ComparisonReport rep =
      run_compare(compare_from_json(doc), 1, LogFormat::Csv);
  REQUIRE(rep.pairwise.size() == 1);
  CHECK(rep.pairwise[0].low_power);
}

TEST_CASE("run_sweep: degenerate grid matches a direct trial") {
  nlohmann::json doc;
  doc["base"] = landscape_doc();
  doc["axes"] = nlohmann::json::array();
  doc["repetitions"] = 2;
  doc["budget"] = 10;
  const SweepConfig sc = sweep_from_json(doc);
  CHECK(sc.cell_count() == 1);
  const SweepTable table = run_sweep(sc, 1, LogFormat::Csv);
  REQUIRE(table.cells.size() == 1);

  // rep r uses seed r+1
  ExperimentConfig cfg = experiment_from_json(landscape_doc());
  cfg.adapter.label += "_cell0";
  const TrialResult t1 = run_trial(cfg, 1);
  const TrialResult t2 = run_trial(cfg, 2);
  const double expect =
      0.5 * (t1.summary.final_primary + t2.summary.final_primary);
  CHECK(table.cells[0].final_primary_mean ==
        doctest::Approx(expect).epsilon(1e-12));
  CHECK(table.cells[0].final_primary_max ==
        doctest::Approx(std::max(t1.summary.final_primary,
                                 t2.summary.final_primary))
            .epsilon(1e-12));

  const std::string csv = sweep_to_csv(table);
  CHECK(csv.find("final_primary_mean") != std::string::npos);
}

TEST_CASE("run_sweep: a diverging cell is flagged without hurting siblings") {
  nlohmann::json doc;
  doc["base"] = landscape_doc();
  doc["base"]["out_dir"] = "/tmp/gainlab_test_iso";
  doc["axes"] = {{{"path", "/learner/eta_theta"}, {"values", {1e-4, 1e308}}}};
  doc["repetitions"] = 1;
  doc["budget"] = 4;
  fs::remove_all("/tmp/gainlab_test_iso");
  const SweepTable table =
      run_sweep(sweep_from_json(doc), 2, LogFormat::Csv);
  REQUIRE(table.cells.size() == 2);
  CHECK_FALSE(table.cells[0].failed);
  CHECK(table.cells[0].final_primary_mean > 0.0);
  CHECK(table.cells[1].failed);  // flagged, not fatal
}

TEST_CASE("run_sweep: axes apply by json pointer; budget is enforced") {
  nlohmann::json doc;
  doc["base"] = landscape_doc();
  doc["axes"] = {{{"path", "/env/tau"}, {"values", {0.5, 0.75}}}};
  doc["repetitions"] = 1;
  doc["budget"] = 4;
  const SweepConfig sc = sweep_from_json(doc);
  CHECK(sc.cell_count() == 2);
  const ExperimentConfig c0 = sc.cell({0});
  const ExperimentConfig c1 = sc.cell({1});
  CHECK(c0.landscape.tau == 0.5);
  CHECK(c1.landscape.tau == 0.75);

  doc["budget"] = 1;
  CHECK_THROWS_AS(sweep_from_json(doc), ConfigError);
}

TEST_CASE("parallel and serial runs produce identical reports") {
  nlohmann::json doc;
  doc["base"] = landscape_doc();
  doc["base"]["out_dir"] = "/tmp/gainlab_test_par";
  doc["adapters"] = {{{"kind", "simplex"}}, {{"kind", "primary_only"}}};
  const CompareConfig cc = compare_from_json(doc);

  fs::remove_all("/tmp/gainlab_test_par");
  const ComparisonReport serial = run_compare(cc, 1, LogFormat::Csv);
  const std::string log_serial = [&]() {
    std::ifstream in("/tmp/gainlab_test_par/trial_a0_simplex_s1.csv");
    return std::string(std::istreambuf_iterator<char>(in), {});
  }();
  fs::remove_all("/tmp/gainlab_test_par");
  const ComparisonReport parallel = run_compare(cc, 8, LogFormat::Csv);
  const std::string log_parallel = [&]() {
    std::ifstream in("/tmp/gainlab_test_par/trial_a0_simplex_s1.csv");
    return std::string(std::istreambuf_iterator<char>(in), {});
  }();

  CHECK(comparison_to_json(serial).dump() == comparison_to_json(parallel).dump());
  CHECK(log_serial == log_parallel);
  CHECK_FALSE(log_serial.empty());
}

TEST_CASE("cart trial smoke: channels and learner wiring") {
  const ExperimentConfig cfg = experiment_from_json(cart_doc());
  CHECK_FALSE(cfg.estimator.per_timestep);  // cart default: window-wide
  const TrialResult res = run_trial(cfg, 11);
  REQUIRE(res.ok());
  CHECK(res.summary.steps > 0);
  // every row respects the fixed schema invariants
  for (const TrialRow& r : res.log.rows) {
    REQUIRE(r.state.size() == 4);
    REQUIRE(r.penalties.size() == 1);
    REQUIRE(r.penalties[0] >= 0.0);
    REQUIRE(r.lambda0 >= 0.0);
    REQUIRE(r.lambda0 <= 1.0);
  }
}

TEST_CASE("estimator variants run end to end on the cart") {
  // per-timestep gains vary within an episode
  auto doc = cart_doc();
  doc["estimator"] = {{"per_timestep", true}};
  const TrialResult pt = run_trial(experiment_from_json(doc), 2);
  REQUIRE(pt.ok());
  bool varies = false;
  int cur_ep = -1;
  double first = 0.0;
  for (const TrialRow& r : pt.log.rows) {
    if (r.episode != cur_ep) {
      cur_ep = r.episode;
      first = r.lambda0;
    } else if (r.lambda0 != first) {
      varies = true;
    }
  }
  CHECK(varies);

  // signed-statistics base consumes the signed tilt signal
  doc = cart_doc();
  doc["estimator"] = {{"base", "signed"}};
  const TrialResult sg = run_trial(experiment_from_json(doc), 2);
  REQUIRE(sg.ok());
  CHECK(sg.summary.steps > 0);

  // the printed minus-sign estimator stays available
  doc = cart_doc();
  doc["estimator"] = {{"sign", "minus"}};
  const TrialResult mn = run_trial(experiment_from_json(doc), 2);
  REQUIRE(mn.ok());
}
