#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gainlab/analysis/checks.hpp"
#include "gainlab/analysis/stats.hpp"
#include "gainlab/rng.hpp"

using namespace gainlab;

namespace {

ConstraintSpec one_constraint(double tau) {
  ConstraintSpec s;
  s.tau = {tau};
  s.delta = {0.0};
  s.names = {"c0"};
  return s;
}

// synthetic one-row-per-episode log
TrialLog log_from_series(const std::vector<double>& primary,
                         const std::vector<double>& penalty) {
  TrialLog log;
  log.header.config_hash = "test";
  log.header.seed = 0;
  log.header.state_names = {"s0"};
  log.header.penalty_names = {"c0"};
  for (std::size_t e = 0; e < primary.size(); ++e) {
    TrialRow r;
    r.episode = static_cast<int>(e);
    r.t = 0;
    r.state = {0.0};
    r.primary = primary[e];
    r.penalties = {penalty[e]};
    r.lambda0 = 1.0;
    r.lambda = {0.0};
    log.rows.push_back(std::move(r));
  }
  return log;
}

}  // namespace

TEST_CASE("kde_tail_probability: tails, symmetry, Gaussian reference") {
  // far tail: all mass more than ten bandwidths below the threshold
  std::vector<double> low;
  SeedStream rng(1);
  for (int i = 0; i < 1000; ++i) low.push_back(rng.uniform(0.0, 1.0));
  CHECK(kde_tail_probability(low, 50.0) < 1e-6);
  CHECK(kde_tail_probability(low, -50.0) > 1.0 - 1e-6);

  // symmetric sample about the threshold
  std::vector<double> sym;
  for (int i = 0; i < 2000; ++i) {
    const double u = rng.uniform(0.0, 1.0);
    sym.push_back(3.0 + u);
    sym.push_back(3.0 - u);
  }
  CHECK(kde_tail_probability(sym, 3.0) == doctest::Approx(0.5).epsilon(0.02));

  // 1e5 standard normals against the closed-form tail at z = 1.6449
  std::vector<double> normals(100000);
  SeedStream g(20240817);
  for (double& x : normals) x = g.normal(0.0, 1.0);
  const double tail = kde_tail_probability(normals, 1.6449);
  CHECK(std::abs(tail - 0.05) < 0.005);
}

TEST_CASE("kde_tail_probability: tracks the empirical exceedance") {
  SeedStream rng(99);
  std::vector<double> normal(100000), uniform(100000), skewed(100000);
  for (std::size_t i = 0; i < normal.size(); ++i) {
    normal[i] = rng.normal(0.5, 2.0);
    uniform[i] = rng.uniform(-1.0, 3.0);
    skewed[i] = -std::log(1.0 - rng.uniform01());  // exp(1)
  }
  auto empirical = [](const std::vector<double>& xs, double thr) {
    std::size_t k = 0;
    for (double x : xs)
      if (x > thr) ++k;
    return static_cast<double>(k) / static_cast<double>(xs.size());
  };
  // thresholds interior to each support (a Gaussian kernel cannot track a
  // density jump at a support edge)
  for (const auto* xs : {&normal, &uniform}) {
    for (double thr : {0.0, 0.5, 1.5, 2.5}) {
      const double kde = kde_tail_probability(*xs, thr);
      REQUIRE(std::abs(kde - empirical(*xs, thr)) <= 0.01);
    }
  }
  for (double thr : {0.5, 1.5, 2.5, 4.0}) {
    const double kde = kde_tail_probability(skewed, thr);
    REQUIRE(std::abs(kde - empirical(skewed, thr)) <= 0.01);
  }
}

TEST_CASE("kde_tail_probability: degenerate fallbacks") {
  const std::vector<double> single = {1.0};
  CHECK(kde_tail_probability(single, 0.5) == 1.0);  // empirical exceedance
  CHECK(kde_tail_probability(single, 1.5) == 0.0);
  const std::vector<double> flat = {2.0, 2.0, 2.0};
  CHECK(kde_tail_probability(flat, 1.0) == 1.0);
  CHECK(kde_tail_probability(flat, 2.0) == 0.0);  // strict exceedance
  const std::vector<double> empty;
  CHECK_THROWS_AS(kde_tail_probability(empty, 0.0), std::invalid_argument);
}

TEST_CASE("percentile: interpolated quantiles") {
  const std::vector<double> flat = {4.0, 4.0, 4.0, 4.0};
  CHECK(percentile(flat, 1.0) == 4.0);
  CHECK(percentile(flat, 99.9) == 4.0);

  std::vector<double> seq;
  for (int i = 1; i <= 100; ++i) seq.push_back(i);
  CHECK(percentile(seq, 50.0) == doctest::Approx(50.5).epsilon(1e-14));
  CHECK(percentile(seq, 99.9) == doctest::Approx(99.901).epsilon(1e-12));

  const std::vector<double> empty;
  CHECK_THROWS_AS(percentile(empty, 50.0), std::invalid_argument);
  CHECK_THROWS_AS(percentile(seq, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(percentile(seq, 100.0), std::invalid_argument);
}

TEST_CASE("two_proportion_test: reference z and degenerate pools") {
  CHECK(two_proportion_test(30, 100, 30, 100) == doctest::Approx(1.0).epsilon(1e-9));

  // frozen reference: pooled z for 50/100 vs 10/100
  const ProportionTest r = two_proportion_details(50, 100, 10, 100);
  CHECK(r.z == doctest::Approx(6.17213399848368).epsilon(1e-12));
  CHECK(r.p == doctest::Approx(6.73743601893268e-10).epsilon(1e-9));
  CHECK(r.p < 1e-8);

  CHECK(two_proportion_test(0, 50, 0, 70) == 1.0);
  CHECK(two_proportion_test(50, 50, 70, 70) == 1.0);
  CHECK_THROWS_AS(two_proportion_test(5, 0, 1, 10), std::invalid_argument);
  CHECK_THROWS_AS(two_proportion_test(11, 10, 1, 10), std::invalid_argument);
}

TEST_CASE("welch_t_test: identical, frozen reference, separated groups") {
  const std::vector<double> a = {1.0, 2.0, 3.0, 4.0};
  CHECK(welch_t_test(a, a) == doctest::Approx(1.0).epsilon(1e-9));

  // frozen external reference for these samples:
  // t = 6.42745855536085, df = 11.9519466206263, p = 3.32891513091539e-05
  const std::vector<double> x = {2.1, 2.5, 1.9, 2.8, 2.3, 2.7, 2.0, 2.6};
  const std::vector<double> y = {1.2, 1.7, 1.4, 1.1, 1.6, 1.3};
  const TTest t = welch_t_details(x, y);
  CHECK(t.t == doctest::Approx(6.42745855536085).epsilon(1e-12));
  CHECK(t.df == doctest::Approx(11.9519466206263).epsilon(1e-12));
  CHECK(t.p == doctest::Approx(3.32891513091539e-05).epsilon(1e-9));

  // two well-separated seeded Gaussian groups
  SeedStream rng(7);
  std::vector<double> g0, g2;
  for (int i = 0; i < 50; ++i) {
    g0.push_back(rng.normal(0.0, 1.0));
    g2.push_back(rng.normal(2.0, 1.0));
  }
  CHECK(welch_t_test(g0, g2) < 1e-6);
  CHECK(welch_one_sided_greater(g2, g0) < 1e-6);
  CHECK(welch_one_sided_greater(g0, g2) > 0.5);

  // tiny distinct groups: finite p strictly inside (0, 1)
  const std::vector<double> t1 = {0.0, 1.0};
  const std::vector<double> t2 = {5.0, 7.0};
  const double p = welch_t_test(t1, t2);
  CHECK(p > 0.0);
  CHECK(p < 1.0);

  // no variance anywhere and equal means
  const std::vector<double> c1 = {2.0, 2.0};
  CHECK(welch_t_test(c1, c1) == 1.0);
  const std::vector<double> lone = {1.0};
  CHECK_THROWS_AS(welch_t_test(lone, c1), std::invalid_argument);
}

TEST_CASE("surface_grid: corners and simplex identity") {
  ConstraintSpec spec;
  spec.tau = {1.0, 1.0};
  spec.delta = {0.0, 0.0};
  spec.names = {"c1", "c2"};

  const auto grid3 = surface_grid(3, spec);
  REQUIRE(grid3.size() == 9);
  CHECK(grid3.front().r1 == 0.0);
  CHECK(grid3.front().lambda0 == 1.0);
  CHECK(grid3.front().lambda1 == 0.0);
  for (const SurfacePoint& p : grid3) {
    if (p.r1 == 1.0 && p.r2 == 0.0) {
      CHECK(p.lambda0 == doctest::Approx(0.0).epsilon(1e-14));
      CHECK(p.lambda1 == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(p.lambda2 == 0.0);
    }
  }

  const auto grid = surface_grid(51, spec);
  for (const SurfacePoint& p : grid) {
    REQUIRE(std::abs(p.lambda0 + p.lambda1 + p.lambda2 - 1.0) <= 1e-12);
    const double s = p.r1 * p.r1 + p.r2 * p.r2;
    if (s <= 1.0) {
      REQUIRE(std::abs(p.lambda1 - p.r1 * p.r1) <= 1e-12);
      REQUIRE(std::abs(p.lambda2 - p.r2 * p.r2) <= 1e-12);
    }
  }

  const std::string csv = surface_to_csv(grid3);
  CHECK(csv.substr(0, csv.find('\n')) == "r1,r2,lambda0,lambda1,lambda2");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 10);  // header + 9 rows

  CHECK_THROWS_AS(surface_grid(1, spec), std::invalid_argument);
  CHECK_THROWS_AS(surface_grid(3, one_constraint(1.0)), std::invalid_argument);
}

TEST_CASE("check_reward_identity: closed-form agreement") {
  // single points of the cubic form
  CHECK(check_reward_identity({1.0, 1.0}, {0.0, 0.0}, 2) <= 1e-12);
  CHECK(check_reward_identity({1.0, 1.0}, {0.5, 0.5}, 2) <= 1e-12);
  // R0 = 1, R1 = 0.5 -> 1 - 0.25 - 0.125 = 0.625 via both routes
  {
    ConstraintSpec spec = one_constraint(1.0);
    PenaltyEstimate est;
    est.r_tilde = {0.5};
    est.window_len = 1;
    ChannelSample s;
    s.primary = 1.0;
    s.penalties = {0.5};
    CHECK(combine_reward(s, simplex_gains(est, spec)) ==
          doctest::Approx(0.625).epsilon(1e-14));
  }
  CHECK(check_reward_identity({0.0, 1.0}, {0.0, 0.99}, 100) <= 1e-12);
}

TEST_CASE("check_learning_inequality: slack, counterexample, vacuous epsilon") {
  // monotone series starting at a non-positive baseline: no flags
  std::vector<double> up, pen;
  for (int e = 0; e < 60; ++e) {
    up.push_back(-0.1 + 0.01 * e);
    pen.push_back(0.0);
  }
  const TrialLog mono = log_from_series(up, pen);
  CHECK(check_learning_inequality(mono, 0.05, 1).violation_fraction == 0.0);

  // constant series above epsilon: flagged at every checkpoint
  std::vector<double> flat(40, 0.5), zero(40, 0.0);
  const TrialLog constant = log_from_series(flat, zero);
  const InequalityReport rep = check_learning_inequality(constant, 0.1, 1);
  CHECK(rep.violation_fraction == 1.0);
  CHECK(rep.checkpoints == 40);
  CHECK(rep.trajectory.size() == 40);

  // infinite tolerance is vacuous
  CHECK(check_learning_inequality(constant, HUGE_VAL, 1).violation_fraction ==
        0.0);

  // windowed means: window 4 over the constant series, same outcome
  CHECK(check_learning_inequality(constant, 0.1, 4).violation_fraction == 1.0);

  const TrialLog tiny = log_from_series({0.1}, {0.0});
  CHECK_THROWS_AS(check_learning_inequality(tiny, 0.1, 1),
                  std::invalid_argument);
}

TEST_CASE("check_lyapunov_boundary: constructed series") {
  const ConstraintSpec spec = one_constraint(1.0);
  EstimatorOptions opts;
  opts.sign = EstimatorSign::Plus;

  // penalty strictly decreases after every boundary contact
  std::vector<double> prim, pen;
  for (int i = 0; i < 250; ++i) {
    prim.push_back(0.0);
    pen.push_back(i % 2 == 0 ? 0.96 : 0.90);
  }
  const TrialLog drop = log_from_series(prim, pen);
  const LyapunovReport rep = check_lyapunov_boundary(drop, spec, opts, 1);
  CHECK(rep.events >= 100);
  CHECK(rep.sufficient);
  CHECK(rep.mean_change == doctest::Approx(-0.06).epsilon(1e-12));
  CHECK(rep.upper_bound_95 < 0.0);

  // symmetric random walk around the band: inconclusive mean
  SeedStream rng(5);
  std::vector<double> walk_p, walk;
  double v = 0.97;
  for (int i = 0; i < 4000; ++i) {
    walk_p.push_back(0.0);
    walk.push_back(v);
    v += rng.uniform(-0.01, 0.01);
    v = std::min(std::max(v, 0.9), 1.05);
  }
  const LyapunovReport walk_rep =
      check_lyapunov_boundary(log_from_series(walk_p, walk), spec, opts, 1);
  CHECK(walk_rep.sufficient);
  CHECK(std::abs(walk_rep.mean_change) < 0.002);

  // no boundary contact: insufficient data, not a failure
  std::vector<double> low_p(50, 0.0), low(50, 0.1);
  const LyapunovReport low_rep =
      check_lyapunov_boundary(log_from_series(low_p, low), spec, opts, 1);
  CHECK(low_rep.events == 0);
  CHECK_FALSE(low_rep.sufficient);
}

TEST_CASE("trial log: csv and jsonl round trips") {
  TrialLog log;
  log.header.config_hash = "abc123";
  log.header.seed = 42;
  log.header.state_names = {"x", "x_dot"};
  log.header.penalty_names = {"tilt"};
  SeedStream rng(3);
  for (int e = 0; e < 3; ++e) {
    for (int t = 0; t < 4; ++t) {
      TrialRow r;
      r.episode = e;
      r.t = t;
      r.state = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
      r.primary = rng.uniform(-1, 1);
      r.penalties = {rng.uniform(0, 1)};
      r.lambda0 = rng.uniform(0, 1);
      r.lambda = {1.0 - r.lambda0};
      r.delta_t = 1.0 - r.lambda0;
      log.rows.push_back(std::move(r));
    }
  }

  const std::string csv = trial_log_to_csv(log);
  std::istringstream csv_in(csv);
  const TrialLog back = trial_log_from_csv(csv_in);
  REQUIRE(back.rows.size() == log.rows.size());
  CHECK(back.header.config_hash == "abc123");
  CHECK(back.header.seed == 42);
  CHECK(back.header.state_names == log.header.state_names);
  CHECK(back.header.penalty_names == log.header.penalty_names);
  for (std::size_t i = 0; i < log.rows.size(); ++i) {
    CHECK(back.rows[i].state == log.rows[i].state);    // exact round trip
    CHECK(back.rows[i].primary == log.rows[i].primary);
    CHECK(back.rows[i].lambda == log.rows[i].lambda);
    CHECK(back.rows[i].delta_t == log.rows[i].delta_t);
  }

  const std::string jsonl = trial_log_to_jsonl(log);
  std::istringstream jsonl_in(jsonl);
  const TrialLog jback = trial_log_from_jsonl(jsonl_in);
  REQUIRE(jback.rows.size() == log.rows.size());
  for (std::size_t i = 0; i < log.rows.size(); ++i) {
    CHECK(jback.rows[i].penalties == log.rows[i].penalties);
    CHECK(jback.rows[i].lambda0 == log.rows[i].lambda0);
  }

  // combined reward implied by a row
  GainVector g;
  g.lambda0 = 0.75;
  g.lambda = {0.09, 0.16};
  TrialRow r;
  r.primary = 1.0;
  r.penalties = {0.5, 0.25};
  r.lambda0 = g.lambda0;
  r.lambda = g.lambda;
  CHECK(row_combined_reward(r) == doctest::Approx(0.665).epsilon(1e-14));
}
