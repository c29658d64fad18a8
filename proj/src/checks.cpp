#include "gainlab/analysis/checks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gainlab/reward/estimator.hpp"

namespace gainlab {

std::vector<SurfacePoint> surface_grid(int resolution,
                                       const ConstraintSpec& spec) {
  if (resolution < 2)
    throw std::invalid_argument("surface_grid: resolution must be >= 2");
  if (spec.arity() != 2)
    throw std::invalid_argument("surface_grid: two constraints required");

  std::vector<SurfacePoint> out;
  out.reserve(static_cast<std::size_t>(resolution) *
              static_cast<std::size_t>(resolution));
  const double step = 1.0 / static_cast<double>(resolution - 1);
  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) {
      SurfacePoint p;
      p.r1 = static_cast<double>(i) * step;
      p.r2 = static_cast<double>(j) * step;
      PenaltyEstimate est;
      est.r_tilde = {p.r1 * spec.tau[0], p.r2 * spec.tau[1]};
      est.window_len = 1;
      const GainVector g = simplex_gains(est, spec);
      p.lambda0 = g.lambda0;
      p.lambda1 = g.lambda[0];
      p.lambda2 = g.lambda[1];
      out.push_back(p);
    }
  }
  return out;
}

std::string surface_to_csv(const std::vector<SurfacePoint>& grid) {
  std::string out = "r1,r2,lambda0,lambda1,lambda2\n";
  for (const SurfacePoint& p : grid) {
    out += format_double(p.r1) + "," + format_double(p.r2) + "," +
           format_double(p.lambda0) + "," + format_double(p.lambda1) + "," +
           format_double(p.lambda2) + "\n";
  }
  return out;
}

double check_reward_identity(std::pair<double, double> r0_range,
                             std::pair<double, double> r1_range,
                             int resolution) {
  if (resolution < 2)
    throw std::invalid_argument("reward_identity: resolution must be >= 2");
  if (r1_range.first < 0.0 || r1_range.second >= 1.0)
    throw std::invalid_argument("reward_identity: R1 range must lie in [0, 1)");

  ConstraintSpec spec;
  spec.tau = {1.0};
  spec.delta = {0.0};
  spec.names = {"r1"};

  double max_dev = 0.0;
  const double n = static_cast<double>(resolution - 1);
  for (int i = 0; i < resolution; ++i) {
    const double r0 =
        r0_range.first + (r0_range.second - r0_range.first) * i / n;
    for (int j = 0; j < resolution; ++j) {
      const double r1 =
          r1_range.first + (r1_range.second - r1_range.first) * j / n;
      PenaltyEstimate est;
      est.r_tilde = {r1};
      est.window_len = 1;
      const GainVector g = simplex_gains(est, spec);
      ChannelSample s;
      s.primary = r0;
      s.penalties = {r1};
      const double combined = combine_reward(s, g);
      const double closed = r0 - r0 * r1 * r1 - r1 * r1 * r1;
      max_dev = std::max(max_dev, std::abs(combined - closed));
    }
  }
  return max_dev;
}

namespace {

// window-mean statistics per update checkpoint: checkpoint k covers the
// `window` most recent episodes ending at episode k
struct CheckpointSeries {
  std::vector<int> episode;
  std::vector<double> primary_mean;
  std::vector<double> penalty_mean;  // first constraint
};

CheckpointSeries checkpoint_series(const TrialLog& log, int window,
                                   std::size_t constraint) {
  if (window < 1)
    throw std::invalid_argument("checkpoints: window must be >= 1");
  // group rows by episode (rows are ordered by (episode, t))
  std::vector<int> episodes;
  std::vector<double> ep_primary_sum, ep_penalty_sum;
  std::vector<int> ep_len;
  for (const TrialRow& r : log.rows) {
    if (episodes.empty() || episodes.back() != r.episode) {
      episodes.push_back(r.episode);
      ep_primary_sum.push_back(0.0);
      ep_penalty_sum.push_back(0.0);
      ep_len.push_back(0);
    }
    ep_primary_sum.back() += r.primary;
    if (constraint < r.penalties.size())
      ep_penalty_sum.back() += r.penalties[constraint];
    ep_len.back() += 1;
  }

  CheckpointSeries out;
  const int e_count = static_cast<int>(episodes.size());
  for (int k = window - 1; k < e_count; ++k) {
    double p = 0.0, q = 0.0;
    int n = 0;
    for (int e = k - window + 1; e <= k; ++e) {
      p += ep_primary_sum[static_cast<std::size_t>(e)];
      q += ep_penalty_sum[static_cast<std::size_t>(e)];
      n += ep_len[static_cast<std::size_t>(e)];
    }
    if (n == 0) continue;
    out.episode.push_back(episodes[static_cast<std::size_t>(k)]);
    out.primary_mean.push_back(p / n);
    out.penalty_mean.push_back(q / n);
  }
  return out;
}

}  // namespace

InequalityReport check_learning_inequality(const TrialLog& log, double epsilon,
                                           int window) {
  const CheckpointSeries s = checkpoint_series(log, window, 0);
  if (s.primary_mean.size() < 2)
    throw std::invalid_argument("learning_inequality: log too short");

  InequalityReport rep;
  rep.checkpoints = static_cast<int>(s.primary_mean.size());
  rep.initial = s.primary_mean.front();
  int flagged = 0;
  for (std::size_t k = 0; k < s.primary_mean.size(); ++k) {
    const double cumulative = s.primary_mean[k] - rep.initial;
    if (cumulative < rep.initial - epsilon) ++flagged;
    rep.trajectory.push_back({static_cast<double>(s.episode[k]),
                              s.primary_mean[k], s.penalty_mean[k]});
  }
  rep.violation_fraction =
      static_cast<double>(flagged) / static_cast<double>(rep.checkpoints);
  return rep;
}

std::vector<double> lyapunov_boundary_changes(const TrialLog& log,
                                              const ConstraintSpec& spec,
                                              const EstimatorOptions& opts,
                                              int window, double band,
                                              std::size_t constraint) {
  if (constraint >= spec.arity())
    throw std::invalid_argument("lyapunov: constraint index out of range");
  const CheckpointSeries series = checkpoint_series(log, window, constraint);

  // recompute the window-wide estimate at each checkpoint from the raw
  // penalties, mirroring the gain loop's estimator
  std::vector<int> episodes;
  std::vector<std::vector<ChannelSample>> per_episode;
  for (const TrialRow& r : log.rows) {
    if (episodes.empty() || episodes.back() != r.episode) {
      episodes.push_back(r.episode);
      per_episode.emplace_back();
    }
    ChannelSample s;
    s.primary = r.primary;
    s.penalties = r.penalties;
    s.t = r.t;
    per_episode.back().push_back(std::move(s));
  }

  EstimatorOptions window_opts = opts;
  window_opts.per_timestep = false;

  std::vector<double> changes;
  const int e_count = static_cast<int>(episodes.size());
  for (int k = window - 1; k + 1 < e_count; ++k) {
    std::vector<ChannelSample> win;
    for (int e = k - window + 1; e <= k; ++e)
      win.insert(win.end(), per_episode[static_cast<std::size_t>(e)].begin(),
                 per_episode[static_cast<std::size_t>(e)].end());
    if (win.empty()) continue;
    const PenaltyEstimate est =
        estimate_penalties(win, spec, std::nullopt, window_opts);
    if (est.r_tilde[constraint] >= band * spec.tau[constraint]) {
      const std::size_t idx = static_cast<std::size_t>(k - (window - 1));
      changes.push_back(series.penalty_mean[idx + 1] -
                        series.penalty_mean[idx]);
    }
  }
  return changes;
}

LyapunovReport lyapunov_summary(const std::vector<double>& changes,
                                int min_events) {
  LyapunovReport rep;
  rep.events = static_cast<int>(changes.size());
  rep.sufficient = rep.events >= min_events;
  if (changes.empty()) return rep;

  double mean = 0.0;
  for (double c : changes) mean += c;
  mean /= static_cast<double>(changes.size());
  double ss = 0.0;
  for (double c : changes) ss += (c - mean) * (c - mean);
  const double sd = changes.size() > 1
                        ? std::sqrt(ss / static_cast<double>(changes.size() - 1))
                        : 0.0;
  rep.mean_change = mean;
  rep.upper_bound_95 =
      mean + 1.6448536269514722 * sd / std::sqrt(static_cast<double>(changes.size()));
  return rep;
}

LyapunovReport check_lyapunov_boundary(const TrialLog& log,
                                       const ConstraintSpec& spec,
                                       const EstimatorOptions& opts,
                                       int window, double band,
                                       std::size_t constraint,
                                       int min_events) {
  return lyapunov_summary(
      lyapunov_boundary_changes(log, spec, opts, window, band, constraint),
      min_events);
}

}  // namespace gainlab
