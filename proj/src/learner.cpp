#include "gainlab/learner/learner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gainlab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kStdFloor = 1e-8;
}  // namespace

void LearnerConfig::validate() const {
  if (!(eta_theta > 0.0)) throw std::invalid_argument("learner: eta_theta must be > 0");
  if (!(eta_sigma > 0.0)) throw std::invalid_argument("learner: eta_sigma must be > 0");
  if (episodes_per_window < 1)
    throw std::invalid_argument("learner: episodes_per_window must be >= 1");
  if (timesteps_per_episode < 1)
    throw std::invalid_argument("learner: timesteps_per_episode must be >= 1");
  if (return_horizon < 1 || return_horizon > timesteps_per_episode)
    throw std::invalid_argument(
        "learner: return_horizon must lie in [1, timesteps_per_episode]");
  if (!(sigma_init > 0.0)) throw std::invalid_argument("learner: sigma_init must be > 0");
  if (!(sigma_min > 0.0)) throw std::invalid_argument("learner: sigma_min must be > 0");
  if (!(sigma_max >= sigma_min))
    throw std::invalid_argument("learner: sigma_max must be >= sigma_min");
  if (!(step_clip > 0.0))
    throw std::invalid_argument("learner: step_clip must be > 0");
}

RhythmicDrivePolicy::RhythmicDrivePolicy(int period) : period_(period) {
  if (period_ < 2) throw std::invalid_argument("policy: period must be >= 2");
}

std::vector<double> RhythmicDrivePolicy::features(int t) const {
  const double w = kTwoPi * static_cast<double>(t) / static_cast<double>(period_);
  return {1.0, std::sin(w), std::cos(w)};
}

std::vector<double> RhythmicDrivePolicy::act(std::span<const double> theta,
                                             int t) const {
  const std::vector<double> f = features(t);
  double a = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) a += theta[k] * f[k];
  return {a};
}

std::vector<double> RhythmicDrivePolicy::activation(int t) const {
  std::vector<double> f = features(t);
  for (double& v : f) v = std::abs(v);
  return f;
}

TrajectoryBuffer::TrajectoryBuffer(int capacity) : capacity_(capacity) {
  if (capacity_ < 1) throw std::invalid_argument("buffer: capacity must be >= 1");
}

void TrajectoryBuffer::push(EpisodeRecord ep) {
  episodes_.push_back(std::move(ep));
  if (static_cast<int>(episodes_.size()) > capacity_) episodes_.pop_front();
}

int TrajectoryBuffer::total_samples() const {
  int n = 0;
  for (const auto& e : episodes_) n += e.length();
  return n;
}

int TrajectoryBuffer::max_episode_length() const {
  int n = 0;
  for (const auto& e : episodes_) n = std::max(n, e.length());
  return n;
}

std::vector<ChannelSample> TrajectoryBuffer::flat_samples() const {
  std::vector<ChannelSample> out;
  out.reserve(static_cast<std::size_t>(total_samples()));
  for (const auto& e : episodes_)
    out.insert(out.end(), e.samples.begin(), e.samples.end());
  return out;
}

std::vector<std::vector<double>> TrajectoryBuffer::flat_signals() const {
  std::size_t arity = 0;
  if (!episodes_.empty() && !episodes_.front().signals.empty())
    arity = episodes_.front().signals.front().size();
  std::vector<std::vector<double>> out(arity);
  for (const auto& e : episodes_)
    for (const auto& row : e.signals)
      for (std::size_t i = 0; i < arity; ++i) out[i].push_back(row[i]);
  return out;
}

std::vector<int> TrajectoryBuffer::flat_timesteps() const {
  std::vector<int> out;
  for (const auto& e : episodes_)
    for (const auto& s : e.samples) out.push_back(s.t);
  return out;
}

PolicyState explore(const PolicyState& policy, SeedStream& rng) {
  PolicyState next = policy;
  next.theta_explored.resize(policy.theta.size());
  for (std::size_t k = 0; k < policy.theta.size(); ++k)
    next.theta_explored[k] = rng.normal(policy.theta[k], policy.sigma_theta[k]);
  return next;
}

std::vector<ReturnStats> channel_returns(const TrajectoryBuffer& buffer,
                                         int horizon,
                                         const PenaltyTransform& transform) {
  if (buffer.size() == 0)
    throw std::invalid_argument("channel_returns: empty buffer");
  if (horizon < 1)
    throw std::invalid_argument("channel_returns: horizon must be >= 1");

  std::size_t arity = 0;
  for (std::size_t e = 0; e < buffer.size(); ++e)
    if (buffer.episode(e).length() > 0) {
      arity = buffer.episode(e).samples.front().penalties.size();
      break;
    }
  const std::size_t channels = 1 + arity;

  std::vector<ReturnStats> stats(channels);

  auto channel_value = [&](const ChannelSample& s, std::size_t c) {
    if (c == 0) return s.primary;
    const double raw = s.penalties[c - 1];
    return transform ? transform(c - 1, raw) : raw;
  };

  for (std::size_t e = 0; e < buffer.size(); ++e) {
    const EpisodeRecord& ep = buffer.episode(e);
    const int len = ep.length();
    for (int i = 0; i < len; ++i) {
      const int end = std::min(i + horizon, len);
      for (std::size_t c = 0; c < channels; ++c) {
        double acc = 0.0;
        for (int j = i; j < end; ++j) acc += channel_value(ep.samples[j], c);
        stats[c].g.push_back(acc / static_cast<double>(end - i));
      }
    }
  }

  for (auto& st : stats) {
    const double n = static_cast<double>(st.g.size());
    double mean = 0.0;
    for (double v : st.g) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : st.g) {
      const double d = v - mean;
      ss += d * d;
    }
    st.g_bar = mean;
    st.g_std = std::max(std::sqrt(ss / n), kStdFloor);
  }
  return stats;
}

AgolResult agol_update(const PolicyState& policy, const TrajectoryBuffer& buffer,
                       std::span<const GainVector> gains_per_timestep,
                       const LearnerConfig& cfg,
                       const PenaltyTransform& transform) {
  if (buffer.size() == 0)
    throw std::invalid_argument("agol_update: empty buffer");
  const std::size_t dim = policy.theta.size();
  const std::vector<ReturnStats> stats =
      channel_returns(buffer, cfg.return_horizon, transform);
  const std::size_t channels = stats.size();

  std::vector<double> d_theta(dim, 0.0);
  std::vector<double> d_sigma(dim, 0.0);
  std::vector<std::vector<double>> directions(
      channels, std::vector<double>(dim, 0.0));
  std::vector<double> adv(channels);

  std::size_t i = 0;  // flat sample index, matches channel_returns order
  for (std::size_t e = 0; e < buffer.size(); ++e) {
    const EpisodeRecord& ep = buffer.episode(e);
    for (int t = 0; t < ep.length(); ++t, ++i) {
      for (std::size_t c = 0; c < channels; ++c) adv[c] = stats[c].normalized(i);

      const int gt = ep.samples[t].t;
      if (gt < 0 || gt >= static_cast<int>(gains_per_timestep.size()))
        throw std::invalid_argument("agol_update: missing gains for timestep");
      const double combined =
          combine_advantages(adv, gains_per_timestep[static_cast<std::size_t>(gt)]);
      if (!std::isfinite(combined))
        throw std::runtime_error("non-finite advantage in update");

      for (std::size_t k = 0; k < dim; ++k) {
        const double act = ep.activations[static_cast<std::size_t>(t)][k];
        const double diff = ep.theta_explored[k] - policy.theta[k];
        const double s = policy.sigma_theta[k];
        const double score_theta = diff / (s * s);
        const double score_sigma = (diff * diff - s * s) / (s * s * s);
        d_theta[k] += act * score_theta * combined;
        d_sigma[k] += act * score_sigma * combined;
        for (std::size_t c = 0; c < channels; ++c)
          directions[c][k] += act * score_theta * adv[c];
      }
    }
  }

  AgolResult out;
  out.policy = policy;
  for (std::size_t k = 0; k < dim; ++k) {
    if (!std::isfinite(cfg.eta_theta * d_theta[k]) ||
        !std::isfinite(cfg.eta_sigma * d_sigma[k]))
      throw std::runtime_error("non-finite parameter update");
    const double bound = cfg.step_clip * policy.sigma_theta[k];
    out.policy.theta[k] +=
        std::clamp(cfg.eta_theta * d_theta[k], -bound, bound);
    out.policy.sigma_theta[k] = std::clamp(
        out.policy.sigma_theta[k] +
            std::clamp(cfg.eta_sigma * d_sigma[k], -bound, bound),
        cfg.sigma_min, cfg.sigma_max);
    if (!std::isfinite(out.policy.theta[k]) ||
        !std::isfinite(out.policy.sigma_theta[k]))
      throw std::runtime_error("non-finite parameter after update");
  }
  out.channel_directions = std::move(directions);
  for (auto& d : out.channel_directions)
    for (double& v : d) v *= cfg.eta_theta;
  return out;
}

}  // namespace gainlab
