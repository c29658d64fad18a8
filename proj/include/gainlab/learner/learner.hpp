#pragma once

#include <deque>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "gainlab/reward/adapters.hpp"
#include "gainlab/reward/estimator.hpp"
#include "gainlab/rng.hpp"

namespace gainlab {

// Gaussian parameter-space exploration state.
struct PolicyState {
  std::vector<double> theta;
  std::vector<double> sigma_theta;
  std::vector<double> theta_explored;
};

struct LearnerConfig {
  double eta_theta = 1e-4;
  double eta_sigma = 1e-5;
  int episodes_per_window = 8;
  int timesteps_per_episode = 70;
  int return_horizon = 20;
  double sigma_init = 0.1;
  double sigma_min = 0.02;
  double sigma_max = 1.0;
  // per-update parameter step bound as a fraction of sigma; keeps one
  // window of strongly weighted samples from catapulting theta
  double step_clip = 0.5;

  void validate() const;
};

// Maps parameters to an action for a timestep, together with the
// magnitude of the action gradient per parameter (the absolute feature
// activation for linear maps).
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::size_t dim() const = 0;
  virtual std::vector<double> act(std::span<const double> theta, int t) const = 0;
  virtual std::vector<double> activation(int t) const = 0;
};

// The action is the parameter vector itself (bandit evaluation).
class PointPolicy final : public Policy {
 public:
  explicit PointPolicy(std::size_t n) : n_(n) {}
  std::size_t dim() const override { return n_; }
  std::vector<double> act(std::span<const double> theta, int) const override {
    return {theta.begin(), theta.end()};
  }
  std::vector<double> activation(int) const override {
    return std::vector<double>(n_, 1.0);
  }

 private:
  std::size_t n_;
};

// Scalar drive composed of a bias and one sine/cosine pair, a minimal
// rhythmic basis: action(t) = th0 + th1 sin(2 pi t / period) + th2 cos(...).
class RhythmicDrivePolicy final : public Policy {
 public:
  explicit RhythmicDrivePolicy(int period = 20);
  std::size_t dim() const override { return 3; }
  std::vector<double> act(std::span<const double> theta, int t) const override;
  std::vector<double> activation(int t) const override;

 private:
  std::vector<double> features(int t) const;
  int period_;
};

// One episode of raw experience.
struct EpisodeRecord {
  std::vector<ChannelSample> samples;
  std::vector<std::vector<double>> activations;  // per timestep, per parameter
  std::vector<std::vector<double>> states;
  std::vector<std::vector<double>> signals;  // per timestep, per constraint
  std::vector<double> theta_explored;
  bool failed = false;

  int length() const { return static_cast<int>(samples.size()); }
};

// Ring of the most recent episodes; oldest evicted first.
class TrajectoryBuffer {
 public:
  explicit TrajectoryBuffer(int capacity);

  void push(EpisodeRecord ep);
  bool full() const { return static_cast<int>(episodes_.size()) == capacity_; }
  std::size_t size() const { return episodes_.size(); }
  int capacity() const { return capacity_; }
  const EpisodeRecord& episode(std::size_t i) const { return episodes_[i]; }

  int total_samples() const;
  int max_episode_length() const;

  // flattened channel samples (episode order, then timestep)
  std::vector<ChannelSample> flat_samples() const;
  // flattened signed signals per constraint plus aligned timestep indices
  std::vector<std::vector<double>> flat_signals() const;
  std::vector<int> flat_timesteps() const;

 private:
  std::deque<EpisodeRecord> episodes_;
  int capacity_;
};

struct ReturnStats {
  std::vector<double> g;
  double g_bar = 0.0;
  double g_std = 0.0;  // floored at 1e-8

  double normalized(std::size_t i) const { return (g[i] - g_bar) / g_std; }
};

using PenaltyTransform = std::function<double(std::size_t, double)>;

// Redraws the explored parameters from N(theta, sigma^2) for a new episode.
PolicyState explore(const PolicyState& policy, SeedStream& rng);

// Windowed per-sample returns per channel (primary first, then one per
// constraint): G_i = mean of the channel over [i, i+horizon) within the
// episode, truncated at episode end.
std::vector<ReturnStats> channel_returns(const TrajectoryBuffer& buffer,
                                         int horizon,
                                         const PenaltyTransform& transform = {});

struct AgolResult {
  PolicyState policy;
  // per-channel parameter update directions, used as the gradient
  // estimates of the alignment-based multiplier scheme
  std::vector<std::vector<double>> channel_directions;
};

// Parameter-space update from normalized advantages:
//   d_theta = eta_t sum_i |act_i| (th~_i - th)/s^2 * A_i
//   d_sigma = eta_s sum_i |act_i| ((th~_i - th)^2 - s^2)/s^3 * A_i
// where A_i combines the per-channel normalized advantages with that
// sample's per-timestep gains. Steps are clipped to step_clip * sigma
// per parameter and sigma is clamped to [sigma_min, sigma_max].
AgolResult agol_update(const PolicyState& policy, const TrajectoryBuffer& buffer,
                       std::span<const GainVector> gains_per_timestep,
                       const LearnerConfig& cfg,
                       const PenaltyTransform& transform = {});

}  // namespace gainlab
