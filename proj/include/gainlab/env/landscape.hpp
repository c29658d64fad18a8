#pragma once

#include <array>

#include "gainlab/env/env.hpp"

namespace gainlab {

// Two-parameter bandit on the unit square. The reward is a Gaussian bump
// whose ascent direction points into a thresholded hazard band, so an
// unconstrained optimizer is drawn toward violations.
struct LandscapeConfig {
  std::array<double, 2> reward_center{0.8, 0.5};
  double reward_width = 0.08;
  double hazard_onset = 0.6;
  double hazard_scale = 0.4;
  double tau = 0.75;

  void validate() const;
};

// One step per episode: the action is the evaluated point itself.
class LandscapeEnv final : public Env {
 public:
  explicit LandscapeEnv(LandscapeConfig cfg);

  std::size_t state_dim() const override { return 2; }
  std::vector<std::string> state_names() const override { return {"th0", "th1"}; }
  std::size_t constraint_count() const override { return 1; }
  std::vector<std::string> constraint_names() const override { return {"hazard"}; }
  std::vector<double> thresholds() const override { return {cfg_.tau}; }
  int episode_steps() const override { return 1; }
  std::size_t action_dim() const override { return 2; }

  EnvObservation reset(SeedStream& rng) override;
  EnvObservation step(std::span<const double> action) override;

  const LandscapeConfig& config() const { return cfg_; }

 private:
  LandscapeConfig cfg_;
  int t_ = 0;
};

// Pure evaluation used by both the env and its tests.
double landscape_reward(std::span<const double> point, const LandscapeConfig& cfg);
double landscape_hazard(std::span<const double> point, const LandscapeConfig& cfg);

}  // namespace gainlab
