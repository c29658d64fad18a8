#pragma once

#include <cstdint>

#include "gainlab/env/env.hpp"
#include "gainlab/learner/learner.hpp"

namespace gainlab {

// One logged timestep; the combined reward is implied by the row
// (lambda0 * primary - sum lambda_i * penalty_i).
struct TrialRow {
  int episode = 0;
  int t = 0;
  std::vector<double> state;
  double primary = 0.0;
  std::vector<double> penalties;
  double lambda0 = 1.0;
  std::vector<double> lambda;
  double delta_t = 0.0;
};

// Wraps an AdapterState with its recompute-per-episode behaviour.
// Stateless schemes derive the gain schedule from windowed penalty
// estimates; multiplier schemes advance their duals once per episode.
class GainAdapter {
 public:
  explicit GainAdapter(AdapterState state, const ConstraintSpec& spec);

  // Gain schedule covering timesteps [0, horizon_len) of the stored window.
  std::vector<GainVector> episode_gains(const TrajectoryBuffer& buffer,
                                        const EstimatorOptions& opts,
                                        int horizon_len);

  // Feeds the per-channel update directions back into the
  // gradient-alignment multiplier scheme; no-op for the others.
  void absorb_directions(const std::vector<std::vector<double>>& dirs);

  // Barrier penalty shaping for the CBF family, identity otherwise.
  PenaltyTransform penalty_transform() const;

  const AdapterState& state() const { return state_; }

 private:
  GainVector static_gains() const;

  AdapterState state_;
  ConstraintSpec spec_;
};

struct EpisodeOutcome {
  std::vector<TrialRow> rows;
  bool failed = false;   // dynamics diverged mid-episode
  bool updated = false;  // a parameter update was performed
};

// Runs one exploration episode: redraws the explored parameters, steps
// the environment, appends the episode to the buffer, recomputes the
// per-timestep gain schedule from the stored window, and performs the
// parameter update once the window is full.
EpisodeOutcome run_episode(Env& env, const Policy& pol, PolicyState& policy,
                           GainAdapter& adapter, TrajectoryBuffer& buffer,
                           const LearnerConfig& lcfg,
                           const EstimatorOptions& eopts, std::uint64_t seed,
                           int episode_index);

}  // namespace gainlab
