#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gainlab/reward/types.hpp"
#include "gainlab/rng.hpp"

namespace gainlab {

struct EnvObservation {
  std::vector<double> state;
  ChannelSample channels;
  // signed source signal per constraint (the penalty is its magnitude);
  // used by the SignedStat estimator variant
  std::vector<double> signals;
  std::vector<bool> violated;  // penalties[i] > tau[i], strict
  bool done = false;
  bool fallen = false;  // terminal failure (ends the episode early)
};

// Plain deterministic state machine; reset jitter is the only seeded part.
class Env {
 public:
  virtual ~Env() = default;

  virtual std::size_t state_dim() const = 0;
  virtual std::vector<std::string> state_names() const = 0;
  virtual std::size_t constraint_count() const = 0;
  virtual std::vector<std::string> constraint_names() const = 0;
  virtual std::vector<double> thresholds() const = 0;

  // nominal episode length in steps (an episode may end earlier)
  virtual int episode_steps() const = 0;
  // parameters of the policy this environment is driven by
  virtual std::size_t action_dim() const = 0;

  virtual EnvObservation reset(SeedStream& rng) = 0;
  virtual EnvObservation step(std::span<const double> action) = 0;
};

}  // namespace gainlab
