#include "gainlab/env/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gainlab {

void LandscapeConfig::validate() const {
  if (!(reward_width > 0.0))
    throw std::invalid_argument("landscape: reward_width must be > 0");
  if (!(hazard_onset > 0.0 && hazard_onset < 1.0))
    throw std::invalid_argument("landscape: hazard_onset must lie in (0, 1)");
  if (!(hazard_scale > 0.0))
    throw std::invalid_argument("landscape: hazard_scale must be > 0");
  if (!(tau > 0.0 && tau < 1.0))
    throw std::invalid_argument("landscape: tau must lie in (0, 1)");
}

namespace {
double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }
}  // namespace

double landscape_reward(std::span<const double> point,
                        const LandscapeConfig& cfg) {
  const double dx = clamp01(point[0]) - cfg.reward_center[0];
  const double dy = clamp01(point[1]) - cfg.reward_center[1];
  return std::exp(-(dx * dx + dy * dy) / cfg.reward_width);
}

double landscape_hazard(std::span<const double> point,
                        const LandscapeConfig& cfg) {
  return std::max(0.0, clamp01(point[0]) - cfg.hazard_onset) / cfg.hazard_scale;
}

LandscapeEnv::LandscapeEnv(LandscapeConfig cfg) : cfg_(cfg) {
  cfg_.validate();
}

EnvObservation LandscapeEnv::reset(SeedStream&) {
  t_ = 0;
  EnvObservation obs;
  obs.state = {0.0, 0.0};
  obs.channels.penalties = {0.0};
  obs.channels.t = 0;
  obs.signals = {0.0};
  obs.violated = {false};
  obs.done = false;
  return obs;
}

EnvObservation LandscapeEnv::step(std::span<const double> action) {
  if (action.size() != 2)
    throw std::invalid_argument("landscape: action must be a 2-d point");
  EnvObservation obs;
  obs.state = {clamp01(action[0]), clamp01(action[1])};
  const double r0 = landscape_reward(action, cfg_);
  const double h = landscape_hazard(action, cfg_);
  obs.channels.primary = r0;
  obs.channels.penalties = {h};
  obs.channels.t = t_;
  obs.signals = {h};
  obs.violated = {h > cfg_.tau};
  ++t_;
  obs.done = true;  // bandit: one evaluation per episode
  return obs;
}

}  // namespace gainlab
