#include "gainlab/env/cart_tilt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gainlab {

void CartTiltConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("cart: dt must be > 0");
  if (!(m_cart > 0.0) || !(m_pole > 0.0))
    throw std::invalid_argument("cart: masses must be > 0");
  if (!(half_length > 0.0))
    throw std::invalid_argument("cart: half_length must be > 0");
  if (!(tau_tilt > 0.0))
    throw std::invalid_argument("cart: tau_tilt must be > 0");
  if (!(force_limit > 0.0))
    throw std::invalid_argument("cart: force_limit must be > 0");
  if (friction < 0.0)
    throw std::invalid_argument("cart: friction must be >= 0");
  if (episode_len < 1)
    throw std::invalid_argument("cart: episode_len must be >= 1");
}

CartState cart_dynamics_step(const CartState& s, double force,
                             const CartTiltConfig& cfg) {
  const double f = std::clamp(force, -cfg.force_limit, cfg.force_limit);
  const double total_mass = cfg.m_cart + cfg.m_pole;
  const double x_acc = (f - cfg.friction * s.x_dot) / total_mass;
  // rod pendulum hanging under the cart, driven by the cart acceleration;
  // the same viscous coefficient acts at the pivot (drag c*l*phi_dot at
  // lever l), so the free tilt decays while the zero-friction system
  // stays conservative
  const double phi_acc = -(3.0 / (4.0 * cfg.half_length)) *
                             (x_acc * std::cos(s.phi) +
                              cfg.gravity * std::sin(s.phi)) -
                         (3.0 * cfg.friction / (4.0 * cfg.m_pole)) * s.phi_dot;

  CartState next;
  next.x_dot = s.x_dot + x_acc * cfg.dt;
  next.phi_dot = s.phi_dot + phi_acc * cfg.dt;
  next.x = s.x + next.x_dot * cfg.dt;
  next.phi = s.phi + next.phi_dot * cfg.dt;
  return next;
}

CartTiltEnv::CartTiltEnv(CartTiltConfig cfg) : cfg_(cfg) { cfg_.validate(); }

EnvObservation CartTiltEnv::observe() const {
  EnvObservation obs;
  obs.state = {state_.x, state_.x_dot, state_.phi, state_.phi_dot};
  obs.channels.primary = state_.x_dot;
  obs.channels.penalties = {std::abs(state_.phi)};
  obs.channels.t = t_;
  obs.signals = {state_.phi};
  obs.violated = {std::abs(state_.phi) > cfg_.tau_tilt};
  obs.fallen = std::abs(state_.phi) >= cfg_.fall_angle;
  obs.done = t_ >= cfg_.episode_len || obs.fallen;
  return obs;
}

EnvObservation CartTiltEnv::reset(SeedStream& rng) {
  state_ = CartState{};
  state_.phi = rng.uniform(-0.01, 0.01);
  t_ = 0;
  EnvObservation obs = observe();
  obs.channels.primary = 0.0;  // no motion yet
  return obs;
}

EnvObservation CartTiltEnv::step(std::span<const double> action) {
  if (action.size() != 1)
    throw std::invalid_argument("cart: action must be a scalar drive force");
  const int step_idx = t_;
  state_ = cart_dynamics_step(state_, action[0], cfg_);
  if (!std::isfinite(state_.x) || !std::isfinite(state_.x_dot) ||
      !std::isfinite(state_.phi) || !std::isfinite(state_.phi_dot))
    throw std::runtime_error("dynamics diverged");
  ++t_;
  EnvObservation obs = observe();
  obs.channels.t = step_idx;
  return obs;
}

}  // namespace gainlab
