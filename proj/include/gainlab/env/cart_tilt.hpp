#pragma once

#include <array>

#include "gainlab/env/env.hpp"

namespace gainlab {

// Cart with a hanging pole: the drive force accelerates the cart and the
// cart acceleration excites the (gravity-stabilised) tilt through the
// coupling term of the pendulum equation. Forward speed is the primary
// reward, |tilt| the penalty -- a desk-scale speed-vs-orientation
// trade-off.
struct CartTiltConfig {
  double m_cart = 1.0;        // kg
  double m_pole = 0.3;        // kg
  double half_length = 0.5;   // m
  double gravity = 9.81;      // m/s^2
  double dt = 0.02;           // s
  double force_limit = 10.0;  // N
  double friction = 0.1;      // N*s/m, viscous, on the cart
  double tau_tilt = 0.2;      // rad
  int episode_len = 70;       // steps
  double fall_angle = 0.7853981633974483;  // pi/4, episode ends beyond this

  void validate() const;
};

struct CartState {
  double x = 0.0;
  double x_dot = 0.0;
  double phi = 0.0;
  double phi_dot = 0.0;
};

// One semi-implicit Euler step; exposed for the integration oracle.
CartState cart_dynamics_step(const CartState& s, double force,
                             const CartTiltConfig& cfg);

class CartTiltEnv final : public Env {
 public:
  explicit CartTiltEnv(CartTiltConfig cfg);

  std::size_t state_dim() const override { return 4; }
  std::vector<std::string> state_names() const override {
    return {"x", "x_dot", "phi", "phi_dot"};
  }
  std::size_t constraint_count() const override { return 1; }
  std::vector<std::string> constraint_names() const override { return {"tilt"}; }
  std::vector<double> thresholds() const override { return {cfg_.tau_tilt}; }
  int episode_steps() const override { return cfg_.episode_len; }
  std::size_t action_dim() const override { return 1; }

  EnvObservation reset(SeedStream& rng) override;
  EnvObservation step(std::span<const double> action) override;

  const CartTiltConfig& config() const { return cfg_; }
  const CartState& state() const { return state_; }

 private:
  EnvObservation observe() const;

  CartTiltConfig cfg_;
  CartState state_;
  int t_ = 0;
};

}  // namespace gainlab
