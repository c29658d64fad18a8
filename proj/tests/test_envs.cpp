#include <doctest.h>

#include <cmath>

#include "gainlab/env/cart_tilt.hpp"
#include "gainlab/env/landscape.hpp"

using namespace gainlab;

TEST_CASE("landscape: reward peak, hazard band, strict violation") {
  LandscapeConfig cfg;
  LandscapeEnv env(cfg);
  SeedStream rng(1);
  env.reset(rng);

  const std::vector<double> center = {0.8, 0.5};
  auto obs = env.step(center);
  CHECK(obs.channels.primary == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(obs.channels.penalties[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK_FALSE(obs.violated[0]);
  CHECK(obs.done);  // bandit: one step per episode

  env.reset(rng);
  obs = env.step(std::vector<double>{0.0, 0.0});
  CHECK(obs.channels.penalties[0] == 0.0);

  // at the default constants the boundary point sits within one ulp of tau
  env.reset(rng);
  obs = env.step(std::vector<double>{0.9, 0.5});
  CHECK(obs.channels.penalties[0] == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(obs.violated[0] == (obs.channels.penalties[0] > cfg.tau));

  env.reset(rng);
  obs = env.step(std::vector<double>{0.91, 0.5});
  CHECK(obs.violated[0]);

  // strict inequality at an exactly representable boundary
  LandscapeConfig dyadic;
  dyadic.hazard_onset = 0.5;
  dyadic.hazard_scale = 0.5;
  LandscapeEnv env2(dyadic);
  env2.reset(rng);
  obs = env2.step(std::vector<double>{0.875, 0.5});  // (0.875-0.5)/0.5 = 0.75
  CHECK(obs.channels.penalties[0] == 0.75);
  CHECK_FALSE(obs.violated[0]);
}

TEST_CASE("landscape: ranges and the reward/hazard conflict") {
  LandscapeConfig cfg;
  SeedStream rng(2);
  for (int i = 0; i < 2000; ++i) {
    const std::vector<double> p = {rng.uniform01(), rng.uniform01()};
    const double r0 = landscape_reward(p, cfg);
    const double h = landscape_hazard(p, cfg);
    REQUIRE(r0 > 0.0);
    REQUIRE(r0 <= 1.0);
    REQUIRE(h >= 0.0);
    REQUIRE(h <= 1.0);
  }
  // at any safe point left of the peak, the reward gradient pushes toward
  // the hazard band (finite differences)
  for (int i = 0; i < 500; ++i) {
    const double x = rng.uniform(0.0, 0.79);
    const double y = rng.uniform01();
    const double eps = 1e-6;
    const std::vector<double> lo = {x - eps, y};
    const std::vector<double> hi = {x + eps, y};
    if (x - eps < 0.0) continue;
    const double grad_x =
        (landscape_reward(hi, cfg) - landscape_reward(lo, cfg)) / (2 * eps);
    REQUIRE(grad_x > 0.0);
  }
}

TEST_CASE("landscape: reset clears channels") {
  LandscapeEnv env{LandscapeConfig{}};
  SeedStream rng(3);
  const auto obs = env.reset(rng);
  CHECK_FALSE(obs.done);
  CHECK(obs.channels.primary == 0.0);
  CHECK(obs.channels.penalties[0] == 0.0);
}

namespace {

// test-only oracle: one semi-implicit Euler step written out longhand
CartState oracle_step(const CartState& s, double f, const CartTiltConfig& c) {
  const double total = c.m_cart + c.m_pole;
  const double x_acc = (f - c.friction * s.x_dot) / total;
  const double phi_acc =
      -(3.0 / (4.0 * c.half_length)) *
          (x_acc * std::cos(s.phi) + c.gravity * std::sin(s.phi)) -
      (3.0 * c.friction / (4.0 * c.m_pole)) * s.phi_dot;
  CartState n;
  n.x_dot = s.x_dot + x_acc * c.dt;
  n.phi_dot = s.phi_dot + phi_acc * c.dt;
  n.x = s.x + n.x_dot * c.dt;
  n.phi = s.phi + n.phi_dot * c.dt;
  return n;
}

double mech_energy(const CartTiltConfig& c, double x_dot, double phi,
                   double phi_dot) {
  return 0.5 * (c.m_cart + c.m_pole) * x_dot * x_dot +
         0.5 * (4.0 / 3.0) * c.m_pole * c.half_length * c.half_length *
             phi_dot * phi_dot +
         c.m_pole * c.gravity * c.half_length * (1.0 - std::cos(phi));
}

}  // namespace

TEST_CASE("cart: equilibrium fixed point") {
  CartTiltConfig cfg;
  CartState s{};
  const CartState n = cart_dynamics_step(s, 0.0, cfg);
  CHECK(n.x == 0.0);
  CHECK(n.x_dot == 0.0);
  CHECK(n.phi == 0.0);
  CHECK(n.phi_dot == 0.0);
}

TEST_CASE("cart: one-step response matches the integration oracle") {
  CartTiltConfig cfg;
  const double f = 4.0;
  CartState s{};
  const CartState stepped = cart_dynamics_step(s, f, cfg);
  const CartState expected = oracle_step(s, f, cfg);
  CHECK(stepped.x_dot == doctest::Approx(expected.x_dot).epsilon(1e-15));
  CHECK(stepped.phi == doctest::Approx(expected.phi).epsilon(1e-15));
  // from rest the cart picks up F/(m_cart + m_pole) * dt in one step
  CHECK(stepped.x_dot ==
        doctest::Approx(f / (cfg.m_cart + cfg.m_pole) * cfg.dt).epsilon(1e-12));
  CHECK(std::abs(stepped.phi) > 0.0);

  // multi-step agreement on a forced trajectory
  CartState a{}, b{};
  for (int t = 0; t < 50; ++t) {
    const double force = 3.0 * std::sin(0.3 * t);
    a = cart_dynamics_step(a, force, cfg);
    b = oracle_step(b, force, cfg);
  }
  CHECK(a.x == doctest::Approx(b.x).epsilon(1e-12));
  CHECK(a.phi == doctest::Approx(b.phi).epsilon(1e-12));
}

TEST_CASE("cart: energy conserved without drive or friction") {
  CartTiltConfig cfg;
  cfg.friction = 0.0;
  CartState s{};
  s.phi = 0.2;
  s.x_dot = 0.5;
  const double e0 = mech_energy(cfg, s.x_dot, s.phi, 0.0);

  // velocities are staggered half a step by the integrator, so kinetic
  // terms use midpoint velocities
  CartState prev = s;
  for (int t = 0; t < 70; ++t) {
    const CartState next = cart_dynamics_step(prev, 0.0, cfg);
    const double x_dot_mid = 0.5 * (prev.x_dot + next.x_dot);
    const double phi_dot_mid = 0.5 * (prev.phi_dot + next.phi_dot);
    if (t > 0) {
      const double e = mech_energy(cfg, x_dot_mid, prev.phi, phi_dot_mid);
      REQUIRE(std::abs(e - e0) / e0 < 0.01);
    }
    prev = next;
  }
}

TEST_CASE("cart: reset jitter and determinism") {
  CartTiltConfig cfg;
  CartTiltEnv env(cfg);

  SeedStream a = SeedStream::keyed(9, 0, 0);
  SeedStream b = SeedStream::keyed(9, 0, 0);
  const auto ra = env.reset(a);
  const auto rb = env.reset(b);
  CHECK(ra.state == rb.state);
  CHECK(ra.channels.primary == 0.0);

  for (int i = 0; i < 10000; ++i) {
    SeedStream rng = SeedStream::keyed(1, 0, static_cast<std::uint64_t>(i));
    const auto obs = env.reset(rng);
    REQUIRE(std::abs(obs.state[2]) <= 0.01);
  }
}

TEST_CASE("cart: sustained full drive tips the pole past the fall angle") {
  CartTiltConfig cfg;
  CartTiltEnv env(cfg);
  SeedStream rng = SeedStream::keyed(4, 0, 0);
  env.reset(rng);
  bool done = false;
  int steps = 0;
  double max_tilt = 0.0;
  while (!done && steps < cfg.episode_len) {
    const auto obs = env.step(std::vector<double>{cfg.force_limit});
    max_tilt = std::max(max_tilt, obs.channels.penalties[0]);
    done = obs.done;
    ++steps;
  }
  CHECK(max_tilt >= cfg.fall_angle);
  CHECK(steps < cfg.episode_len);  // fall terminates the episode early
  CHECK(env.state().x_dot > 0.0);
}

TEST_CASE("cart: gentle drive keeps the tilt inside the threshold") {
  CartTiltConfig cfg;
  CartTiltEnv env(cfg);
  SeedStream rng = SeedStream::keyed(4, 0, 1);
  env.reset(rng);
  double max_tilt = 0.0;
  for (int t = 0; t < cfg.episode_len; ++t) {
    const auto obs = env.step(std::vector<double>{1.0});
    max_tilt = std::max(max_tilt, obs.channels.penalties[0]);
    if (obs.done) break;
  }
  CHECK(max_tilt < cfg.tau_tilt);
  CHECK(env.state().x_dot > 0.5);
}

TEST_CASE("cart: zero drive decays the tilt envelope") {
  CartTiltConfig cfg;
  CartTiltEnv env(cfg);
  SeedStream rng = SeedStream::keyed(4, 0, 2);
  env.reset(rng);
  // kick it sideways first
  for (int t = 0; t < 5; ++t) env.step(std::vector<double>{8.0});
  double peak_early = 0.0, peak_late = 0.0;
  for (int t = 0; t < 600; ++t) {
    const double tilt = env.step(std::vector<double>{0.0}).channels.penalties[0];
    if (t < 100) peak_early = std::max(peak_early, tilt);
    if (t >= 500) peak_late = std::max(peak_late, tilt);
  }
  CHECK(peak_early > 0.0);
  CHECK(peak_late < 0.5 * peak_early);
}
