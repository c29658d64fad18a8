#include "gainlab/learner/loop.hpp"

#include <cmath>
#include <stdexcept>

namespace gainlab {

namespace {
// stream purposes under one (seed, episode) key
constexpr std::uint64_t kPurposeExplore = 0;
constexpr std::uint64_t kPurposeEnv = 1;
}  // namespace

GainAdapter::GainAdapter(AdapterState state, const ConstraintSpec& spec)
    : state_(std::move(state)), spec_(spec) {
  spec_.validate();
  state_.validate(spec_.arity());
  const bool dual = state_.kind == AdapterKind::Pdo ||
                    state_.kind == AdapterKind::OlAux;
  if (dual && !state_.dual_lambda)
    state_.dual_lambda = std::vector<double>(spec_.arity(), 0.0);
}

GainVector GainAdapter::static_gains() const {
  switch (state_.kind) {
    case AdapterKind::PrimaryOnly: {
      GainVector g;
      g.lambda0 = 1.0;
      g.lambda.assign(spec_.arity(), 0.0);
      g.ratios.assign(spec_.arity(), 0.0);
      return g;
    }
    case AdapterKind::FixedPenalty:
    case AdapterKind::QuadCbf:
    case AdapterKind::LogCbf:
      return fixed_gains(state_);
    case AdapterKind::OlAux: {
      GainVector g;
      g.lambda0 = 1.0;
      g.lambda = *state_.dual_lambda;
      g.ratios.assign(spec_.arity(), 0.0);
      return g;
    }
    default:
      throw std::logic_error("static_gains: adapter is estimate-driven");
  }
}

std::vector<GainVector> GainAdapter::episode_gains(
    const TrajectoryBuffer& buffer, const EstimatorOptions& opts,
    int horizon_len) {
  const std::size_t len = static_cast<std::size_t>(horizon_len);

  // flatten the window once; the estimator filters by timestep
  std::vector<ChannelSample> window;
  std::vector<std::vector<double>> signals;
  std::vector<int> steps;
  if (opts.base == EstimatorBase::SignedStat) {
    signals = buffer.flat_signals();
    steps = buffer.flat_timesteps();
  } else {
    window = buffer.flat_samples();
  }
  auto estimate_at = [&](std::optional<int> t) {
    if (opts.base == EstimatorBase::SignedStat)
      return estimate_penalties_signed(signals, steps, spec_, t, opts);
    return estimate_penalties(window, spec_, t, opts);
  };

  switch (state_.kind) {
    case AdapterKind::PrimaryOnly:
    case AdapterKind::FixedPenalty:
    case AdapterKind::QuadCbf:
    case AdapterKind::LogCbf:
    case AdapterKind::OlAux:
      return std::vector<GainVector>(len, static_gains());

    case AdapterKind::Pdo: {
      // one dual step per episode from the window-wide estimate
      auto [next, gains] = pdo_update(state_, estimate_at({}), spec_);
      state_ = std::move(next);
      return std::vector<GainVector>(len, gains);
    }

    case AdapterKind::Crpo: {
      std::vector<GainVector> out;
      out.reserve(len);
      if (opts.per_timestep) {
        for (std::size_t t = 0; t < len; ++t)
          out.push_back(crpo_gains(estimate_at(static_cast<int>(t)), spec_));
      } else {
        out.assign(len, crpo_gains(estimate_at({}), spec_));
      }
      return out;
    }

    case AdapterKind::Simplex: {
      std::vector<GainVector> out;
      out.reserve(len);
      if (opts.per_timestep) {
        for (std::size_t t = 0; t < len; ++t)
          out.push_back(simplex_gains(estimate_at(static_cast<int>(t)), spec_));
      } else {
        out.assign(len, simplex_gains(estimate_at({}), spec_));
      }
      return out;
    }
  }
  throw std::logic_error("episode_gains: unknown adapter kind");
}

void GainAdapter::absorb_directions(
    const std::vector<std::vector<double>>& dirs) {
  if (state_.kind != AdapterKind::OlAux) return;
  if (dirs.size() != spec_.arity() + 1)
    throw std::invalid_argument("channel arity mismatch");
  std::vector<std::vector<double>> penalty_dirs(dirs.begin() + 1, dirs.end());
  auto [next, gains] = olaux_update(state_, dirs[0], penalty_dirs);
  state_ = std::move(next);
}

PenaltyTransform GainAdapter::penalty_transform() const {
  if (state_.kind != AdapterKind::QuadCbf && state_.kind != AdapterKind::LogCbf)
    return {};
  const AdapterKind kind = state_.kind;
  const ConstraintSpec spec = spec_;
  return [kind, spec](std::size_t i, double x) {
    return cbf_transform(x, spec.tau[i], spec.delta[i], kind);
  };
}

EpisodeOutcome run_episode(Env& env, const Policy& pol, PolicyState& policy,
                           GainAdapter& adapter, TrajectoryBuffer& buffer,
                           const LearnerConfig& lcfg,
                           const EstimatorOptions& eopts, std::uint64_t seed,
                           int episode_index) {
  const std::uint64_t ep = static_cast<std::uint64_t>(episode_index);
  SeedStream explore_rng = SeedStream::keyed(seed, 0, ep, kPurposeExplore);
  SeedStream env_rng = SeedStream::keyed(seed, 0, ep, kPurposeEnv);

  policy = explore(policy, explore_rng);
  env.reset(env_rng);

  EpisodeOutcome out;
  EpisodeRecord rec;
  rec.theta_explored = policy.theta_explored;

  bool fallen = false;
  for (int t = 0; t < lcfg.timesteps_per_episode; ++t) {
    const std::vector<double> action = pol.act(policy.theta_explored, t);
    EnvObservation obs;
    try {
      obs = env.step(action);
    } catch (const std::runtime_error&) {
      rec.failed = true;
      break;
    }
    obs.channels.t = t;
    rec.samples.push_back(obs.channels);
    rec.activations.push_back(pol.activation(t));
    rec.states.push_back(obs.state);
    rec.signals.push_back(obs.signals);
    fallen = obs.fallen;
    if (obs.done) break;
  }
  const int real_steps = rec.length();

  // a fallen system scores no further progress and stays at its terminal
  // penalty for the rest of the episode slot; padding the stored episode
  // keeps both channels truthful about falls (the log keeps real steps only)
  if (fallen && real_steps > 0) {
    for (int t = real_steps; t < lcfg.timesteps_per_episode; ++t) {
      ChannelSample pad = rec.samples.back();
      pad.primary = 0.0;
      pad.t = t;
      rec.samples.push_back(std::move(pad));
      rec.activations.push_back(pol.activation(t));
      rec.states.push_back(rec.states.back());
      rec.signals.push_back(rec.signals.back());
    }
  }

  out.failed = rec.failed;
  buffer.push(std::move(rec));
  const int schedule_len = buffer.max_episode_length();
  const std::vector<GainVector> gains =
      adapter.episode_gains(buffer, eopts, schedule_len);

  const EpisodeRecord& stored = buffer.episode(buffer.size() - 1);
  out.rows.reserve(static_cast<std::size_t>(real_steps));
  for (int t = 0; t < real_steps; ++t) {
    const auto ti = static_cast<std::size_t>(t);
    TrialRow row;
    row.episode = episode_index;
    row.t = t;
    row.state = stored.states[ti];
    row.primary = stored.samples[ti].primary;
    row.penalties = stored.samples[ti].penalties;
    row.lambda0 = gains[ti].lambda0;
    row.lambda = gains[ti].lambda;
    row.delta_t = gains[ti].delta_t;
    out.rows.push_back(std::move(row));
  }

  if (buffer.full()) {
    AgolResult res =
        agol_update(policy, buffer, gains, lcfg, adapter.penalty_transform());
    policy.theta = std::move(res.policy.theta);
    policy.sigma_theta = std::move(res.policy.sigma_theta);
    adapter.absorb_directions(res.channel_directions);
    out.updated = true;
  }
  return out;
}

}  // namespace gainlab
