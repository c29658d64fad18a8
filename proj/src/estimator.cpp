#include "gainlab/reward/estimator.hpp"

#include <cmath>
#include <stdexcept>

namespace gainlab {

namespace {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

// population statistics (divide by N): windows are small and fixed
MeanStd population_stats(const std::vector<double>& xs) {
  MeanStd out;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) out.mean += x;
  out.mean /= n;
  double ss = 0.0;
  for (double x : xs) {
    const double d = x - out.mean;
    ss += d * d;
  }
  out.std = std::sqrt(ss / n);
  return out;
}

double adjusted(const MeanStd& s, double base_mag, double k_sigma,
                EstimatorSign sign) {
  const double dev = k_sigma * s.std;
  const double v = sign == EstimatorSign::Plus ? base_mag + dev : base_mag - dev;
  return v > 0.0 ? v : 0.0;
}

}  // namespace

PenaltyEstimate estimate_penalties(std::span<const ChannelSample> window,
                                   const ConstraintSpec& spec,
                                   std::optional<int> per_timestep_index,
                                   const EstimatorOptions& opts) {
  if (window.empty()) throw std::invalid_argument("empty estimation window");
  const std::size_t arity = spec.arity();

  std::vector<std::vector<double>> series(arity);
  for (const ChannelSample& s : window) {
    if (s.penalties.size() != arity)
      throw std::invalid_argument("channel arity mismatch");
    if (per_timestep_index && s.t != *per_timestep_index) continue;
    for (std::size_t i = 0; i < arity; ++i) series[i].push_back(s.penalties[i]);
  }
  if (arity > 0 && series[0].empty())
    throw std::invalid_argument("empty estimation window");

  PenaltyEstimate est;
  est.per_timestep = per_timestep_index.has_value();
  est.window_len = arity > 0 ? static_cast<int>(series[0].size())
                             : static_cast<int>(window.size());
  est.r_tilde.resize(arity);
  for (std::size_t i = 0; i < arity; ++i) {
    const MeanStd s = population_stats(series[i]);
    est.r_tilde[i] = adjusted(s, s.mean, spec.k_sigma, opts.sign);
  }
  return est;
}

PenaltyEstimate estimate_penalties_signed(
    std::span<const std::vector<double>> signals,
    std::span<const int> timesteps, const ConstraintSpec& spec,
    std::optional<int> per_timestep_index, const EstimatorOptions& opts) {
  if (signals.size() != spec.arity())
    throw std::invalid_argument("channel arity mismatch");
  if (signals.empty() || signals[0].empty())
    throw std::invalid_argument("empty estimation window");

  PenaltyEstimate est;
  est.per_timestep = per_timestep_index.has_value();
  est.r_tilde.resize(spec.arity());
  for (std::size_t i = 0; i < spec.arity(); ++i) {
    if (signals[i].size() != timesteps.size())
      throw std::invalid_argument("channel arity mismatch");
    std::vector<double> selected;
    for (std::size_t k = 0; k < signals[i].size(); ++k) {
      if (per_timestep_index && timesteps[k] != *per_timestep_index) continue;
      selected.push_back(signals[i][k]);
    }
    if (selected.empty()) throw std::invalid_argument("empty estimation window");
    est.window_len = static_cast<int>(selected.size());
    const MeanStd s = population_stats(selected);
    est.r_tilde[i] = adjusted(s, std::abs(s.mean), spec.k_sigma, opts.sign);
  }
  return est;
}

}  // namespace gainlab
