#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gainlab {

// One timestep of reward data: the scalar task reward plus one
// non-negative penalty magnitude per constraint.
struct ChannelSample {
  double primary = 0.0;
  std::vector<double> penalties;
  int t = 0;  // within-episode timestep index
};

// Per-constraint thresholds tau, baseline tolerances delta (< tau) and
// the confidence multiplier used by the penalty estimator.
struct ConstraintSpec {
  std::vector<double> tau;
  std::vector<double> delta;
  double k_sigma = 3.0;
  std::vector<std::string> names;

  std::size_t arity() const { return tau.size(); }

  void validate() const {
    if (delta.size() != tau.size())
      throw std::invalid_argument("constraints: delta/tau arity mismatch");
    for (std::size_t i = 0; i < tau.size(); ++i) {
      if (!(tau[i] > 0.0))
        throw std::invalid_argument("constraints: tau must be > 0 (index " +
                                    std::to_string(i) + ")");
      if (delta[i] < 0.0 || delta[i] >= tau[i])
        throw std::invalid_argument(
            "constraints: delta must lie in [0, tau) (index " +
            std::to_string(i) + ")");
    }
    if (k_sigma < 0.0)
      throw std::invalid_argument("constraints: k_sigma must be >= 0");
  }
};

// Confidence-adjusted windowed penalty statistics, clamped at zero.
struct PenaltyEstimate {
  std::vector<double> r_tilde;
  int window_len = 0;
  bool per_timestep = false;
};

enum class EstimatorSign { Plus, Minus };
enum class EstimatorBase { AbsStat, SignedStat };

struct EstimatorOptions {
  // The printed rule subtracts the deviation term; the safety-oriented
  // default adds it so the estimate is an upper confidence bound.
  EstimatorSign sign = EstimatorSign::Plus;
  // AbsStat: statistics of the stored penalty magnitudes.
  // SignedStat: statistics of a signed source signal, |mean| used.
  EstimatorBase base = EstimatorBase::AbsStat;
  bool per_timestep = true;
};

// Weighting gains combining the primary channel and the penalties.
// Adapters that do not normalise leave delta_t and ratios at 0.
struct GainVector {
  double lambda0 = 1.0;
  std::vector<double> lambda;
  double delta_t = 0.0;
  std::vector<double> ratios;
};

enum class AdapterKind {
  PrimaryOnly,
  FixedPenalty,
  QuadCbf,
  LogCbf,
  Pdo,
  Crpo,
  OlAux,
  Simplex,  // proximity-weighted gains on the probability simplex
};

const char* adapter_kind_name(AdapterKind kind);
std::optional<AdapterKind> adapter_kind_from(const std::string& name);

// Persistent adapter data. fixed_gains for the fixed-weighting family,
// dual_lambda/eta_lambda for the multiplier-based baselines.
struct AdapterState {
  AdapterKind kind = AdapterKind::PrimaryOnly;
  std::optional<std::vector<double>> fixed_gains;
  std::optional<std::vector<double>> dual_lambda;
  std::optional<double> eta_lambda;

  void validate(std::size_t arity) const;
};

}  // namespace gainlab
