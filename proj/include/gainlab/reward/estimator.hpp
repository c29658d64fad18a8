#pragma once

#include <optional>
#include <span>

#include "gainlab/reward/types.hpp"

namespace gainlab {

// Windowed statistical penalty estimate:
//   r_tilde[i] = max(0, mean_i +/- k_sigma * std_i)
// over the selected samples (population std). When per_timestep_index
// is given, only samples whose within-episode timestep matches it are
// used, so the estimate tracks a specific phase across stored episodes.
PenaltyEstimate estimate_penalties(std::span<const ChannelSample> window,
                                   const ConstraintSpec& spec,
                                   std::optional<int> per_timestep_index = {},
                                   const EstimatorOptions& opts = {});

// SignedStat variant for signed source signals (e.g. a roll angle whose
// penalty is its magnitude): statistics are taken on the signed series
// and the magnitude of the mean enters the estimate. signals is one
// series per constraint, aligned with the window.
PenaltyEstimate estimate_penalties_signed(
    std::span<const std::vector<double>> signals,
    std::span<const int> timesteps, const ConstraintSpec& spec,
    std::optional<int> per_timestep_index = {},
    const EstimatorOptions& opts = {});

}  // namespace gainlab
