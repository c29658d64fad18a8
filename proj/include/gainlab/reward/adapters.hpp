#pragma once

#include <span>
#include <utility>

#include "gainlab/reward/types.hpp"

namespace gainlab {

// Proximity-weighted gains on the probability simplex. With
// S = sum_j (r_tilde[j]/tau[j])^2:
//   delta_t  = min(S, 1)
//   lambda0  = 1 - delta_t
//   ratios_i = (r_tilde[i]/tau[i])^2 / S   (uniform when S = 0)
//   lambda_i = ratios_i * delta_t
// so lambda0 + sum lambda_i = 1 and, while S <= 1, each penalty gain is
// exactly its own squared proximity ratio.
GainVector simplex_gains(const PenaltyEstimate& est, const ConstraintSpec& spec);

// Fixed-weighting baseline: lambda0 = 1, penalty gains as configured.
GainVector fixed_gains(const AdapterState& state);

// Barrier transforms applied to a penalty magnitude before weighting.
// QuadCbf:  max(0, x^2 - (tau-delta)^2)
// LogCbf:   ln(x/(tau-delta))^2 beyond the margin, 0 inside it
double cbf_transform(double x_tilde, double tau_i, double delta_i,
                     AdapterKind kind);

// Dual gradient ascent on the penalty multipliers:
//   lambda_i <- max(0, lambda_i + eta * (r_tilde_i - (tau_i - delta_i)))
std::pair<AdapterState, GainVector> pdo_update(const AdapterState& state,
                                               const PenaltyEstimate& est,
                                               const ConstraintSpec& spec);

// Hard reward switching: all weight on the primary channel while every
// estimate is inside tolerance, otherwise all weight on the single
// most-violated constraint (largest r_tilde/tau, lowest index on ties).
GainVector crpo_gains(const PenaltyEstimate& est, const ConstraintSpec& spec);

// Gradient-alignment multiplier update:
//   lambda_i <- max(0, lambda_i + eta * <grad_primary, grad_penalty_i>)
std::pair<AdapterState, GainVector> olaux_update(
    const AdapterState& state, std::span<const double> grad_primary,
    std::span<const std::vector<double>> grad_penalty);

// R = lambda0 * primary - sum_i lambda_i * penalty_i
double combine_reward(const ChannelSample& sample, const GainVector& gains);

// Same combination applied to advantage scores (primary first).
double combine_advantages(std::span<const double> advantages,
                          const GainVector& gains);

}  // namespace gainlab
