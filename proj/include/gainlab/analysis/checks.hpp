#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "gainlab/analysis/trial_log.hpp"
#include "gainlab/reward/adapters.hpp"

namespace gainlab {

struct SurfacePoint {
  double r1 = 0.0;  // r_tilde_1 / tau_1
  double r2 = 0.0;
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

// Evaluates the simplex gains on a resolution x resolution grid of
// normalized estimates over [0, 1]^2 (adaptation-surface data).
std::vector<SurfacePoint> surface_grid(int resolution,
                                       const ConstraintSpec& spec);
std::string surface_to_csv(const std::vector<SurfacePoint>& grid);

// Max |combine_reward(simplex gains) - (R0 - R0 R1^2 - R1^3)| over the
// grid; the single-constraint combination collapses to this closed form.
double check_reward_identity(std::pair<double, double> r0_range,
                             std::pair<double, double> r1_range,
                             int resolution);

struct InequalityReport {
  double violation_fraction = 0.0;
  int checkpoints = 0;
  double initial = 0.0;  // first checkpoint's window-mean primary reward
  // per checkpoint: episode, window-mean primary, window-mean penalty[0]
  std::vector<std::array<double, 3>> trajectory;
};

// Flags checkpoints where the cumulative change of the window-mean
// primary reward fails to clear its initial value minus epsilon.
InequalityReport check_learning_inequality(const TrialLog& log, double epsilon,
                                           int window);

struct LyapunovReport {
  int events = 0;
  double mean_change = 0.0;
  double upper_bound_95 = 0.0;  // one-sided 95% bound on the mean
  bool sufficient = false;      // >= min_events near-boundary events
};

// One-update-ahead changes of the window-mean penalty at near-boundary
// events (estimate >= band * tau); the raw samples behind the monitor.
std::vector<double> lyapunov_boundary_changes(const TrialLog& log,
                                              const ConstraintSpec& spec,
                                              const EstimatorOptions& opts,
                                              int window, double band = 0.95,
                                              std::size_t constraint = 0);

// Summarises the changes into the mean and its one-sided 95% bound.
LyapunovReport lyapunov_summary(const std::vector<double>& changes,
                                int min_events = 100);

// Expected one-update-ahead change of the window-mean penalty over
// near-boundary events (estimate >= band * tau). A statistical monitor:
// the stability claim concerns the mean, not every event.
LyapunovReport check_lyapunov_boundary(const TrialLog& log,
                                       const ConstraintSpec& spec,
                                       const EstimatorOptions& opts,
                                       int window, double band = 0.95,
                                       std::size_t constraint = 0,
                                       int min_events = 100);

}  // namespace gainlab
