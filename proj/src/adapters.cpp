#include "gainlab/reward/adapters.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gainlab {

const char* adapter_kind_name(AdapterKind kind) {
  switch (kind) {
    case AdapterKind::PrimaryOnly: return "primary_only";
    case AdapterKind::FixedPenalty: return "fixed_penalty";
    case AdapterKind::QuadCbf: return "quad_cbf";
    case AdapterKind::LogCbf: return "log_cbf";
    case AdapterKind::Pdo: return "pdo";
    case AdapterKind::Crpo: return "crpo";
    case AdapterKind::OlAux: return "olaux";
    case AdapterKind::Simplex: return "simplex";
  }
  return "unknown";
}

std::optional<AdapterKind> adapter_kind_from(const std::string& name) {
  for (AdapterKind k :
       {AdapterKind::PrimaryOnly, AdapterKind::FixedPenalty,
        AdapterKind::QuadCbf, AdapterKind::LogCbf, AdapterKind::Pdo,
        AdapterKind::Crpo, AdapterKind::OlAux, AdapterKind::Simplex}) {
    if (name == adapter_kind_name(k)) return k;
  }
  return std::nullopt;
}

void AdapterState::validate(std::size_t arity) const {
  const bool wants_fixed = kind == AdapterKind::FixedPenalty ||
                           kind == AdapterKind::QuadCbf ||
                           kind == AdapterKind::LogCbf;
  const bool wants_dual = kind == AdapterKind::Pdo || kind == AdapterKind::OlAux;
  if (wants_fixed) {
    if (!fixed_gains)
      throw std::invalid_argument(std::string("adapter ") +
                                  adapter_kind_name(kind) +
                                  ": fixed_gains required");
    if (fixed_gains->size() != arity)
      throw std::invalid_argument("adapter: fixed_gains arity mismatch");
  } else if (fixed_gains) {
    throw std::invalid_argument("adapter: fixed_gains only valid for the "
                                "fixed-weighting family");
  }
  if (wants_dual) {
    if (!eta_lambda || !(*eta_lambda > 0.0))
      throw std::invalid_argument(std::string("adapter ") +
                                  adapter_kind_name(kind) +
                                  ": eta_lambda must be > 0");
    if (dual_lambda) {
      if (dual_lambda->size() != arity)
        throw std::invalid_argument("adapter: dual_lambda arity mismatch");
      for (double v : *dual_lambda)
        if (v < 0.0)
          throw std::invalid_argument("adapter: dual_lambda must be >= 0");
    }
  } else if (dual_lambda) {
    throw std::invalid_argument(
        "adapter: dual_lambda only valid for pdo/olaux");
  }
}

GainVector simplex_gains(const PenaltyEstimate& est,
                         const ConstraintSpec& spec) {
  const std::size_t n = spec.arity();
  if (est.r_tilde.size() != n)
    throw std::invalid_argument("channel arity mismatch");

  std::vector<double> sq(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = est.r_tilde[i] / spec.tau[i];
    sq[i] = r * r;
    s += sq[i];
  }

  GainVector g;
  g.delta_t = std::min(s, 1.0);
  g.lambda0 = 1.0 - g.delta_t;
  g.ratios.resize(n);
  g.lambda.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.ratios[i] = s > 0.0 ? sq[i] / s : 1.0 / static_cast<double>(n);
    g.lambda[i] = g.ratios[i] * g.delta_t;
  }
  return g;
}

GainVector fixed_gains(const AdapterState& state) {
  if (!state.fixed_gains)
    throw std::invalid_argument("adapter: fixed_gains required");
  GainVector g;
  g.lambda0 = 1.0;
  g.lambda = *state.fixed_gains;
  g.ratios.assign(g.lambda.size(), 0.0);
  return g;
}

double cbf_transform(double x_tilde, double tau_i, double delta_i,
                     AdapterKind kind) {
  const double margin = tau_i - delta_i;
  if (!(margin > 0.0))
    throw std::invalid_argument("cbf: tau must exceed delta");
  if (kind == AdapterKind::QuadCbf)
    return std::max(0.0, x_tilde * x_tilde - margin * margin);
  if (kind == AdapterKind::LogCbf) {
    // the log term only activates beyond the margin; inside it (and at
    // x = 0) the barrier is gated off
    if (x_tilde <= margin) return 0.0;
    const double l = std::log(x_tilde / margin);
    return l * l;
  }
  throw std::invalid_argument("cbf: kind must be quad_cbf or log_cbf");
}

std::pair<AdapterState, GainVector> pdo_update(const AdapterState& state,
                                               const PenaltyEstimate& est,
                                               const ConstraintSpec& spec) {
  if (state.kind != AdapterKind::Pdo)
    throw std::invalid_argument("pdo_update: wrong adapter kind");
  if (!state.eta_lambda)
    throw std::invalid_argument("adapter pdo: eta_lambda must be > 0");
  const std::size_t n = spec.arity();
  if (est.r_tilde.size() != n)
    throw std::invalid_argument("channel arity mismatch");

  AdapterState next = state;
  if (!next.dual_lambda) next.dual_lambda = std::vector<double>(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double margin = spec.tau[i] - spec.delta[i];
    double v = (*next.dual_lambda)[i] +
               *state.eta_lambda * (est.r_tilde[i] - margin);
    (*next.dual_lambda)[i] = std::max(0.0, v);
  }

  GainVector g;
  g.lambda0 = 1.0;
  g.lambda = *next.dual_lambda;
  g.ratios.assign(n, 0.0);
  return {std::move(next), std::move(g)};
}

GainVector crpo_gains(const PenaltyEstimate& est, const ConstraintSpec& spec) {
  const std::size_t n = spec.arity();
  if (est.r_tilde.size() != n)
    throw std::invalid_argument("channel arity mismatch");

  GainVector g;
  g.lambda.assign(n, 0.0);
  g.ratios.assign(n, 0.0);

  // pick the most-violated constraint by proximity ratio, if any
  int worst = -1;
  double worst_ratio = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (est.r_tilde[i] > spec.tau[i] - spec.delta[i]) {
      const double ratio = est.r_tilde[i] / spec.tau[i];
      if (ratio > worst_ratio) {
        worst_ratio = ratio;
        worst = static_cast<int>(i);
      }
    }
  }
  if (worst < 0) {
    g.lambda0 = 1.0;
  } else {
    g.lambda0 = 0.0;
    g.lambda[static_cast<std::size_t>(worst)] = 1.0;
  }
  return g;
}

std::pair<AdapterState, GainVector> olaux_update(
    const AdapterState& state, std::span<const double> grad_primary,
    std::span<const std::vector<double>> grad_penalty) {
  if (state.kind != AdapterKind::OlAux)
    throw std::invalid_argument("olaux_update: wrong adapter kind");
  if (!state.eta_lambda)
    throw std::invalid_argument("adapter olaux: eta_lambda must be > 0");

  AdapterState next = state;
  const std::size_t n = grad_penalty.size();
  if (!next.dual_lambda) next.dual_lambda = std::vector<double>(n, 0.0);
  if (next.dual_lambda->size() != n)
    throw std::invalid_argument("channel arity mismatch");

  for (std::size_t i = 0; i < n; ++i) {
    if (grad_penalty[i].size() != grad_primary.size())
      throw std::invalid_argument("olaux: gradient dimension mismatch");
    double dot = 0.0;
    for (std::size_t k = 0; k < grad_primary.size(); ++k)
      dot += grad_primary[k] * grad_penalty[i][k];
    double v = (*next.dual_lambda)[i] + *state.eta_lambda * dot;
    (*next.dual_lambda)[i] = std::max(0.0, v);
  }

  GainVector g;
  g.lambda0 = 1.0;
  g.lambda = *next.dual_lambda;
  g.ratios.assign(n, 0.0);
  return {std::move(next), std::move(g)};
}

double combine_reward(const ChannelSample& sample, const GainVector& gains) {
  if (sample.penalties.size() != gains.lambda.size())
    throw std::invalid_argument("channel arity mismatch");
  double r = gains.lambda0 * sample.primary;
  for (std::size_t i = 0; i < gains.lambda.size(); ++i)
    r -= gains.lambda[i] * sample.penalties[i];
  return r;
}

double combine_advantages(std::span<const double> advantages,
                          const GainVector& gains) {
  if (advantages.size() != gains.lambda.size() + 1)
    throw std::invalid_argument("channel arity mismatch");
  double a = gains.lambda0 * advantages[0];
  for (std::size_t i = 0; i < gains.lambda.size(); ++i)
    a -= gains.lambda[i] * advantages[i + 1];
  return a;
}

}  // namespace gainlab
