#include "gainlab/harness/config.hpp"

#include <fstream>
#include <set>

namespace gainlab {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key()))
      throw ConfigError(where + ": unknown field '" + it.key() + "'");
  }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("field '" + key + "': wrong type");
  }
}

AdapterConfig adapter_from_json(const json& j) {
  require_keys(j, "adapter",
               {"kind", "fixed_gains", "eta_lambda", "dual_init", "label"});
  AdapterConfig a;
  const std::string kind = get_or<std::string>(j, "kind", "simplex");
  const auto parsed = adapter_kind_from(kind);
  if (!parsed) throw ConfigError("adapter.kind: unknown kind '" + kind + "'");
  a.kind = *parsed;
  a.fixed_gains = get_or<std::vector<double>>(j, "fixed_gains", {});
  a.eta_lambda = get_or<double>(j, "eta_lambda", 0.0);
  a.dual_init = get_or<std::vector<double>>(j, "dual_init", {});
  a.label = get_or<std::string>(j, "label", kind);
  return a;
}

json adapter_to_json(const AdapterConfig& a) {
  json j;
  j["kind"] = adapter_kind_name(a.kind);
  j["fixed_gains"] = a.fixed_gains;
  j["eta_lambda"] = a.eta_lambda;
  j["dual_init"] = a.dual_init;
  j["label"] = a.label;
  return j;
}

}  // namespace

AdapterState AdapterConfig::to_state(std::size_t arity) const {
  AdapterState st;
  st.kind = kind;
  const bool wants_fixed = kind == AdapterKind::FixedPenalty ||
                           kind == AdapterKind::QuadCbf ||
                           kind == AdapterKind::LogCbf;
  const bool wants_dual = kind == AdapterKind::Pdo || kind == AdapterKind::OlAux;
  if (wants_fixed) {
    if (fixed_gains.empty())
      throw ConfigError("adapter.fixed_gains: required for " +
                        std::string(adapter_kind_name(kind)));
    st.fixed_gains = fixed_gains;
  } else if (!fixed_gains.empty()) {
    throw ConfigError("adapter.fixed_gains: not used by " +
                      std::string(adapter_kind_name(kind)));
  }
  if (wants_dual) {
    if (!(eta_lambda > 0.0))
      throw ConfigError("adapter.eta_lambda: must be > 0 for " +
                        std::string(adapter_kind_name(kind)));
    st.eta_lambda = eta_lambda;
    st.dual_lambda = dual_init.empty() ? std::vector<double>(arity, 0.0)
                                       : dual_init;
  } else if (!dual_init.empty()) {
    throw ConfigError("adapter.dual_init: not used by " +
                      std::string(adapter_kind_name(kind)));
  } else if (eta_lambda != 0.0) {
    throw ConfigError("adapter.eta_lambda: not used by " +
                      std::string(adapter_kind_name(kind)));
  }
  try {
    st.validate(arity);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return st;
}

void ExperimentConfig::validate() const {
  try {
    if (env_kind == EnvKind::Landscape)
      landscape.validate();
    else
      cart.validate();
    learner.validate();
    constraint_spec().validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const std::size_t arity = make_env()->constraint_count();
  if (!delta.empty() && delta.size() != arity)
    throw ConfigError("constraints.delta: arity mismatch with environment");
  (void)adapter.to_state(arity);
  if (episodes < 0) throw ConfigError("episodes: must be >= 0");
  if (seeds.empty()) throw ConfigError("seeds: at least one seed required");
  const std::size_t dim = make_policy()->dim();
  if (!theta_init.empty() && theta_init.size() != dim)
    throw ConfigError("policy.theta_init: dimension mismatch");
  if (env_kind == EnvKind::CartTilt) {
    if (learner.timesteps_per_episode != cart.episode_len)
      throw ConfigError(
          "learner.timesteps_per_episode: must equal env.episode_len");
    if (drive_period < 2) throw ConfigError("policy.period: must be >= 2");
  }
}

std::unique_ptr<Env> ExperimentConfig::make_env() const {
  if (env_kind == EnvKind::Landscape)
    return std::make_unique<LandscapeEnv>(landscape);
  return std::make_unique<CartTiltEnv>(cart);
}

std::unique_ptr<Policy> ExperimentConfig::make_policy() const {
  if (env_kind == EnvKind::Landscape) return std::make_unique<PointPolicy>(2);
  return std::make_unique<RhythmicDrivePolicy>(drive_period);
}

ConstraintSpec ExperimentConfig::constraint_spec() const {
  ConstraintSpec spec;
  if (env_kind == EnvKind::Landscape) {
    spec.tau = {landscape.tau};
    spec.names = {"hazard"};
  } else {
    spec.tau = {cart.tau_tilt};
    spec.names = {"tilt"};
  }
  spec.delta = delta.empty() ? std::vector<double>(spec.tau.size(), 0.0) : delta;
  spec.k_sigma = k_sigma;
  return spec;
}

ExperimentConfig experiment_from_json(const nlohmann::json& j) {
  require_keys(j, "config",
               {"env", "constraints", "estimator", "adapter", "learner",
                "policy", "episodes", "seeds", "out_dir"});
  ExperimentConfig cfg;

  const json env = j.value("env", json::object());
  const std::string env_kind = get_or<std::string>(env, "kind", "landscape");
  if (env_kind == "landscape") {
    cfg.env_kind = EnvKind::Landscape;
    require_keys(env, "env",
                 {"kind", "reward_center", "reward_width", "hazard_onset",
                  "hazard_scale", "tau"});
    auto center = get_or<std::vector<double>>(
        env, "reward_center",
        {cfg.landscape.reward_center[0], cfg.landscape.reward_center[1]});
    if (center.size() != 2)
      throw ConfigError("env.reward_center: expected two coordinates");
    cfg.landscape.reward_center = {center[0], center[1]};
    cfg.landscape.reward_width =
        get_or<double>(env, "reward_width", cfg.landscape.reward_width);
    cfg.landscape.hazard_onset =
        get_or<double>(env, "hazard_onset", cfg.landscape.hazard_onset);
    cfg.landscape.hazard_scale =
        get_or<double>(env, "hazard_scale", cfg.landscape.hazard_scale);
    cfg.landscape.tau = get_or<double>(env, "tau", cfg.landscape.tau);
    // bandit: one evaluation per episode; exploration never collapses
    // below its initial scale so the hazard stays probed
    cfg.learner.timesteps_per_episode = 1;
    cfg.learner.return_horizon = 1;
    cfg.learner.eta_theta = 1e-4;
    cfg.learner.eta_sigma = 1e-5;
    cfg.learner.sigma_init = 0.1;
    cfg.learner.sigma_min = 0.1;
    cfg.learner.sigma_max = 0.15;
  } else if (env_kind == "cart_tilt") {
    cfg.env_kind = EnvKind::CartTilt;
    require_keys(env, "env",
                 {"kind", "m_cart", "m_pole", "half_length", "gravity", "dt",
                  "force_limit", "friction", "tau_tilt", "episode_len"});
    cfg.cart.m_cart = get_or<double>(env, "m_cart", cfg.cart.m_cart);
    cfg.cart.m_pole = get_or<double>(env, "m_pole", cfg.cart.m_pole);
    cfg.cart.half_length =
        get_or<double>(env, "half_length", cfg.cart.half_length);
    cfg.cart.gravity = get_or<double>(env, "gravity", cfg.cart.gravity);
    cfg.cart.dt = get_or<double>(env, "dt", cfg.cart.dt);
    cfg.cart.force_limit =
        get_or<double>(env, "force_limit", cfg.cart.force_limit);
    cfg.cart.friction = get_or<double>(env, "friction", cfg.cart.friction);
    cfg.cart.tau_tilt = get_or<double>(env, "tau_tilt", cfg.cart.tau_tilt);
    cfg.cart.episode_len = get_or<int>(env, "episode_len", cfg.cart.episode_len);
    cfg.learner.timesteps_per_episode = cfg.cart.episode_len;
    cfg.learner.return_horizon = std::min(20, cfg.cart.episode_len);
    cfg.learner.eta_theta = 2e-5;
    cfg.learner.eta_sigma = 2e-6;
    cfg.learner.sigma_init = 0.5;
    cfg.learner.sigma_min = 0.05;
    cfg.learner.sigma_max = 1.0;
    // tilt integrates the force history, so per-timestep gains leave the
    // low-tilt steps right after reset permanently in primary mode and
    // reward sprint-now-pay-later policies; the window-wide estimate
    // closes that loophole (per-timestep stays available via config)
    cfg.estimator.per_timestep = false;
  } else {
    throw ConfigError("env.kind: unknown environment '" + env_kind + "'");
  }

  const json cons = j.value("constraints", json::object());
  require_keys(cons, "constraints", {"delta", "k_sigma"});
  cfg.delta = get_or<std::vector<double>>(cons, "delta", {0.0});
  cfg.k_sigma = get_or<double>(cons, "k_sigma", 3.0);

  const json est = j.value("estimator", json::object());
  require_keys(est, "estimator", {"sign", "base", "per_timestep"});
  const std::string sign = get_or<std::string>(est, "sign", "plus");
  if (sign == "plus")
    cfg.estimator.sign = EstimatorSign::Plus;
  else if (sign == "minus")
    cfg.estimator.sign = EstimatorSign::Minus;
  else
    throw ConfigError("estimator.sign: must be 'plus' or 'minus'");
  const std::string base = get_or<std::string>(est, "base", "abs");
  if (base == "abs")
    cfg.estimator.base = EstimatorBase::AbsStat;
  else if (base == "signed")
    cfg.estimator.base = EstimatorBase::SignedStat;
  else
    throw ConfigError("estimator.base: must be 'abs' or 'signed'");
  cfg.estimator.per_timestep =
      get_or<bool>(est, "per_timestep", cfg.estimator.per_timestep);

  if (j.contains("adapter")) cfg.adapter = adapter_from_json(j.at("adapter"));
  if (cfg.adapter.label.empty())
    cfg.adapter.label = adapter_kind_name(cfg.adapter.kind);

  const json lrn = j.value("learner", json::object());
  require_keys(lrn, "learner",
               {"eta_theta", "eta_sigma", "episodes_per_window",
                "timesteps_per_episode", "return_horizon", "sigma_init",
                "sigma_min", "sigma_max", "step_clip"});
  cfg.learner.eta_theta = get_or<double>(lrn, "eta_theta", cfg.learner.eta_theta);
  cfg.learner.eta_sigma = get_or<double>(lrn, "eta_sigma", cfg.learner.eta_sigma);
  cfg.learner.episodes_per_window =
      get_or<int>(lrn, "episodes_per_window", cfg.learner.episodes_per_window);
  cfg.learner.timesteps_per_episode = get_or<int>(
      lrn, "timesteps_per_episode", cfg.learner.timesteps_per_episode);
  cfg.learner.return_horizon =
      get_or<int>(lrn, "return_horizon", cfg.learner.return_horizon);
  cfg.learner.sigma_init = get_or<double>(lrn, "sigma_init", cfg.learner.sigma_init);
  cfg.learner.sigma_min = get_or<double>(lrn, "sigma_min", cfg.learner.sigma_min);
  cfg.learner.sigma_max = get_or<double>(lrn, "sigma_max", cfg.learner.sigma_max);
  cfg.learner.step_clip = get_or<double>(lrn, "step_clip", cfg.learner.step_clip);

  const json pol = j.value("policy", json::object());
  require_keys(pol, "policy", {"theta_init", "period"});
  cfg.theta_init = get_or<std::vector<double>>(pol, "theta_init", {});
  cfg.drive_period = get_or<int>(pol, "period", 20);
  if (cfg.theta_init.empty()) {
    cfg.theta_init = cfg.env_kind == EnvKind::Landscape
                         ? std::vector<double>{0.1, 0.5}
                         : std::vector<double>{0.0, 0.0, 0.0};
  }

  cfg.episodes = get_or<int>(j, "episodes", 500);
  cfg.seeds = get_or<std::vector<std::uint64_t>>(
      j, "seeds", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  cfg.out_dir = get_or<std::string>(j, "out_dir", "out");

  cfg.validate();
  return cfg;
}

nlohmann::json experiment_to_json(const ExperimentConfig& cfg) {
  json j;
  if (cfg.env_kind == EnvKind::Landscape) {
    j["env"] = {{"kind", "landscape"},
                {"reward_center", {cfg.landscape.reward_center[0],
                                   cfg.landscape.reward_center[1]}},
                {"reward_width", cfg.landscape.reward_width},
                {"hazard_onset", cfg.landscape.hazard_onset},
                {"hazard_scale", cfg.landscape.hazard_scale},
                {"tau", cfg.landscape.tau}};
  } else {
    j["env"] = {{"kind", "cart_tilt"},       {"m_cart", cfg.cart.m_cart},
                {"m_pole", cfg.cart.m_pole}, {"half_length", cfg.cart.half_length},
                {"gravity", cfg.cart.gravity}, {"dt", cfg.cart.dt},
                {"force_limit", cfg.cart.force_limit},
                {"friction", cfg.cart.friction}, {"tau_tilt", cfg.cart.tau_tilt},
                {"episode_len", cfg.cart.episode_len}};
  }
  j["constraints"] = {{"delta", cfg.delta}, {"k_sigma", cfg.k_sigma}};
  j["estimator"] = {
      {"sign", cfg.estimator.sign == EstimatorSign::Plus ? "plus" : "minus"},
      {"base",
       cfg.estimator.base == EstimatorBase::AbsStat ? "abs" : "signed"},
      {"per_timestep", cfg.estimator.per_timestep}};
  j["adapter"] = adapter_to_json(cfg.adapter);
  j["learner"] = {{"eta_theta", cfg.learner.eta_theta},
                  {"eta_sigma", cfg.learner.eta_sigma},
                  {"episodes_per_window", cfg.learner.episodes_per_window},
                  {"timesteps_per_episode", cfg.learner.timesteps_per_episode},
                  {"return_horizon", cfg.learner.return_horizon},
                  {"sigma_init", cfg.learner.sigma_init},
                  {"sigma_min", cfg.learner.sigma_min},
                  {"sigma_max", cfg.learner.sigma_max},
                  {"step_clip", cfg.learner.step_clip}};
  j["policy"] = {{"theta_init", cfg.theta_init}, {"period", cfg.drive_period}};
  j["episodes"] = cfg.episodes;
  j["seeds"] = cfg.seeds;
  j["out_dir"] = cfg.out_dir;
  return j;
}

ExperimentConfig load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  return experiment_from_json(j);
}

std::string config_hash(const ExperimentConfig& cfg) {
  // hash identifies the experiment; where it runs and which seed list it
  // belongs to are execution details
  nlohmann::json j = experiment_to_json(cfg);
  j.erase("out_dir");
  j.erase("seeds");
  const std::string doc = j.dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : doc) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

CompareConfig compare_from_json(const nlohmann::json& j) {
  require_keys(j, "compare", {"base", "adapters"});
  if (!j.contains("base")) throw ConfigError("compare: 'base' required");
  if (!j.contains("adapters") || !j.at("adapters").is_array() ||
      j.at("adapters").size() < 2)
    throw ConfigError("compare: at least two adapters required");
  CompareConfig cc;
  const json base_doc = j.at("base");
  cc.base = experiment_from_json(base_doc);

  std::size_t idx = 0;
  for (const json& entry : j.at("adapters")) {
    const bool is_patch = entry.contains("adapter");
    const json adapter_block = is_patch ? entry.at("adapter") : entry;
    json doc = base_doc;
    if (is_patch) {
      json patch = entry;
      doc.merge_patch(patch);
    } else {
      doc["adapter"] = entry;
    }
    ExperimentConfig cfg = experiment_from_json(doc);
    if (!adapter_block.contains("label"))
      cfg.adapter.label = "a" + std::to_string(idx) + "_" +
                          adapter_kind_name(cfg.adapter.kind);
    // only the weighting side may vary across entries
    if (experiment_to_json(cfg)["env"] != experiment_to_json(cc.base)["env"])
      throw ConfigError("compare: entries must share the environment");
    if (cfg.seeds != cc.base.seeds)
      throw ConfigError("compare: entries must share the seeds");
    cc.adapters.push_back(cfg.adapter);
    cc.entries.push_back(std::move(cfg));
    ++idx;
  }
  return cc;
}

CompareConfig load_compare(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  return compare_from_json(j);
}

int SweepConfig::cell_count() const {
  int n = 1;
  for (const SweepAxis& a : axes) n *= static_cast<int>(a.values.size());
  return n;
}

ExperimentConfig SweepConfig::cell(const std::vector<std::size_t>& idx) const {
  nlohmann::json doc = base_doc;
  for (std::size_t a = 0; a < axes.size(); ++a) {
    try {
      doc[nlohmann::json::json_pointer(axes[a].path)] = axes[a].values[idx[a]];
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("sweep axis '" + axes[a].path + "': " + e.what());
    }
  }
  return experiment_from_json(doc);
}

SweepConfig sweep_from_json(const nlohmann::json& j) {
  require_keys(j, "sweep", {"base", "axes", "repetitions", "budget"});
  if (!j.contains("base")) throw ConfigError("sweep: 'base' required");
  SweepConfig sc;
  sc.base_doc = j.at("base");
  (void)experiment_from_json(sc.base_doc);  // validate the base early
  for (const nlohmann::json& a : j.value("axes", nlohmann::json::array())) {
    require_keys(a, "sweep.axes[]", {"path", "values"});
    SweepAxis axis;
    axis.path = get_or<std::string>(a, "path", "");
    if (axis.path.empty() || axis.path[0] != '/')
      throw ConfigError("sweep.axes[].path: expected a JSON pointer");
    if (!a.contains("values") || !a.at("values").is_array() ||
        a.at("values").empty())
      throw ConfigError("sweep.axes[].values: non-empty array required");
    for (const nlohmann::json& v : a.at("values")) axis.values.push_back(v);
    sc.axes.push_back(std::move(axis));
  }
  sc.repetitions = get_or<int>(j, "repetitions", 10);
  if (sc.repetitions < 1) throw ConfigError("sweep.repetitions: must be >= 1");
  sc.budget = get_or<int>(j, "budget", 1000);
  if (sc.cell_count() * sc.repetitions > sc.budget)
    throw ConfigError("sweep: cell count x repetitions exceeds budget");
  return sc;
}

SweepConfig load_sweep(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config parse error: " + std::string(e.what()));
  }
  return sweep_from_json(j);
}

}  // namespace gainlab
