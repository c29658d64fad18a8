#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gainlab/env/cart_tilt.hpp"
#include "gainlab/env/env.hpp"
#include "gainlab/env/landscape.hpp"
#include "gainlab/learner/loop.hpp"

namespace gainlab {

// invalid configuration: maps to exit code 2 at the CLI
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EnvKind { Landscape, CartTilt };

struct AdapterConfig {
  AdapterKind kind = AdapterKind::Simplex;
  std::vector<double> fixed_gains;  // fixed-weighting family
  double eta_lambda = 0.0;          // pdo / olaux
  std::vector<double> dual_init;    // pdo / olaux
  std::string label;                // defaults to the kind name

  AdapterState to_state(std::size_t arity) const;
};

struct ExperimentConfig {
  EnvKind env_kind = EnvKind::Landscape;
  LandscapeConfig landscape;
  CartTiltConfig cart;

  std::vector<double> delta;  // per-constraint tolerance, defaults to 0
  double k_sigma = 3.0;

  EstimatorOptions estimator;
  AdapterConfig adapter;
  LearnerConfig learner;

  std::vector<double> theta_init;
  int drive_period = 20;

  int episodes = 500;
  std::vector<std::uint64_t> seeds;
  std::string out_dir = "out";

  void validate() const;
  std::unique_ptr<Env> make_env() const;
  std::unique_ptr<Policy> make_policy() const;
  ConstraintSpec constraint_spec() const;
};

ExperimentConfig experiment_from_json(const nlohmann::json& j);
nlohmann::json experiment_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_experiment(const std::string& path);

// FNV-1a of the canonical (normalized, key-sorted) document
std::string config_hash(const ExperimentConfig& cfg);

// Comparison entries share the base's environment and seeds. An entry is
// either a bare adapter block or a patch document ({"adapter": ..., plus
// optional constraints/estimator/learner/policy overrides}).
struct CompareConfig {
  ExperimentConfig base;
  std::vector<ExperimentConfig> entries;

  std::vector<AdapterConfig> adapters;  // convenience view of entries
};

CompareConfig compare_from_json(const nlohmann::json& j);
CompareConfig load_compare(const std::string& path);

struct SweepAxis {
  std::string path;  // JSON pointer into the experiment document
  std::vector<nlohmann::json> values;
};

struct SweepConfig {
  nlohmann::json base_doc;
  std::vector<SweepAxis> axes;
  int repetitions = 10;
  int budget = 1000;

  int cell_count() const;
  // experiment for one grid cell (axis value indices)
  ExperimentConfig cell(const std::vector<std::size_t>& idx) const;
};

SweepConfig sweep_from_json(const nlohmann::json& j);
SweepConfig load_sweep(const std::string& path);

}  // namespace gainlab
