#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gainlab/learner/loop.hpp"

namespace gainlab {

enum class LogFormat { Csv, Jsonl };

struct TrialLogHeader {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::string> state_names;
  std::vector<std::string> penalty_names;
};

// Per-timestep trial record; the substrate for all post-hoc analysis.
struct TrialLog {
  TrialLogHeader header;
  std::vector<TrialRow> rows;

  std::size_t arity() const { return header.penalty_names.size(); }
};

// Combined scalar reward implied by a logged row.
double row_combined_reward(const TrialRow& row);

// shortest round-tripping decimal form, locale-independent
std::string format_double(double v);

std::string trial_log_to_csv(const TrialLog& log);
std::string trial_log_to_jsonl(const TrialLog& log);
TrialLog trial_log_from_csv(std::istream& in);
TrialLog trial_log_from_jsonl(std::istream& in);

void write_trial_log(const TrialLog& log, const std::string& path,
                     LogFormat format);
TrialLog load_trial_log(const std::string& path);

}  // namespace gainlab
