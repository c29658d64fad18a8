#include "gainlab/analysis/trial_log.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gainlab {

double row_combined_reward(const TrialRow& row) {
  double r = row.lambda0 * row.primary;
  for (std::size_t i = 0; i < row.lambda.size(); ++i)
    r -= row.lambda[i] * row.penalties[i];
  return r;
}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string trial_log_to_csv(const TrialLog& log) {
  std::string out;
  out += "# config_hash=" + log.header.config_hash +
         " seed=" + std::to_string(log.header.seed) + "\n";
  out += "episode,t";
  for (const auto& n : log.header.state_names) out += "," + n;
  out += ",primary";
  for (const auto& n : log.header.penalty_names) out += "," + n;
  out += ",lambda0";
  for (std::size_t i = 0; i < log.header.penalty_names.size(); ++i)
    out += ",lambda" + std::to_string(i + 1);
  out += ",delta\n";

  for (const TrialRow& r : log.rows) {
    out += std::to_string(r.episode) + "," + std::to_string(r.t);
    for (double v : r.state) out += "," + format_double(v);
    out += "," + format_double(r.primary);
    for (double v : r.penalties) out += "," + format_double(v);
    out += "," + format_double(r.lambda0);
    for (double v : r.lambda) out += "," + format_double(v);
    out += "," + format_double(r.delta_t) + "\n";
  }
  return out;
}

std::string trial_log_to_jsonl(const TrialLog& log) {
  nlohmann::json head;
  head["config_hash"] = log.header.config_hash;
  head["seed"] = log.header.seed;
  head["state"] = log.header.state_names;
  head["penalties"] = log.header.penalty_names;
  std::string out = head.dump() + "\n";
  for (const TrialRow& r : log.rows) {
    nlohmann::json j;
    j["episode"] = r.episode;
    j["t"] = r.t;
    j["state"] = r.state;
    j["primary"] = r.primary;
    j["penalties"] = r.penalties;
    j["lambda0"] = r.lambda0;
    j["lambda"] = r.lambda;
    j["delta"] = r.delta_t;
    out += j.dump() + "\n";
  }
  return out;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{})
    throw std::runtime_error("log parse: bad number '" + s + "'");
  return v;
}

}  // namespace

TrialLog trial_log_from_csv(std::istream& in) {
  TrialLog log;
  std::string line;
  // comment header lines carry config hash and seed
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] != '#') break;
    std::istringstream ls(line.substr(1));
    std::string tok;
    while (ls >> tok) {
      const auto eq = tok.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = tok.substr(0, eq);
      const std::string val = tok.substr(eq + 1);
      if (key == "config_hash") log.header.config_hash = val;
      if (key == "seed") {
        try {
          log.header.seed = std::stoull(val);
        } catch (const std::exception&) {
          throw std::runtime_error("log parse: bad seed '" + val + "'");
        }
      }
    }
  }
  if (line.empty()) throw std::runtime_error("log parse: missing header row");

  const std::vector<std::string> cols = split_csv(line);
  std::size_t i_primary = 0, i_lambda0 = 0, i_delta = 0;
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (cols[i] == "primary") i_primary = i;
    if (cols[i] == "lambda0") i_lambda0 = i;
    if (cols[i] == "delta") i_delta = i;
  }
  if (i_primary == 0 || i_lambda0 == 0 || i_delta + 1 != cols.size())
    throw std::runtime_error("log parse: unexpected column layout");

  log.header.state_names.assign(cols.begin() + 2, cols.begin() + i_primary);
  log.header.penalty_names.assign(cols.begin() + i_primary + 1,
                                  cols.begin() + i_lambda0);
  const std::size_t arity = log.header.penalty_names.size();
  if (i_lambda0 + arity + 1 != i_delta)
    throw std::runtime_error("log parse: lambda column count mismatch");

  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != cols.size())
      throw std::runtime_error("log parse: row width mismatch");
    TrialRow r;
    r.episode = static_cast<int>(parse_double(f[0]));
    r.t = static_cast<int>(parse_double(f[1]));
    for (std::size_t i = 2; i < i_primary; ++i)
      r.state.push_back(parse_double(f[i]));
    r.primary = parse_double(f[i_primary]);
    for (std::size_t i = i_primary + 1; i < i_lambda0; ++i)
      r.penalties.push_back(parse_double(f[i]));
    r.lambda0 = parse_double(f[i_lambda0]);
    for (std::size_t i = i_lambda0 + 1; i < i_delta; ++i)
      r.lambda.push_back(parse_double(f[i]));
    r.delta_t = parse_double(f[i_delta]);
    log.rows.push_back(std::move(r));
  }
  return log;
}

TrialLog trial_log_from_jsonl(std::istream& in) {
  TrialLog log;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const nlohmann::json j = nlohmann::json::parse(line);
    if (!have_header) {
      log.header.config_hash = j.at("config_hash").get<std::string>();
      log.header.seed = j.at("seed").get<std::uint64_t>();
      log.header.state_names = j.at("state").get<std::vector<std::string>>();
      log.header.penalty_names =
          j.at("penalties").get<std::vector<std::string>>();
      have_header = true;
      continue;
    }
    TrialRow r;
    r.episode = j.at("episode").get<int>();
    r.t = j.at("t").get<int>();
    r.state = j.at("state").get<std::vector<double>>();
    r.primary = j.at("primary").get<double>();
    r.penalties = j.at("penalties").get<std::vector<double>>();
    r.lambda0 = j.at("lambda0").get<double>();
    r.lambda = j.at("lambda").get<std::vector<double>>();
    r.delta_t = j.at("delta").get<double>();
    log.rows.push_back(std::move(r));
  }
  if (!have_header) throw std::runtime_error("log parse: missing jsonl header");
  return log;
}

namespace {

// rows must be strictly ordered by (episode, t)
void require_ordered(const TrialLog& log) {
  for (std::size_t i = 1; i < log.rows.size(); ++i) {
    const TrialRow& a = log.rows[i - 1];
    const TrialRow& b = log.rows[i];
    if (b.episode < a.episode || (b.episode == a.episode && b.t <= a.t))
      throw std::runtime_error("log parse: rows out of (episode, t) order");
  }
}

}  // namespace

void write_trial_log(const TrialLog& log, const std::string& path,
                     LogFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open log file: " + path);
  out << (format == LogFormat::Csv ? trial_log_to_csv(log)
                                   : trial_log_to_jsonl(log));
}

TrialLog load_trial_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open log file: " + path);
  TrialLog log;
  if (path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl")
    log = trial_log_from_jsonl(in);
  else
    log = trial_log_from_csv(in);
  require_ordered(log);
  return log;
}

}  // namespace gainlab
