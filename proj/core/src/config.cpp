#include "steal/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "steal/errors.hpp"

namespace steal {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig::RunConfig() {
  // Dataset ingestion. height/width of -1 mean "use the model preset's".
  defaults_["data.root"] = "";
  defaults_["data.height"] = "-1";
  defaults_["data.width"] = "-1";
  defaults_["data.cache_mb"] = "2048";

  // Pseudo-anomaly synthesizer.
  defaults_["synth.skip_set"] = "2,3,4,5";
  defaults_["synth.p"] = "0.01";

  // Model.
  defaults_["model.preset"] = "desk";

  // Training.
  defaults_["train.lr"] = "1e-4";
  defaults_["train.batch_size"] = "4";
  defaults_["train.steps"] = "2000";
  defaults_["train.checkpoint_every"] = "1000";
  // Margin clamp on the pseudo branch, max(-L_N, -margin); 0 disables it
  // (the default training objective leaves the pseudo loss unbounded).
  defaults_["train.pseudo_loss_margin"] = "0";
  defaults_["train.adam_beta1"] = "0.9";
  defaults_["train.adam_beta2"] = "0.999";
  defaults_["train.adam_eps"] = "1e-8";

  // Scoring. offset of -1 means "middle of the window", e.g. the 9th frame
  // of a 16-frame input.
  defaults_["score.offset"] = "-1";
  defaults_["score.peak"] = "1.0";
  defaults_["score.eps"] = "1e-10";

  // Synthetic benchmark generator.
  defaults_["bench.frame_size"] = "64";
  defaults_["bench.sprites_min"] = "1";
  defaults_["bench.sprites_max"] = "3";
  defaults_["bench.speed"] = "1";
  defaults_["bench.anomaly_multiplier"] = "4";
  defaults_["bench.train_videos"] = "10";
  defaults_["bench.test_videos"] = "6";
  defaults_["bench.frames_per_video"] = "512";
  defaults_["bench.anomaly_len"] = "96";

  defaults_["seed"] = "1";
  defaults_["threads"] = "0";  // 0 = hardware concurrency
}

void RunConfig::check_known(const std::string& key) const {
  if (defaults_.find(key) == defaults_.end()) {
    throw DataError("unknown config key: '" + key + "'");
  }
}

void RunConfig::load_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw DataError("cannot open config file: " + file.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("config parse error at " + file.string() + ":" +
                      std::to_string(lineno) + ": expected key = value");
    }
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  check_known(key);
  values_[key] = value;
  if (key == "seed") seed_explicit_ = true;
}

void RunConfig::set_kv(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw DataError("bad --set value '" + assignment + "', expected key=value");
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

bool RunConfig::has(const std::string& key) const {
  check_known(key);
  return values_.find(key) != values_.end();
}

std::string RunConfig::get_string(const std::string& key) const {
  check_known(key);
  const auto it = values_.find(key);
  return it != values_.end() ? it->second : defaults_.at(key);
}

std::int64_t RunConfig::get_int(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    std::size_t pos = 0;
    const std::int64_t r = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw DataError("config key '" + key + "' is not an integer: '" + v + "'");
  }
}

double RunConfig::get_double(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    std::size_t pos = 0;
    const double r = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return r;
  } catch (const std::exception&) {
    throw DataError("config key '" + key + "' is not a number: '" + v + "'");
  }
}

bool RunConfig::get_bool(const std::string& key) const {
  std::string v = get_string(key);
  std::transform(v.begin(), v.end(), v.begin(), ::tolower);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw DataError("config key '" + key + "' is not a boolean: '" + v + "'");
}

std::vector<int> RunConfig::get_int_list(const std::string& key) const {
  const std::string v = get_string(key);
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    try {
      std::size_t pos = 0;
      out.push_back(std::stoi(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw DataError("config key '" + key + "' has a non-integer entry: '" + item + "'");
    }
  }
  return out;
}

std::uint64_t RunConfig::seed() const {
  if (!seed_explicit_) {
    if (const char* env = std::getenv("STEAL_SEED")) {
      try {
        return static_cast<std::uint64_t>(std::stoull(env));
      } catch (const std::exception&) {
        throw DataError(std::string("STEAL_SEED is not an integer: '") + env + "'");
      }
    }
  }
  return static_cast<std::uint64_t>(get_int("seed"));
}

std::map<std::string, std::string> RunConfig::effective() const {
  std::map<std::string, std::string> out = defaults_;
  for (const auto& [k, v] : values_) out[k] = v;
  out["seed"] = std::to_string(seed());
  return out;
}

void RunConfig::write_snapshot(const std::filesystem::path& file) const {
  std::ofstream out(file);
  if (!out) throw DataError("cannot write config snapshot: " + file.string());
  for (const auto& [k, v] : effective()) out << k << " = " << v << "\n";
}

RunConfig RunConfig::from_snapshot(const std::filesystem::path& file) {
  RunConfig cfg;
  cfg.load_file(file);
  return cfg;
}

}  // namespace steal
