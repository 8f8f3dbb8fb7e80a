#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace steal {

// Flat key=value run configuration. Every key has a registered default;
// unknown keys are rejected. Precedence: flag override > file > STEAL_SEED
// env (seed only) > default. A frozen snapshot is written before any work.
class RunConfig {
 public:
  RunConfig();

  void load_file(const std::filesystem::path& file);
  void set(const std::string& key, const std::string& value);  // flag override
  // "key=value" form used by --set flags.
  void set_kv(const std::string& assignment);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;  // comma-separated

  // Global seed with the documented precedence (explicit value, else
  // STEAL_SEED from the environment, else the registered default).
  std::uint64_t seed() const;

  // Full effective map (defaults merged with file and overrides), ordered.
  std::map<std::string, std::string> effective() const;

  void write_snapshot(const std::filesystem::path& file) const;

  static RunConfig from_snapshot(const std::filesystem::path& file);

 private:
  void check_known(const std::string& key) const;

  std::map<std::string, std::string> defaults_;
  std::map<std::string, std::string> values_;  // file + overrides
  bool seed_explicit_ = false;
};

}  // namespace steal
