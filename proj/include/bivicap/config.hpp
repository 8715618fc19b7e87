#pragma once

#include <map>
#include <string>

namespace bivicap {

/// Nested key-value config file (YAML with `#` comments), flattened to dotted
/// keys: `training: {batch_size: 64}` → "training.batch_size". Sequences are
/// exposed as comma-joined scalars.
class ConfigFile {
 public:
  ConfigFile() = default;
  static ConfigFile load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  long get_int(const std::string& key, long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// "lo,hi" sequences.
  std::pair<int, int> get_range(const std::string& key, std::pair<int, int> fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace bivicap
