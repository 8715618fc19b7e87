#include "bivicap/config.hpp"

#include <stdexcept>

#include <yaml-cpp/yaml.h>

namespace bivicap {

namespace {

void flatten(const YAML::Node& node, const std::string& prefix,
             std::map<std::string, std::string>& out) {
  if (node.IsMap()) {
    for (const auto& kv : node) {
      const std::string key = kv.first.as<std::string>();
      flatten(kv.second, prefix.empty() ? key : prefix + "." + key, out);
    }
  } else if (node.IsSequence()) {
    std::string joined;
    for (const auto& item : node) {
      if (!joined.empty()) joined += ',';
      joined += item.as<std::string>();
    }
    out[prefix] = joined;
  } else if (node.IsScalar()) {
    out[prefix] = node.as<std::string>();
  } else if (node.IsNull()) {
    out[prefix] = "";
  }
}

}  // namespace

ConfigFile ConfigFile::load(const std::string& path) {
  ConfigFile cfg;
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::Exception& e) {
    throw std::runtime_error("config file " + path + ": " + e.what());
  }
  if (!root.IsNull() && !root.IsMap())
    throw std::runtime_error("config file " + path +
                             ": top level must be a key-value map");
  flatten(root, "", cfg.values_);
  return cfg;
}

std::string ConfigFile::get_string(const std::string& key,
                                   const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

long ConfigFile::get_int(const std::string& key, long fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const long v = std::stol(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing chars");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "': expected integer, got '" +
                             it->second + "'");
  }
}

double ConfigFile::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing chars");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key + "': expected number, got '" +
                             it->second + "'");
  }
}

bool ConfigFile::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw std::runtime_error("config key '" + key + "': expected boolean, got '" +
                           v + "'");
}

std::pair<int, int> ConfigFile::get_range(const std::string& key,
                                          std::pair<int, int> fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const auto comma = it->second.find(',');
  if (comma == std::string::npos)
    throw std::runtime_error("config key '" + key +
                             "': expected a [lo, hi] pair, got '" + it->second + "'");
  try {
    return {std::stoi(it->second.substr(0, comma)),
            std::stoi(it->second.substr(comma + 1))};
  } catch (const std::exception&) {
    throw std::runtime_error("config key '" + key +
                             "': expected a [lo, hi] pair, got '" + it->second + "'");
  }
}

}  // namespace bivicap
