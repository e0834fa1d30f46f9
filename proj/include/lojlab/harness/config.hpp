#pragma once

// Flat "key = value" run configs with # comments.

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "lojlab/rescaled_mcf.hpp"

namespace lojlab::harness {

class KeyValueConfig {
 public:
  /// Throws UsageError on malformed lines or duplicate keys.
  static KeyValueConfig parse(const std::string& text, const std::string& origin = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  /// Comma-separated list of numbers.
  std::vector<double> get_list(const std::string& key) const;

  /// Throws UsageError naming the first key outside `known`.
  void require_known(const std::set<std::string>& known) const;

  const std::map<std::string, std::string>& entries() const noexcept { return values_; }
  const std::string& origin() const noexcept { return origin_; }

 private:
  std::map<std::string, std::string> values_;
  std::string origin_;
};

/// Keys accepted by flow configs.
const std::set<std::string>& flow_config_keys();

/// Closeness-experiment parameters; missing keys keep the defaults.
mcf::CloseConfig close_config_from(const KeyValueConfig& cfg);

/// Directory holding the bundled configs (LOJLAB_CONFIG_DIR overrides).
std::filesystem::path bundled_config_dir();

}  // namespace lojlab::harness
