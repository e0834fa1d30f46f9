#include "lojlab/harness/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "lojlab/errors.hpp"

namespace lojlab::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw UsageError("key '" + key + "': '" + text + "' is not a number");
  return v;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& origin) {
  KeyValueConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw UsageError(where + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw UsageError(where + ": empty key or value");
    if (!cfg.values_.emplace(key, value).second) throw UsageError(where + ": duplicate key '" + key + "'");
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.filename().string());
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : to_double(key, it->second);
}

long KeyValueConfig::get_int(const std::string& key, long fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const double v = to_double(key, it->second);
  if (v != static_cast<double>(static_cast<long>(v))) throw UsageError("key '" + key + "' must be an integer");
  return static_cast<long>(v);
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
  if (it->second == "false" || it->second == "0" || it->second == "no") return false;
  throw UsageError("key '" + key + "' must be true or false");
}

std::vector<double> KeyValueConfig::get_list(const std::string& key) const {
  std::vector<double> out;
  auto it = values_.find(key);
  if (it == values_.end()) return out;
  std::istringstream in(it->second);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(to_double(key, trim(item)));
  return out;
}

void KeyValueConfig::require_known(const std::set<std::string>& known) const {
  for (const auto& [k, v] : values_) {
    if (known.count(k) == 0) throw UsageError(origin_ + ": unknown key '" + k + "'");
  }
}

const std::set<std::string>& flow_config_keys() {
  static const std::set<std::string> keys = {
      "k",     "R_dom", "h",       "dt_max", "tol",  "amplitude", "amplitudes", "profile_kind", "t1",
      "t2",    "eps1",  "eps2",    "R1",     "R2",   "seed",      "R_bar",      "eps_fit",      "C_cap",
      "stride", "stop_dist", "fit", "close", "name"};
  return keys;
}

mcf::CloseConfig close_config_from(const KeyValueConfig& cfg) {
  cfg.require_known(flow_config_keys());
  mcf::CloseConfig c;
  c.k = static_cast<int>(cfg.get_int("k", c.k));
  c.R_dom = cfg.get_double("R_dom", c.R_dom);
  c.h = cfg.get_double("h", c.h);
  c.dt_max = cfg.get_double("dt_max", c.dt_max);
  c.tol = cfg.get_double("tol", c.tol);
  try {
    c.profile.kind = mcf::parse_profile_kind(cfg.get_string("profile_kind", mcf::to_string(c.profile.kind)));
  } catch (const InvalidInputError& e) {
    throw UsageError(cfg.origin() + ": " + e.what());
  }
  c.profile.amplitude = cfg.get_double("amplitude", c.profile.amplitude);
  c.profile.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<long>(c.profile.seed)));
  c.t1 = cfg.get_double("t1", c.t1);
  c.t2 = cfg.get_double("t2", c.t2);
  c.eps1 = cfg.get_double("eps1", c.eps1);
  c.eps2 = cfg.get_double("eps2", c.eps2);
  c.R1 = cfg.get_double("R1", c.R1);
  c.R2 = cfg.get_double("R2", c.R2);
  c.stride = cfg.get_double("stride", c.stride);
  c.stop_dist = cfg.get_double("stop_dist", c.stop_dist);
  c.fit.R_bar = cfg.get_double("R_bar", c.fit.R_bar);
  c.fit.epsilon = cfg.get_double("eps_fit", c.fit.epsilon);
  c.fit.C_cap = cfg.get_double("C_cap", c.fit.C_cap);
  if (c.k < 1) throw UsageError("k must be >= 1");
  if (!(c.t2 > c.t1)) throw UsageError("t2 must exceed t1");
  return c;
}

std::filesystem::path bundled_config_dir() {
  if (const char* env = std::getenv("LOJLAB_CONFIG_DIR")) return env;
#ifdef LOJLAB_CONFIG_DIR
  return LOJLAB_CONFIG_DIR;
#else
  return "configs";
#endif
}

}  // namespace lojlab::harness
