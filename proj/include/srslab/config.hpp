#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace srslab {

// Flat key=value config text: one key per line, '#' starts a comment,
// blank lines skipped. Keys and values are whitespace-trimmed.
using ConfigMap = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace detail

inline ConfigMap parse_config_text(const std::string& text) {
  ConfigMap out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
    }
    std::string key = detail::trim(line.substr(0, eq));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    }
    out[key] = detail::trim(line.substr(eq + 1));
  }
  return out;
}

inline ConfigMap load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

inline std::string config_to_text(const ConfigMap& m) {
  std::string out;
  for (const auto& [k, v] : m) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

// typed accessors; a present-but-malformed value names its key

inline std::string config_str(const ConfigMap& m, const std::string& key,
                              const std::string& fallback) {
  auto it = m.find(key);
  return it == m.end() ? fallback : it->second;
}

inline double config_double(const ConfigMap& m, const std::string& key, double fallback) {
  auto it = m.find(key);
  if (it == m.end()) return fallback;
  try {
    std::size_t used = 0;
    double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': not a number: " + it->second);
  }
}

inline long long config_int(const ConfigMap& m, const std::string& key, long long fallback) {
  auto it = m.find(key);
  if (it == m.end()) return fallback;
  try {
    std::size_t used = 0;
    long long v = std::stoll(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': not an integer: " + it->second);
  }
}

inline bool config_bool(const ConfigMap& m, const std::string& key, bool fallback) {
  auto it = m.find(key);
  if (it == m.end()) return fallback;
  const std::string& v = it->second;
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw std::invalid_argument("config key '" + key + "': not a boolean: " + v);
}

// Run manifest: the fully resolved settings of one CLI invocation plus every
// file the run wrote, serialized in the same key=value shape.
struct RunManifest {
  ConfigMap resolved;
  std::vector<std::string> outputs;
};

inline std::string manifest_to_text(const RunManifest& m) {
  std::string out = config_to_text(m.resolved);
  for (std::size_t i = 0; i < m.outputs.size(); ++i) {
    out += "output." + std::to_string(i + 1) + '=' + m.outputs[i] + '\n';
  }
  return out;
}

}  // namespace srslab
