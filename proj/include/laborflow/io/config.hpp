#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "laborflow/common.hpp"
#include "laborflow/io/csv.hpp"

namespace laborflow::io {

// Flat key-value config with [sections]; '#' and ';' start comments.
// Keys are addressed as "section.key".
class Config {
 public:
  Config() = default;

  static Config parse(std::istream& in) {
    Config cfg;
    std::string line, section;
    size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      auto s = trim(line);
      if (s.empty() || s[0] == '#' || s[0] == ';') continue;
      if (s.front() == '[') {
        if (s.back() != ']') fail(errc::config, format("bad section header at line %zu", line_no));
        section = std::string(trim(s.substr(1, s.size() - 2)));
        continue;
      }
      auto eq = s.find('=');
      if (eq == std::string_view::npos)
        fail(errc::config, format("expected key = value at line %zu", line_no));
      std::string key = std::string(trim(s.substr(0, eq)));
      std::string value = std::string(trim(s.substr(eq + 1)));
      if (key.empty()) fail(errc::config, format("empty key at line %zu", line_no));
      cfg.values_[section.empty() ? key : section + "." + key] = value;
    }
    return cfg;
  }

  static Config load(const std::string& path) {
    auto f = open_in(path);
    Config c = parse(f);
    c.source_path_ = path;
    return c;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  std::string require(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) fail(errc::config, "missing required config key: " + key);
    return it->second;
  }

  long long get_int(const std::string& key, long long fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    long long v;
    if (!parse_int(it->second, v)) fail(errc::config, "not an integer: " + key + " = " + it->second);
    return v;
  }

  double get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    double v;
    if (!parse_double(it->second, v)) fail(errc::config, "not a number: " + key + " = " + it->second);
    return v;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail(errc::config, "not a boolean: " + key + " = " + v);
  }

  std::vector<long long> get_int_list(const std::string& key) const {
    std::vector<long long> out;
    auto it = values_.find(key);
    if (it == values_.end()) return out;
    for (auto part : split(it->second, ',')) {
      auto p = trim(part);
      if (p.empty()) continue;
      long long v;
      if (!parse_int(p, v)) fail(errc::config, "bad integer list: " + key + " = " + it->second);
      out.push_back(v);
    }
    return out;
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }

  const std::map<std::string, std::string>& values() const { return values_; }
  const std::string& source_path() const { return source_path_; }

  // Stable content hash: values are sorted by key in the map already.
  std::string content_hash() const {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& [k, v] : values_) {
      h = fnv1a(k, h);
      h = fnv1a("=", h);
      h = fnv1a(v, h);
      h = fnv1a("\n", h);
    }
    return hex64(h);
  }

 private:
  std::map<std::string, std::string> values_;
  std::string source_path_;
};

}  // namespace laborflow::io
