#pragma once

#include <istream>
#include <string>
#include <unordered_map>
#include <vector>

#include "laborflow/common.hpp"
#include "laborflow/io/csv.hpp"

namespace laborflow {

// One code hierarchy (industries, occupations, or territorial units), loaded
// from a two-column file (code, parent_code); roots carry an empty parent.
// Level 0 = root codes; children sit one level below their parent.
class ClassificationTable {
 public:
  ClassificationTable() = default;

  static ClassificationTable from_rows(
      const std::vector<std::pair<std::string, std::string>>& rows) {
    ClassificationTable t;
    for (const auto& [code, parent] : rows) t.add(code, parent);
    t.finalize();
    return t;
  }

  static ClassificationTable load(std::istream& in, char sep = ',') {
    io::DelimitedReader r(in, sep);
    int c_code = r.require_column("code");
    int c_parent = r.require_column("parent_code");
    ClassificationTable t;
    std::vector<std::string_view> f;
    while (r.next(f)) {
      if (static_cast<int>(f.size()) <= std::max(c_code, c_parent))
        fail(errc::parse, format("classification row %zu: too few fields", r.line_no()));
      t.add(std::string(trim(f[c_code])), std::string(trim(f[c_parent])));
    }
    t.finalize();
    return t;
  }

  bool contains(std::string_view code) const { return parent_.count(std::string(code)) > 0; }

  // Walks up until the requested level; identity when already at it.
  std::string resolve_to_level(std::string_view code, int level) const {
    std::string cur(code);
    auto it = parent_.find(cur);
    if (it == parent_.end()) fail(errc::not_found, "unknown code: " + cur);
    int cur_level = level_.at(cur);
    if (cur_level < level) fail(errc::validation, format("code %s is above level %d", cur.c_str(), level));
    while (cur_level > level) {
      cur = parent_.at(cur);
      --cur_level;
    }
    return cur;
  }

  int level_of(std::string_view code) const {
    auto it = level_.find(std::string(code));
    if (it == level_.end()) fail(errc::not_found, "unknown code: " + std::string(code));
    return it->second;
  }

  int max_level() const { return max_level_; }
  size_t size() const { return parent_.size(); }

  const std::string& parent_of(std::string_view code) const {
    auto it = parent_.find(std::string(code));
    if (it == parent_.end()) fail(errc::not_found, "unknown code: " + std::string(code));
    return it->second;
  }

 private:
  void add(const std::string& code, const std::string& parent) {
    auto it = parent_.find(code);
    if (it != parent_.end()) {
      if (it->second != parent)
        fail(errc::validation, "code " + code + " mapped to two parents");
      return;
    }
    parent_.emplace(code, parent);
  }

  void finalize() {
    for (const auto& [code, parent] : parent_) {
      if (!parent.empty() && !parent_.count(parent))
        fail(errc::validation, "parent code not defined: " + parent + " (of " + code + ")");
    }
    for (const auto& [code, _] : parent_) compute_level(code);
  }

  int compute_level(const std::string& code) {
    auto it = level_.find(code);
    if (it != level_.end()) {
      if (it->second == kInProgress) fail(errc::validation, "cycle in classification at " + code);
      return it->second;
    }
    level_[code] = kInProgress;
    const std::string& parent = parent_.at(code);
    int lv = parent.empty() ? 0 : compute_level(parent) + 1;
    level_[code] = lv;
    if (lv > max_level_) max_level_ = lv;
    return lv;
  }

  static constexpr int kInProgress = -2;
  std::unordered_map<std::string, std::string> parent_;
  std::unordered_map<std::string, int> level_;
  int max_level_ = 0;
};

}  // namespace laborflow
