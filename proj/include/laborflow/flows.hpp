#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "laborflow/io/csv.hpp"
#include "laborflow/panel.hpp"

namespace laborflow {

enum class EntityKind { industry, occupation };

inline const char* entity_kind_name(EntityKind k) {
  return k == EntityKind::industry ? "industry" : "occupation";
}

// Symmetric worker-move weights between entities, measured between year-1 and
// year. Weights are integer-valued unless a worker held several entities in a
// year, in which case their unit contribution is split across their pairs.
struct FlowMatrix {
  EntityKind kind = EntityKind::industry;
  int year = 0;
  std::vector<std::string> codes;  // sorted lexicographically
  Eigen::MatrixXd counts;

  int index_of(std::string_view code) const {
    auto it = std::lower_bound(codes.begin(), codes.end(), code);
    if (it == codes.end() || *it != code) return -1;
    return static_cast<int>(it - codes.begin());
  }
};

struct EmploymentVector {
  EntityKind kind = EntityKind::industry;
  int year = 0;
  std::vector<std::string> codes;
  Eigen::VectorXd L;  // distinct workers in the entity at `year`
  Eigen::VectorXd g;  // ln L_t - ln L_{t-1}; NaN where undefined

  int index_of(std::string_view code) const {
    auto it = std::lower_bound(codes.begin(), codes.end(), code);
    if (it == codes.end() || *it != code) return -1;
    return static_cast<int>(it - codes.begin());
  }
};

namespace detail {

inline uint32_t entity_of(const EmploymentSpell& s, EntityKind k) {
  return k == EntityKind::industry ? s.industry : s.occupation;
}

inline const Interner& interner_of(const PanelDataset& p, EntityKind k) {
  return k == EntityKind::industry ? p.industries() : p.occupations();
}

// Sorted union of entity codes present in the given year slices.
inline std::vector<std::string> entity_codes(std::initializer_list<std::span<const EmploymentSpell>> slices,
                                             EntityKind kind, const Interner& names) {
  std::vector<std::string> codes;
  std::vector<char> seen(names.size(), 0);
  for (auto sl : slices)
    for (const auto& s : sl) {
      uint32_t e = entity_of(s, kind);
      if (!seen[e]) {
        seen[e] = 1;
        codes.push_back(names.name(e));
      }
    }
  std::sort(codes.begin(), codes.end());
  return codes;
}

}  // namespace detail

// Core flow computation over two worker-sorted year slices. `names` maps
// entity ids to codes; both slices must come from the same interner.
inline FlowMatrix compute_flows_from_slices(std::span<const EmploymentSpell> prev,
                                            std::span<const EmploymentSpell> cur, EntityKind kind,
                                            int year, const Interner& names) {
  FlowMatrix fm;
  fm.kind = kind;
  fm.year = year;
  fm.codes = detail::entity_codes({prev, cur}, kind, names);
  const int n = static_cast<int>(fm.codes.size());
  fm.counts = Eigen::MatrixXd::Zero(n, n);

  std::vector<int> local(names.size(), -1);
  for (int i = 0; i < n; ++i) local[names.find(fm.codes[i])] = i;

  // one worker's spells in each year, as (entity, firm)
  std::vector<std::pair<uint32_t, uint32_t>> a, b;
  size_t i = 0, j = 0;
  while (i < prev.size() && j < cur.size()) {
    uint32_t w = prev[i].worker;
    if (cur[j].worker < w) {
      ++j;
      continue;
    }
    if (cur[j].worker > w) {
      ++i;
      continue;
    }
    a.clear();
    b.clear();
    while (i < prev.size() && prev[i].worker == w) {
      a.emplace_back(detail::entity_of(prev[i], kind), prev[i].firm);
      ++i;
    }
    while (j < cur.size() && cur[j].worker == w) {
      b.emplace_back(detail::entity_of(cur[j], kind), cur[j].firm);
      ++j;
    }
    // distinct entities per year
    auto distinct = [](std::vector<std::pair<uint32_t, uint32_t>>& v) {
      std::sort(v.begin(), v.end());
      std::vector<uint32_t> ents;
      for (const auto& p : v)
        if (ents.empty() || ents.back() != p.first) ents.push_back(p.first);
      return ents;
    };
    std::vector<uint32_t> ea = distinct(a), eb = distinct(b);

    // a same-entity pair is a flow only when the firm changed
    auto includes_move = [&](uint32_t ent) {
      for (const auto& pa : a)
        if (pa.first == ent)
          for (const auto& pb : b)
            if (pb.first == ent && pb.second != pa.second) return true;
      return false;
    };
    std::vector<std::pair<int, int>> pairs;
    for (uint32_t x : ea)
      for (uint32_t y : eb) {
        if (x == y && !includes_move(x)) continue;
        pairs.emplace_back(local[x], local[y]);
      }
    if (pairs.empty()) continue;
    double wgt = 1.0 / static_cast<double>(pairs.size());
    for (auto [x, y] : pairs) {
      if (x == y) {
        fm.counts(x, x) += wgt;
      } else {
        fm.counts(x, y) += wgt;
        fm.counts(y, x) += wgt;
      }
    }
  }
  return fm;
}

// F[a][b] = workers employed in a at t-1 and b at t plus the reverse flow,
// counted symmetrically. Years t-1 and t must lie in one classification epoch.
inline FlowMatrix compute_flows(const PanelDataset& panel, EntityKind kind, int year) {
  if (!panel.same_epoch(year - 1, year))
    fail(errc::epoch_violation,
         format("flow years %d and %d lie in different classification epochs", year - 1, year));
  return compute_flows_from_slices(panel.year_spells(year - 1), panel.year_spells(year), kind, year,
                                   detail::interner_of(panel, kind));
}

inline EmploymentVector compute_employment_from_slices(std::span<const EmploymentSpell> prev,
                                                       std::span<const EmploymentSpell> cur,
                                                       EntityKind kind, int year,
                                                       const Interner& names) {
  EmploymentVector ev;
  ev.kind = kind;
  ev.year = year;
  ev.codes = detail::entity_codes({prev, cur}, kind, names);
  const int n = static_cast<int>(ev.codes.size());
  ev.L = Eigen::VectorXd::Zero(n);
  ev.g = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());

  std::vector<int> local(names.size(), -1);
  for (int i = 0; i < n; ++i) local[names.find(ev.codes[i])] = i;

  // distinct workers per entity and year
  auto count = [&](std::span<const EmploymentSpell> slice, Eigen::VectorXd& out) {
    out = Eigen::VectorXd::Zero(n);
    size_t i = 0;
    std::vector<uint32_t> ents;
    while (i < slice.size()) {
      uint32_t w = slice[i].worker;
      ents.clear();
      while (i < slice.size() && slice[i].worker == w) {
        ents.push_back(detail::entity_of(slice[i], kind));
        ++i;
      }
      std::sort(ents.begin(), ents.end());
      ents.erase(std::unique(ents.begin(), ents.end()), ents.end());
      for (uint32_t e : ents) out[local[e]] += 1.0;
    }
  };
  Eigen::VectorXd l_prev;
  count(prev, l_prev);
  count(cur, ev.L);
  for (int k = 0; k < n; ++k)
    if (l_prev[k] > 0 && ev.L[k] > 0) ev.g[k] = std::log(ev.L[k]) - std::log(l_prev[k]);
  return ev;
}

inline EmploymentVector compute_employment(const PanelDataset& panel, EntityKind kind, int year) {
  if (year < panel.min_year() || year > panel.max_year())
    fail(errc::validation, format("year %d outside panel range", year));
  return compute_employment_from_slices(panel.year_spells(year - 1), panel.year_spells(year), kind,
                                        year, detail::interner_of(panel, kind));
}

// Optional matrix dump: delimited triplets (entity_a, entity_b, count).
inline void dump_flow_triplets(const FlowMatrix& fm, std::ostream& out, char sep = ',') {
  io::DelimitedWriter w(out, sep);
  w.row({"entity_a", "entity_b", "count"});
  const int n = static_cast<int>(fm.codes.size());
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      if (fm.counts(i, j) != 0.0)
        w.row({fm.codes[i], fm.codes[j], io::num(fm.counts(i, j))});
}

}  // namespace laborflow
