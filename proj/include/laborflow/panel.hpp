#pragma once

#include <algorithm>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "laborflow/classification.hpp"
#include "laborflow/common.hpp"
#include "laborflow/io/csv.hpp"

namespace laborflow {

// One worker-firm-year record, the atom of the panel. Ids index the panel's
// interners; industry/occupation/region are already mapped to analysis level.
struct EmploymentSpell {
  uint32_t worker = 0;
  uint32_t firm = 0;
  int32_t year = 0;
  uint32_t industry = 0;
  uint32_t occupation = 0;
  uint32_t region = 0;
  double wage = 0.0;
  double schooling = 0.0;
};

struct ParseSchema {
  std::string worker_id = "worker_id";
  std::string firm_id = "firm_id";
  std::string year = "year";
  std::string industry = "industry";
  std::string occupation = "occupation";
  std::string region = "region";
  std::string wage = "wage";
  std::string schooling = "schooling_years";
};

struct ParseOptions {
  char separator = ',';
  double malformed_tolerance = 0.01;  // fraction of input rows
  const ClassificationTable* industries = nullptr;
  const ClassificationTable* occupations = nullptr;
  const ClassificationTable* regions = nullptr;
  // analysis level per hierarchy; -1 keeps the code as supplied
  int industry_level = -1;
  int occupation_level = -1;
  int region_level = -1;
  std::vector<int> epoch_boundaries;  // year b starts a new epoch
};

struct ParseReport {
  size_t input_rows = 0;
  size_t accepted = 0;
  size_t deduplicated = 0;
  size_t rejected_malformed = 0;
  size_t rejected_code = 0;
  size_t rejected_value = 0;
  size_t last_malformed_line = 0;
  size_t rejected() const { return rejected_malformed + rejected_code + rejected_value; }
};

struct ActivitySeries {
  int start_year = 0;
  std::vector<int> headcount;  // one entry per panel year, zeros explicit
  int at(int year) const {
    int i = year - start_year;
    if (i < 0 || i >= static_cast<int>(headcount.size())) return 0;
    return headcount[i];
  }
};

// Immutable longitudinal panel with worker / firm / year indexes. All reads
// are safe to share across threads once built.
class PanelDataset {
 public:
  const std::vector<EmploymentSpell>& spells() const { return spells_; }
  int min_year() const { return min_year_; }
  int max_year() const { return max_year_; }
  const std::vector<int>& epoch_boundaries() const { return epochs_; }

  const Interner& workers() const { return workers_; }
  const Interner& firms() const { return firms_; }
  const Interner& industries() const { return industries_; }
  const Interner& occupations() const { return occupations_; }
  const Interner& regions() const { return regions_; }

  int epoch_of(int year) const {
    int e = 0;
    for (int b : epochs_)
      if (year >= b) ++e;
    return e;
  }
  bool same_epoch(int a, int b) const { return epoch_of(a) == epoch_of(b); }

  std::span<const EmploymentSpell> year_spells(int year) const {
    if (year < min_year_ || year > max_year_ || spells_.empty()) return {};
    size_t b = year_offset_[year - min_year_];
    size_t e = year_offset_[year - min_year_ + 1];
    return {spells_.data() + b, e - b};
  }

  // All of a worker's spells in [as_of - lookback, as_of - 1], most recent
  // year first. Unknown workers yield an empty history.
  std::vector<EmploymentSpell> worker_history(std::string_view worker_code, int as_of_year,
                                              int lookback_years = 2) const {
    if (lookback_years < 1) fail(errc::validation, "lookback_years must be >= 1");
    uint32_t w = workers_.find(worker_code);
    if (w == Interner::npos) return {};
    return worker_history(w, as_of_year, lookback_years);
  }

  std::vector<EmploymentSpell> worker_history(uint32_t worker, int as_of_year,
                                              int lookback_years = 2) const {
    std::vector<EmploymentSpell> out;
    if (lookback_years < 1) fail(errc::validation, "lookback_years must be >= 1");
    if (worker >= workers_.size()) return out;
    int lo = as_of_year - lookback_years;
    for (size_t i = worker_offset_[worker]; i < worker_offset_[worker + 1]; ++i) {
      const auto& s = spells_[worker_order_[i]];
      if (s.year >= lo && s.year < as_of_year) out.push_back(s);
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const EmploymentSpell& a, const EmploymentSpell& b) { return a.year > b.year; });
    return out;
  }

  ActivitySeries firm_activity_series(std::string_view firm_code) const {
    uint32_t f = firms_.find(firm_code);
    if (f == Interner::npos) fail(errc::not_found, "unknown firm: " + std::string(firm_code));
    return firm_activity_series(f);
  }

  ActivitySeries firm_activity_series(uint32_t firm) const {
    if (firm >= firms_.size()) fail(errc::not_found, "unknown firm id");
    ActivitySeries s;
    s.start_year = min_year_;
    s.headcount.assign(static_cast<size_t>(max_year_ - min_year_ + 1), 0);
    for (size_t i = firm_offset_[firm]; i < firm_offset_[firm + 1]; ++i) {
      const auto& sp = spells_[firm_order_[i]];
      ++s.headcount[sp.year - min_year_];
    }
    return s;
  }

  // Spell indexes of one firm, sorted by (year, worker).
  std::span<const uint32_t> firm_spells(uint32_t firm) const {
    if (firm >= firms_.size()) fail(errc::not_found, "unknown firm id");
    return {firm_order_.data() + firm_offset_[firm], firm_offset_[firm + 1] - firm_offset_[firm]};
  }

  int firm_headcount(uint32_t firm, int year) const {
    int n = 0;
    for (uint32_t idx : firm_spells(firm))
      if (spells_[idx].year == year) ++n;
    return n;
  }

  // ---- construction ----------------------------------------------------------

  struct RawSpell {
    std::string worker, firm, industry, occupation, region;
    int year = 0;
    double wage = 0.0, schooling = 0.0;
  };

  static PanelDataset from_raw(std::vector<RawSpell> rows, const std::vector<int>& epochs) {
    PanelDataset p;
    p.epochs_ = epochs;
    p.spells_.reserve(rows.size());
    for (const auto& r : rows) {
      EmploymentSpell s;
      s.worker = p.workers_.intern(r.worker);
      s.firm = p.firms_.intern(r.firm);
      s.year = r.year;
      s.industry = p.industries_.intern(r.industry);
      s.occupation = p.occupations_.intern(r.occupation);
      s.region = p.regions_.intern(r.region);
      s.wage = r.wage;
      s.schooling = r.schooling;
      p.spells_.push_back(s);
    }
    p.dedup_and_index();
    return p;
  }

  static PanelDataset parse(std::istream& in, const ParseSchema& schema, const ParseOptions& opt,
                            ParseReport* report = nullptr) {
    io::DelimitedReader r(in, opt.separator);
    const int c_worker = r.require_column(schema.worker_id);
    const int c_firm = r.require_column(schema.firm_id);
    const int c_year = r.require_column(schema.year);
    const int c_ind = r.require_column(schema.industry);
    const int c_occ = r.require_column(schema.occupation);
    const int c_reg = r.require_column(schema.region);
    const int c_wage = r.require_column(schema.wage);
    const int c_school = r.require_column(schema.schooling);
    const int n_cols = static_cast<int>(r.header().size());

    PanelDataset p;
    p.epochs_ = opt.epoch_boundaries;
    ParseReport rep;
    std::vector<std::string_view> f;
    while (r.next(f)) {
      ++rep.input_rows;
      long long year = 0;
      double wage = 0, school = 0;
      if (static_cast<int>(f.size()) != n_cols || !parse_int(f[c_year], year) ||
          !parse_double(f[c_wage], wage) || !parse_double(f[c_school], school)) {
        ++rep.rejected_malformed;
        rep.last_malformed_line = r.line_no();
        continue;
      }
      if (wage < 0 || school < 0 || school > 30) {
        ++rep.rejected_value;
        continue;
      }
      std::string ind, occ, reg;
      try {
        ind = map_code(trim(f[c_ind]), opt.industries, opt.industry_level);
        occ = map_code(trim(f[c_occ]), opt.occupations, opt.occupation_level);
        reg = map_code(trim(f[c_reg]), opt.regions, opt.region_level);
      } catch (const Error&) {
        ++rep.rejected_code;
        continue;
      }
      EmploymentSpell s;
      s.worker = p.workers_.intern(trim(f[c_worker]));
      s.firm = p.firms_.intern(trim(f[c_firm]));
      s.year = static_cast<int32_t>(year);
      s.industry = p.industries_.intern(ind);
      s.occupation = p.occupations_.intern(occ);
      s.region = p.regions_.intern(reg);
      s.wage = wage;
      s.schooling = school;
      p.spells_.push_back(s);
    }
    if (rep.input_rows > 0 &&
        static_cast<double>(rep.rejected_malformed) >
            opt.malformed_tolerance * static_cast<double>(rep.input_rows)) {
      fail(errc::parse, format("malformed rows exceed tolerance (%zu of %zu, last at line %zu)",
                               rep.rejected_malformed, rep.input_rows, rep.last_malformed_line));
    }
    size_t before = p.spells_.size();
    p.dedup_and_index();
    rep.deduplicated = before - p.spells_.size();
    rep.accepted = p.spells_.size();
    if (report) *report = rep;
    return p;
  }

 private:
  static std::string map_code(std::string_view code, const ClassificationTable* table, int level) {
    if (!table) return std::string(code);
    if (!table->contains(code)) fail(errc::not_found, "unresolvable code: " + std::string(code));
    if (level < 0) return std::string(code);
    return table->resolve_to_level(code, level);
  }

  void dedup_and_index() {
    // Duplicate (worker, firm, year) rows collapse to the highest-wage row;
    // ties keep the earliest input row, so parsing stays deterministic.
    std::vector<uint32_t> order(spells_.size());
    for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
      const auto& x = spells_[a];
      const auto& y = spells_[b];
      if (x.worker != y.worker) return x.worker < y.worker;
      if (x.firm != y.firm) return x.firm < y.firm;
      if (x.year != y.year) return x.year < y.year;
      if (x.wage != y.wage) return x.wage > y.wage;
      return a < b;
    });
    std::vector<EmploymentSpell> kept;
    kept.reserve(spells_.size());
    for (size_t i = 0; i < order.size(); ++i) {
      const auto& s = spells_[order[i]];
      if (!kept.empty()) {
        const auto& k = kept.back();
        if (k.worker == s.worker && k.firm == s.firm && k.year == s.year) continue;
      }
      kept.push_back(s);
    }
    spells_ = std::move(kept);

    if (spells_.empty()) {
      min_year_ = 0;
      max_year_ = -1;
      year_offset_ = {0};
      worker_offset_.assign(workers_.size() + 1, 0);
      firm_offset_.assign(firms_.size() + 1, 0);
      return;
    }
    min_year_ = spells_.front().year;
    max_year_ = spells_.front().year;
    for (const auto& s : spells_) {
      min_year_ = std::min(min_year_, static_cast<int>(s.year));
      max_year_ = std::max(max_year_, static_cast<int>(s.year));
    }
    std::sort(spells_.begin(), spells_.end(), [](const EmploymentSpell& a, const EmploymentSpell& b) {
      if (a.year != b.year) return a.year < b.year;
      if (a.worker != b.worker) return a.worker < b.worker;
      return a.firm < b.firm;
    });
    int n_years = max_year_ - min_year_ + 1;
    year_offset_.assign(n_years + 1, 0);
    for (const auto& s : spells_) ++year_offset_[s.year - min_year_ + 1];
    for (int y = 0; y < n_years; ++y) year_offset_[y + 1] += year_offset_[y];

    worker_order_ = sorted_permutation([this](const EmploymentSpell& a, const EmploymentSpell& b) {
      if (a.worker != b.worker) return a.worker < b.worker;
      if (a.year != b.year) return a.year < b.year;
      return a.firm < b.firm;
    });
    worker_offset_ = offsets_of(worker_order_, workers_.size(),
                                [this](uint32_t i) { return spells_[i].worker; });
    firm_order_ = sorted_permutation([this](const EmploymentSpell& a, const EmploymentSpell& b) {
      if (a.firm != b.firm) return a.firm < b.firm;
      if (a.year != b.year) return a.year < b.year;
      return a.worker < b.worker;
    });
    firm_offset_ =
        offsets_of(firm_order_, firms_.size(), [this](uint32_t i) { return spells_[i].firm; });
  }

  template <class Less>
  std::vector<uint32_t> sorted_permutation(Less less) const {
    std::vector<uint32_t> order(spells_.size());
    for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](uint32_t a, uint32_t b) { return less(spells_[a], spells_[b]); });
    return order;
  }

  template <class Key>
  static std::vector<size_t> offsets_of(const std::vector<uint32_t>& order, size_t n_keys, Key key) {
    std::vector<size_t> off(n_keys + 1, 0);
    for (uint32_t idx : order) ++off[key(idx) + 1];
    for (size_t k = 0; k < n_keys; ++k) off[k + 1] += off[k];
    return off;
  }

  std::vector<EmploymentSpell> spells_;
  Interner workers_, firms_, industries_, occupations_, regions_;
  std::vector<int> epochs_;
  int min_year_ = 0;
  int max_year_ = -1;
  std::vector<size_t> year_offset_;
  std::vector<uint32_t> worker_order_;
  std::vector<size_t> worker_offset_;
  std::vector<uint32_t> firm_order_;
  std::vector<size_t> firm_offset_;
};

}  // namespace laborflow
