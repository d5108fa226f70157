#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "laborflow/econ/result.hpp"

namespace laborflow::econ {

// Outcome, covariate columns, expanded fixed-effect dummies, and cluster ids.
struct DesignMatrix {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  std::vector<std::string> names;
  std::vector<int> factor_of;  // -1 for covariates/intercept, else factor index
  std::vector<std::string> factor_names;
  std::vector<int> cluster;  // per-row id; empty means unclustered
  int n_clusters = 0;
  bool has_intercept = false;
  std::vector<std::string> warnings;

  int n() const { return static_cast<int>(X.rows()); }
  int p() const { return static_cast<int>(X.cols()); }

  int column(std::string_view name) const {
    for (size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<int>(i);
    return -1;
  }

  DesignMatrix subset_rows(const std::vector<int>& rows) const {
    DesignMatrix d;
    d.names = names;
    d.factor_of = factor_of;
    d.factor_names = factor_names;
    d.has_intercept = has_intercept;
    d.warnings = warnings;
    d.y.resize(rows.size());
    d.X.resize(rows.size(), X.cols());
    for (size_t i = 0; i < rows.size(); ++i) {
      d.y[i] = y[rows[i]];
      d.X.row(i) = X.row(rows[i]);
    }
    if (!cluster.empty()) {
      d.cluster.resize(rows.size());
      for (size_t i = 0; i < rows.size(); ++i) d.cluster[i] = cluster[rows[i]];
      int mx = -1;
      for (int c : d.cluster) mx = std::max(mx, c);
      std::vector<int> remap(mx + 1, -1);
      int next = 0;
      for (int& c : d.cluster) {
        if (remap[c] < 0) remap[c] = next++;
        c = remap[c];
      }
      d.n_clusters = next;
    }
    return d;
  }
};

// Assembles a design matrix; factors expand to one-hot dummies with the
// lexicographically smallest level dropped as reference.
class DesignBuilder {
 public:
  explicit DesignBuilder(int n) : n_(n) {}

  DesignBuilder& outcome(const Eigen::VectorXd& y) {
    check_len(static_cast<int>(y.size()), "outcome");
    y_ = y;
    return *this;
  }

  DesignBuilder& intercept() {
    add_intercept_ = true;
    return *this;
  }

  DesignBuilder& covariate(const std::string& name, const Eigen::VectorXd& v) {
    check_len(static_cast<int>(v.size()), name.c_str());
    cov_names_.push_back(name);
    cov_cols_.push_back(v);
    return *this;
  }

  DesignBuilder& factor(const std::string& name, const std::vector<std::string>& levels_by_row) {
    check_len(static_cast<int>(levels_by_row.size()), name.c_str());
    factor_names_.push_back(name);
    factor_rows_.push_back(levels_by_row);
    return *this;
  }

  DesignBuilder& clusters(const std::vector<std::string>& ids) {
    check_len(static_cast<int>(ids.size()), "clusters");
    cluster_labels_ = ids;
    return *this;
  }

  DesignMatrix build() const {
    DesignMatrix d;
    if (y_.size() != n_) fail(errc::validation, "design outcome not set");
    d.y = y_;
    d.factor_names = factor_names_;
    d.has_intercept = add_intercept_;

    struct Col {
      std::string name;
      int factor = -1;
      Eigen::VectorXd v;
    };
    std::vector<Col> cols;
    if (add_intercept_) cols.push_back({"(Intercept)", -1, Eigen::VectorXd::Ones(n_)});
    for (size_t k = 0; k < cov_cols_.size(); ++k) cols.push_back({cov_names_[k], -1, cov_cols_[k]});

    for (size_t f = 0; f < factor_rows_.size(); ++f) {
      std::vector<std::string> levels(factor_rows_[f]);
      std::sort(levels.begin(), levels.end());
      levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
      if (levels.size() < 2) {
        d.warnings.push_back("factor " + factor_names_[f] + " has a single level; dropped");
        continue;
      }
      // reference level = lexicographically smallest
      for (size_t l = 1; l < levels.size(); ++l) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n_);
        for (int i = 0; i < n_; ++i)
          if (factor_rows_[f][i] == levels[l]) v[i] = 1.0;
        cols.push_back({factor_names_[f] + "=" + levels[l], static_cast<int>(f), v});
      }
    }

    d.X.resize(n_, static_cast<int>(cols.size()));
    for (size_t c = 0; c < cols.size(); ++c) {
      d.X.col(c) = cols[c].v;
      d.names.push_back(cols[c].name);
      d.factor_of.push_back(cols[c].factor);
    }

    if (!cluster_labels_.empty()) {
      std::map<std::string, int> ids;
      d.cluster.resize(n_);
      for (int i = 0; i < n_; ++i) {
        auto [it, inserted] = ids.emplace(cluster_labels_[i], static_cast<int>(ids.size()));
        d.cluster[i] = it->second;
      }
      d.n_clusters = static_cast<int>(ids.size());
    }
    return d;
  }

 private:
  void check_len(int len, const char* what) const {
    if (len != n_) fail(errc::validation, format("%s has %d rows, expected %d", what, len, n_));
  }
  int n_;
  Eigen::VectorXd y_;
  bool add_intercept_ = false;
  std::vector<std::string> cov_names_;
  std::vector<Eigen::VectorXd> cov_cols_;
  std::vector<std::string> factor_names_;
  std::vector<std::vector<std::string>> factor_rows_;
  std::vector<std::string> cluster_labels_;
};

}  // namespace laborflow::econ
