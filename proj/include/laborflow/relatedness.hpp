#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "laborflow/flows.hpp"

namespace laborflow {

struct FlowFitMeta {
  double beta0 = 0, beta1 = 0, beta2 = 0;  // intercept, max growth, max log size
  double r2 = 0;
  int n_fitted = 0;
};

// Residuals of the flow regression: ln F on intercept, pairwise max growth
// and pairwise max log employment. Pairs with no usable flow are assigned the
// minimum fitted residual.
struct FitResiduals {
  EntityKind kind = EntityKind::industry;
  int year = 0;
  std::vector<std::string> codes;
  Eigen::MatrixXd residual;                       // symmetric, diagonal 0
  std::vector<std::pair<int, int>> fitted_pairs;  // (i, j) with i < j
  FlowFitMeta meta;
};

// Normalized relatedness: off-diagonal min-max rescaled residuals, diagonal 1.
struct RelatednessMatrix {
  EntityKind kind = EntityKind::industry;
  int year = 0;
  std::vector<std::string> codes;
  Eigen::MatrixXd values;
  FlowFitMeta fit_meta;

  int index_of(std::string_view code) const {
    auto it = std::lower_bound(codes.begin(), codes.end(), code);
    if (it == codes.end() || *it != code) return -1;
    return static_cast<int>(it - codes.begin());
  }
  double at(std::string_view a, std::string_view b) const {
    int i = index_of(a), j = index_of(b);
    if (i < 0 || j < 0) fail(errc::not_found, "entity not in relatedness matrix");
    return values(i, j);
  }
};

inline FitResiduals fit_flow_regression(const FlowMatrix& flows, const EmploymentVector& employment) {
  if (flows.codes != employment.codes)
    fail(errc::validation, "flow and employment entity lists differ");
  const int n = static_cast<int>(flows.codes.size());

  FitResiduals out;
  out.kind = flows.kind;
  out.year = flows.year;
  out.codes = flows.codes;
  out.residual = Eigen::MatrixXd::Zero(n, n);

  // regressor rows for pairs with positive flow and at least one defined
  // growth / size component (max taken over the defined ones)
  std::vector<std::pair<int, int>> rows;
  std::vector<double> ys, gs, ls;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      double f = flows.counts(i, j);
      if (!(f > 0)) continue;
      double g = std::numeric_limits<double>::quiet_NaN();
      for (int k : {i, j}) {
        double gk = employment.g[k];
        if (std::isnan(gk)) continue;
        g = std::isnan(g) ? gk : std::max(g, gk);
      }
      double l = std::numeric_limits<double>::quiet_NaN();
      for (int k : {i, j}) {
        double lk = employment.L[k];
        if (!(lk > 0)) continue;
        double ll = std::log(lk);
        l = std::isnan(l) ? ll : std::max(l, ll);
      }
      if (std::isnan(g) || std::isnan(l)) continue;
      rows.emplace_back(i, j);
      ys.push_back(std::log(f));
      gs.push_back(g);
      ls.push_back(l);
    }
  }
  const int m = static_cast<int>(rows.size());
  if (m < 3) fail(errc::validation, format("need >= 3 usable pairs, got %d", m));

  Eigen::MatrixXd X(m, 3);
  Eigen::VectorXd y(m);
  for (int r = 0; r < m; ++r) {
    X(r, 0) = 1.0;
    X(r, 1) = gs[r];
    X(r, 2) = ls[r];
    y[r] = ys[r];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3)
    fail(errc::singular_fit, "flow regression design is rank deficient");
  Eigen::VectorXd beta = qr.solve(y);
  Eigen::VectorXd resid = y - X * beta;

  out.meta.beta0 = beta[0];
  out.meta.beta1 = beta[1];
  out.meta.beta2 = beta[2];
  out.meta.n_fitted = m;
  double ybar = y.mean();
  double sst = (y.array() - ybar).square().sum();
  double ssr = resid.squaredNorm();
  out.meta.r2 = sst > 0 ? 1.0 - ssr / sst : 1.0;

  double min_res = resid.minCoeff();
  out.residual.setConstant(min_res);
  out.residual.diagonal().setZero();
  for (int r = 0; r < m; ++r) {
    auto [i, j] = rows[r];
    out.residual(i, j) = resid[r];
    out.residual(j, i) = resid[r];
  }
  out.fitted_pairs = std::move(rows);
  return out;
}

inline RelatednessMatrix normalize_residuals(const FitResiduals& fr) {
  RelatednessMatrix rm;
  rm.kind = fr.kind;
  rm.year = fr.year;
  rm.codes = fr.codes;
  rm.fit_meta = fr.meta;
  const int n = static_cast<int>(fr.codes.size());

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (auto [i, j] : fr.fitted_pairs) {
    lo = std::min(lo, fr.residual(i, j));
    hi = std::max(hi, fr.residual(i, j));
  }
  if (!(hi > lo))
    fail(errc::degenerate, "all residuals identical: min-max normalization undefined");
  double range = hi - lo;

  rm.values = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) {
        rm.values(i, j) = 1.0;
      } else {
        rm.values(i, j) = (fr.residual(i, j) - lo) / range;
      }
    }
  }
  return rm;
}

inline RelatednessMatrix compute_relatedness(const PanelDataset& panel, EntityKind kind, int year) {
  FlowMatrix fm = compute_flows(panel, kind, year);
  EmploymentVector ev = compute_employment(panel, kind, year);
  return normalize_residuals(fit_flow_regression(fm, ev));
}

// ---- network trimming -------------------------------------------------------

struct TrimmedNetwork {
  std::vector<std::string> nodes;
  struct Edge {
    int a = 0, b = 0;  // node indexes, a < b
    double weight = 0;
    bool in_mst = false;
  };
  std::vector<Edge> edges;
  double threshold = 0;
  bool connected = true;  // false: maximum spanning forest of a disconnected graph
};

namespace detail {

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[b] = a;
    return true;
  }

 private:
  std::vector<int> parent_;
};

}  // namespace detail

// Maximum spanning tree plus every edge above the threshold. NaN entries are
// treated as absent edges; ties break on the lexicographic entity pair.
inline TrimmedNetwork trim_network(const RelatednessMatrix& m, double threshold) {
  if (threshold < 0 || threshold > 1) fail(errc::validation, "threshold must lie in [0, 1]");
  const int n = static_cast<int>(m.codes.size());
  TrimmedNetwork net;
  net.nodes = m.codes;
  net.threshold = threshold;

  struct Cand {
    int a, b;
    double w;
  };
  std::vector<Cand> cands;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (!std::isnan(m.values(i, j))) cands.push_back({i, j, m.values(i, j)});
  // codes are sorted, so index order matches lexicographic code order
  std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
    if (x.w != y.w) return x.w > y.w;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });

  detail::UnionFind uf(n);
  int joined = 0;
  for (const auto& c : cands) {
    bool in_mst = uf.unite(c.a, c.b);
    if (in_mst) ++joined;
    if (in_mst || c.w > threshold) net.edges.push_back({c.a, c.b, c.w, in_mst});
  }
  net.connected = (n <= 1) || (joined == n - 1);
  std::sort(net.edges.begin(), net.edges.end(), [](const TrimmedNetwork::Edge& x, const TrimmedNetwork::Edge& y) {
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  return net;
}

}  // namespace laborflow
