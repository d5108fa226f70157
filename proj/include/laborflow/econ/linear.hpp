#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "laborflow/econ/design.hpp"
#include "laborflow/econ/result.hpp"

namespace laborflow::econ {

enum class CovMode {
  automatic,  // clustered when the design carries clusters, else model-based
  model,
  robust,   // HC1
  cluster,
};

struct FitOptions {
  bool drop_collinear = false;
  double rank_tol = 1e-10;
  CovMode cov = CovMode::automatic;
  int max_iterations = 100;  // IRLS / Newton
};

namespace detail {

struct LsSolution {
  Eigen::VectorXd beta;     // over kept columns
  std::vector<int> kept;    // ascending design-column indexes
  std::vector<int> dropped;
  Eigen::MatrixXd xtx_inv;  // (X_kept' X_kept)^-1
};

// Rank-revealing least squares with column scaling; collinear columns are
// either dropped (reported) or rejected, per options.
inline LsSolution solve_least_squares(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                      const std::vector<std::string>& names, const FitOptions& opt) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  if (n <= 0 || p <= 0) fail(errc::validation, "empty design");

  Eigen::VectorXd scale(p);
  std::vector<int> nonzero;
  std::vector<int> dropped;
  for (int j = 0; j < p; ++j) {
    double nrm = X.col(j).norm();
    scale[j] = nrm;
    if (nrm > 0)
      nonzero.push_back(j);
    else
      dropped.push_back(j);
  }

  Eigen::MatrixXd Xs(n, static_cast<int>(nonzero.size()));
  for (size_t k = 0; k < nonzero.size(); ++k) Xs.col(k) = X.col(nonzero[k]) / scale[nonzero[k]];

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xs);
  qr.setThreshold(opt.rank_tol);
  int rank = static_cast<int>(qr.rank());
  std::vector<int> kept;
  if (rank == static_cast<int>(nonzero.size())) {
    kept = nonzero;
  } else {
    auto perm = qr.colsPermutation().indices();
    for (int k = 0; k < rank; ++k) kept.push_back(nonzero[perm[k]]);
    for (int k = rank; k < static_cast<int>(nonzero.size()); ++k)
      dropped.push_back(nonzero[perm[k]]);
    std::sort(kept.begin(), kept.end());
    std::sort(dropped.begin(), dropped.end());
  }
  if (!dropped.empty() && !opt.drop_collinear) {
    std::string what;
    for (int j : dropped) what += (what.empty() ? "" : ", ") + names[j];
    fail(errc::singular_fit, "collinear columns: " + what);
  }
  if (static_cast<int>(kept.size()) > n)
    fail(errc::validation, format("more columns than rows (%zu > %d)", kept.size(), n));

  Eigen::MatrixXd Xk(n, static_cast<int>(kept.size()));
  Eigen::VectorXd sk(static_cast<int>(kept.size()));
  for (size_t k = 0; k < kept.size(); ++k) {
    Xk.col(k) = X.col(kept[k]) / scale[kept[k]];
    sk[k] = scale[kept[k]];
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr2(Xk);
  Eigen::VectorXd beta_s = qr2.solve(y);
  Eigen::MatrixXd R = qr2.matrixQR().topRows(Xk.cols()).triangularView<Eigen::Upper>();
  Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(Xk.cols(), Xk.cols()));
  Eigen::MatrixXd xtx_inv_s = Rinv * Rinv.transpose();

  LsSolution sol;
  sol.kept = kept;
  sol.dropped = dropped;
  sol.beta = beta_s.array() / sk.array();
  sol.xtx_inv = xtx_inv_s.array() * (1.0 / (sk * sk.transpose()).array());
  return sol;
}

// Sandwich covariance over per-observation score rows U (n x p_kept), with
// bread B (p_kept x p_kept). Small-sample factors: HC1 uses n/(n-p); the
// clustered estimator uses G/(G-1) * (n-1)/(n-p).
inline Eigen::MatrixXd sandwich_cov(const Eigen::MatrixXd& bread, const Eigen::MatrixXd& scores,
                                    const std::vector<int>& cluster, int n_clusters, int n, int p) {
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(scores.cols(), scores.cols());
  double c = 1.0;
  if (cluster.empty()) {
    for (int i = 0; i < scores.rows(); ++i)
      meat.noalias() += scores.row(i).transpose() * scores.row(i);
    c = static_cast<double>(n) / std::max(1, n - p);
  } else {
    if (n_clusters < 2) fail(errc::validation, "clustered covariance needs >= 2 clusters");
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(n_clusters, scores.cols());
    for (int i = 0; i < scores.rows(); ++i) sums.row(cluster[i]) += scores.row(i);
    for (int g = 0; g < n_clusters; ++g) meat.noalias() += sums.row(g).transpose() * sums.row(g);
    c = (static_cast<double>(n_clusters) / (n_clusters - 1)) *
        (static_cast<double>(n - 1) / std::max(1, n - p));
  }
  return c * bread * meat * bread;
}

inline void apply_cov_mode(EstimationResult& res, const DesignMatrix& d, const FitOptions& opt,
                           const Eigen::MatrixXd& bread, const Eigen::MatrixXd& scores) {
  CovMode mode = opt.cov;
  if (mode == CovMode::automatic) mode = d.cluster.empty() ? CovMode::model : CovMode::cluster;
  switch (mode) {
    case CovMode::model:
      res.cov = res.cov_model;
      res.cov_kind = "model";
      break;
    case CovMode::robust:
      res.cov = sandwich_cov(bread, scores, {}, 0, res.n, res.p);
      res.cov_kind = "hc1";
      break;
    case CovMode::cluster:
      if (d.cluster.empty()) fail(errc::validation, "no cluster ids in design");
      res.cov = sandwich_cov(bread, scores, d.cluster, d.n_clusters, res.n, res.p);
      res.cov_kind = "cluster";
      res.n_clusters = d.n_clusters;
      break;
    case CovMode::automatic:
      break;
  }
}

}  // namespace detail

// Ordinary least squares with R^2, adjusted R^2 and the overall F test of the
// non-intercept coefficients.
inline EstimationResult ols_fit(const DesignMatrix& d, const FitOptions& opt = {}) {
  const int n = d.n();
  auto sol = detail::solve_least_squares(d.X, d.y, d.names, opt);
  const int p = static_cast<int>(sol.kept.size());
  if (n <= p) fail(errc::validation, format("n = %d too small for p = %d", n, p));

  EstimationResult res;
  res.col_index = sol.kept;
  for (int j : sol.kept) res.names.push_back(d.names[j]);
  for (int j : sol.dropped) res.dropped_collinear.push_back(d.names[j]);
  res.beta = sol.beta;
  res.n = n;
  res.p = p;

  Eigen::MatrixXd Xk(n, p);
  for (int k = 0; k < p; ++k) Xk.col(k) = d.X.col(sol.kept[k]);
  res.fitted = Xk * res.beta;
  res.residuals = d.y - res.fitted;

  double ssr = res.residuals.squaredNorm();
  double sst = d.has_intercept ? (d.y.array() - d.y.mean()).square().sum()
                               : d.y.squaredNorm();
  res.r2 = sst > 0 ? 1.0 - ssr / sst : 1.0;
  res.adj_r2 = 1.0 - (1.0 - res.r2) * (n - 1.0) / (n - p);
  int df1 = d.has_intercept ? p - 1 : p;
  int df2 = n - p;
  if (df1 > 0 && df2 > 0 && ssr > 0) {
    res.f_stat = ((sst - ssr) / df1) / (ssr / df2);
    res.f_df1 = df1;
    res.f_df2 = df2;
  }

  double sigma2 = ssr / df2;
  res.cov_model = sigma2 * sol.xtx_inv;
  Eigen::MatrixXd scores = Xk.array().colwise() * res.residuals.array();
  detail::apply_cov_mode(res, d, opt, sol.xtx_inv, scores);
  return res;
}

// Spec-level entry point: recomputes the requested sandwich for an OLS or
// logistic fit from its stored scores.
inline Eigen::MatrixXd clustered_se(const EstimationResult& fit, const DesignMatrix& d) {
  if (d.cluster.empty()) fail(errc::validation, "design has no cluster ids");
  if (d.n_clusters < 2) fail(errc::validation, "clustered covariance needs >= 2 clusters");
  const int p = static_cast<int>(fit.col_index.size());
  Eigen::MatrixXd Xk(d.n(), p);
  for (int k = 0; k < p; ++k) Xk.col(k) = d.X.col(fit.col_index[k]);
  Eigen::MatrixXd scores = Xk.array().colwise() * fit.residuals.array();
  Eigen::MatrixXd bread;
  if (!std::isnan(fit.loglik)) {
    // logistic: bread is (X' W X)^-1 at the converged p
    Eigen::ArrayXd w = fit.fitted.array() * (1.0 - fit.fitted.array());
    Eigen::MatrixXd xtwx = Xk.transpose() * (Xk.array().colwise() * w).matrix();
    bread = xtwx.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  } else {
    bread = (Xk.transpose() * Xk).ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  }
  return detail::sandwich_cov(bread, scores, d.cluster, d.n_clusters, fit.n, fit.p);
}

}  // namespace laborflow::econ
