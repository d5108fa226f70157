#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "laborflow/common.hpp"

namespace laborflow::econ {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
inline double two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

inline std::string significance_stars(double p) {
  if (p < 0.01) return "***";
  if (p < 0.05) return "**";
  if (p < 0.1) return "*";
  return "";
}

struct ConvergenceInfo {
  int iterations = 0;
  double score_norm = kNaN;
  bool converged = true;
};

struct EstimationResult {
  std::vector<std::string> names;  // kept coefficient names
  std::vector<int> col_index;      // position of each kept column in the design
  Eigen::VectorXd beta;
  Eigen::MatrixXd cov;        // covariance backing reported standard errors
  Eigen::MatrixXd cov_model;  // model-based covariance
  std::string cov_kind = "model";  // model | hc1 | cluster

  // fit statistics (NaN where not applicable)
  double loglik = kNaN;
  double loglik_null = kNaN;
  double mcfadden = kNaN;
  double aic = kNaN;
  double aicc = kNaN;
  double r2 = kNaN;
  double adj_r2 = kNaN;
  double f_stat = kNaN;
  int f_df1 = 0, f_df2 = 0;
  double wald = kNaN;
  int wald_df = 0;

  int n = 0;
  int p = 0;
  int n_clusters = 0;
  int n_events = 0;
  ConvergenceInfo convergence;

  std::vector<std::string> dropped_collinear;
  std::vector<std::string> dropped_levels;  // separation-dropped FE levels
  std::vector<std::string> notes;

  Eigen::VectorXd fitted;     // yhat (OLS) or p (logistic) or eta (Cox)
  Eigen::VectorXd residuals;  // y - fitted (OLS/logistic)

  // The design the fit actually ran on. Differs from the caller's design when
  // separation dropped fixed-effect levels; downstream consumers (marginal
  // effects, re-clustering) must align with this one.
  std::shared_ptr<const void> fit_design_storage;
  const void* fit_design = nullptr;

  int find(std::string_view name) const {
    for (size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<int>(i);
    return -1;
  }
  double coef(std::string_view name) const {
    int k = find(name);
    if (k < 0) fail(errc::not_found, "no coefficient named " + std::string(name));
    return beta[k];
  }
  double se(int k) const { return std::sqrt(cov(k, k)); }
  double se(std::string_view name) const {
    int k = find(name);
    if (k < 0) fail(errc::not_found, "no coefficient named " + std::string(name));
    return se(k);
  }
  double zstat(int k) const { return beta[k] / se(k); }
  double pvalue(int k) const { return two_sided_p(zstat(k)); }
  double pvalue(std::string_view name) const {
    int k = find(name);
    if (k < 0) fail(errc::not_found, "no coefficient named " + std::string(name));
    return pvalue(k);
  }
};

}  // namespace laborflow::econ
