#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "laborflow/econ/linear.hpp"

namespace laborflow::econ {

namespace detail {

inline double expit(double x) {
  if (x >= 0) {
    double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

inline double bernoulli_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& eta) {
  // y=1 contributes ln p = -softplus(-eta); y=0 contributes ln(1-p) = -softplus(eta)
  double ll = 0;
  for (int i = 0; i < y.size(); ++i) {
    double x = (y[i] > 0.5) ? -eta[i] : eta[i];
    ll -= std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  }
  return ll;
}

struct IrlsOutcome {
  Eigen::VectorXd beta;
  Eigen::VectorXd p;
  Eigen::MatrixXd xtwx_inv;
  double loglik = 0;
  int iterations = 0;
  double score_norm = kNaN;
  bool converged = false;
  std::vector<int> diverging;  // kept-column positions with |beta|*sd > 30
};

inline IrlsOutcome run_irls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const FitOptions& opt) {
  const int n = static_cast<int>(X.rows());
  const int p = static_cast<int>(X.cols());
  IrlsOutcome out;
  out.beta = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd eta = Eigen::VectorXd::Zero(n);
  out.p = Eigen::VectorXd::Constant(n, 0.5);
  out.loglik = bernoulli_loglik(y, eta);

  Eigen::VectorXd col_sd(p);
  for (int j = 0; j < p; ++j) {
    double mean = X.col(j).mean();
    col_sd[j] = std::sqrt((X.col(j).array() - mean).square().sum() / n);
  }

  for (int it = 1; it <= opt.max_iterations; ++it) {
    out.iterations = it;
    Eigen::VectorXd score = X.transpose() * (y - out.p);
    out.score_norm = score.lpNorm<Eigen::Infinity>();
    if (out.score_norm < 1e-8) {
      out.converged = true;
      break;
    }
    Eigen::ArrayXd w = (out.p.array() * (1.0 - out.p.array())).max(1e-10);
    Eigen::MatrixXd xtwx = X.transpose() * (X.array().colwise() * w).matrix();
    Eigen::VectorXd step = xtwx.ldlt().solve(score);

    double ll_old = out.loglik;
    double scale = 1.0;
    Eigen::VectorXd beta_new, eta_new, p_new;
    double ll_new = 0;
    for (int half = 0; half < 40; ++half) {
      beta_new = out.beta + scale * step;
      eta_new = X * beta_new;
      ll_new = bernoulli_loglik(y, eta_new);
      if (ll_new >= ll_old - 1e-12) break;
      scale *= 0.5;
    }
    out.beta = beta_new;
    eta = eta_new;
    for (int i = 0; i < n; ++i) out.p[i] = expit(eta[i]);
    out.loglik = ll_new;
    if (std::abs(ll_new - ll_old) < 1e-10 * (std::abs(ll_old) + 1.0)) {
      out.converged = true;
      Eigen::VectorXd final_score = X.transpose() * (y - out.p);
      out.score_norm = final_score.lpNorm<Eigen::Infinity>();
      break;
    }
  }
  for (int j = 0; j < p; ++j) {
    double scale_j = col_sd[j] > 0 ? col_sd[j] : 1.0;
    if (col_sd[j] > 0 && std::abs(out.beta[j]) * scale_j > 30.0) out.diverging.push_back(j);
  }
  Eigen::ArrayXd w = (out.p.array() * (1.0 - out.p.array())).max(1e-10);
  Eigen::MatrixXd xtwx = X.transpose() * (X.array().colwise() * w).matrix();
  out.xtwx_inv = xtwx.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  return out;
}

}  // namespace detail

struct LogisticOptions : FitOptions {
  // Fixed-effect levels whose dummy diverges (separation) are dropped together
  // with their observations, then the model is refit.
  bool drop_separated_fe = true;
};

// Maximum-likelihood logistic regression via iteratively reweighted least
// squares. Reports McFadden pseudo R^2 against the intercept-only model and
// small-sample corrected AIC.
inline EstimationResult logistic_fit(const DesignMatrix& d_in, const LogisticOptions& opt = {}) {
  for (int i = 0; i < d_in.y.size(); ++i)
    if (d_in.y[i] != 0.0 && d_in.y[i] != 1.0)
      fail(errc::validation, "logistic outcome must be 0/1");

  DesignMatrix d = d_in;
  std::vector<std::string> dropped_levels;

  for (int round = 0;; ++round) {
    const int n = d.n();
    if (n < 2) fail(errc::validation, "too few observations after separation drops");
    FitOptions lsopt = opt;
    auto sol = detail::solve_least_squares(d.X, d.y, d.names, lsopt);
    const int p = static_cast<int>(sol.kept.size());
    Eigen::MatrixXd Xk(n, p);
    for (int k = 0; k < p; ++k) Xk.col(k) = d.X.col(sol.kept[k]);

    auto irls = detail::run_irls(Xk, d.y, opt);

    if (!irls.diverging.empty()) {
      bool all_fe = true;
      for (int k : irls.diverging) all_fe &= d.factor_of[sol.kept[k]] >= 0;
      if (!all_fe || !opt.drop_separated_fe || round >= 8)
        fail(errc::separation,
             "perfect separation: coefficient diverging on " + d.names[sol.kept[irls.diverging[0]]]);
      // Drop the separated levels and their rows, then refit.
      std::set<int> bad_cols;
      for (int k : irls.diverging) bad_cols.insert(sol.kept[k]);
      std::vector<int> keep_rows;
      for (int i = 0; i < n; ++i) {
        bool hit = false;
        for (int c : bad_cols) hit |= d.X(i, c) != 0.0;
        if (!hit) keep_rows.push_back(i);
      }
      for (int c : bad_cols) dropped_levels.push_back(d.names[c]);
      DesignMatrix nd = d.subset_rows(keep_rows);
      // remove the dummy columns entirely
      std::vector<int> keep_cols;
      for (int c = 0; c < d.p(); ++c)
        if (!bad_cols.count(c)) keep_cols.push_back(c);
      DesignMatrix nd2;
      nd2.y = nd.y;
      nd2.cluster = nd.cluster;
      nd2.n_clusters = nd.n_clusters;
      nd2.has_intercept = nd.has_intercept;
      nd2.factor_names = nd.factor_names;
      nd2.warnings = nd.warnings;
      nd2.X.resize(nd.n(), static_cast<int>(keep_cols.size()));
      for (size_t c = 0; c < keep_cols.size(); ++c) {
        nd2.X.col(c) = nd.X.col(keep_cols[c]);
        nd2.names.push_back(nd.names[keep_cols[c]]);
        nd2.factor_of.push_back(nd.factor_of[keep_cols[c]]);
      }
      d = std::move(nd2);
      continue;
    }

    if (!irls.converged)
      fail(errc::no_convergence,
           format("IRLS did not converge in %d iterations (score norm %.3e)", irls.iterations,
                  irls.score_norm));

    EstimationResult res;
    res.col_index = sol.kept;
    for (int j : sol.kept) res.names.push_back(d.names[j]);
    for (int j : sol.dropped) res.dropped_collinear.push_back(d.names[j]);
    res.dropped_levels = dropped_levels;
    res.beta = irls.beta;
    res.n = n;
    res.p = p;
    res.convergence = {irls.iterations, irls.score_norm, irls.converged};
    res.fitted = irls.p;
    res.residuals = d.y - irls.p;
    res.loglik = irls.loglik;

    // intercept-only null likelihood
    double ybar = d.y.mean();
    res.loglik_null = (ybar > 0 && ybar < 1)
                          ? n * (ybar * std::log(ybar) + (1 - ybar) * std::log(1 - ybar))
                          : 0.0;
    res.mcfadden = res.loglik_null != 0 ? 1.0 - res.loglik / res.loglik_null : kNaN;
    res.aic = 2.0 * p - 2.0 * res.loglik;
    res.aicc = (n - p - 1) > 0 ? res.aic + 2.0 * p * (p + 1.0) / (n - p - 1.0) : kNaN;

    res.cov_model = irls.xtwx_inv;
    Eigen::MatrixXd scores = Xk.array().colwise() * res.residuals.array();
    detail::apply_cov_mode(res, d, opt, irls.xtwx_inv, scores);
    return res;
  }
}

struct MarginalEffect {
  std::string name;
  double estimate = 0;
  double se = 0;
};

// Average marginal effect of each continuous covariate in a logistic fit:
// mean over rows of beta_k p (1-p), with delta-method standard errors taken
// from the fit's reported covariance.
inline std::vector<MarginalEffect> average_marginal_effects(const EstimationResult& fit,
                                                             const DesignMatrix& d) {
  const int p = static_cast<int>(fit.beta.size());
  const int n = fit.n;
  if (fit.fitted.size() != n || std::isnan(fit.loglik))
    fail(errc::validation, "average marginal effects need a logistic fit");
  Eigen::MatrixXd Xk(n, p);
  for (int k = 0; k < p; ++k) Xk.col(k) = d.X.col(fit.col_index[k]);

  Eigen::ArrayXd pq = fit.fitted.array() * (1.0 - fit.fitted.array());
  Eigen::ArrayXd dpq = pq * (1.0 - 2.0 * fit.fitted.array());
  double mean_pq = pq.mean();

  std::vector<MarginalEffect> out;
  for (int k = 0; k < p; ++k) {
    if (fit.names[k] == "(Intercept)") continue;
    if (fit.col_index[k] < static_cast<int>(d.factor_of.size()) &&
        d.factor_of[fit.col_index[k]] >= 0)
      continue;  // dummies are not continuous covariates
    MarginalEffect me;
    me.name = fit.names[k];
    me.estimate = fit.beta[k] * mean_pq;
    Eigen::VectorXd grad(p);
    for (int j = 0; j < p; ++j) {
      double g = (Xk.col(j).array() * dpq).mean() * fit.beta[k];
      if (j == k) g += mean_pq;
      grad[j] = g;
    }
    me.se = std::sqrt(grad.dot(fit.cov * grad));
    out.push_back(me);
  }
  return out;
}

}  // namespace laborflow::econ
