#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "attnk/panel.hpp"

namespace attnk {

struct EstimatorOptions {
  int min_obs = 8;        // drop forecasters with fewer observations
  int skip_initial = 4;   // drop the earliest periods (initialization damping)
  int nw_lags = -1;       // Newey-West truncation; -1 = floor(4 (T/100)^(2/9))
  double beta1_tol = 0.05;  // |beta1| below this leaves gamma undefined
  int max_lags = 0;       // GMM instrument-lag cap; 0 = all available lags
};

/// Result of one attention regression: pi_e' = beta_i + beta1 pi_e +
/// beta2 (pi - pi_e) + u, with gamma = beta2 / beta1.
struct EstimationResult {
  std::string estimator;
  double intercept = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  Eigen::Matrix2d cov_b12 = Eigen::Matrix2d::Zero();
  bool gamma_defined = false;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double se_gamma = std::numeric_limits<double>::quiet_NaN();
  int n_obs = 0;
  // Arellano-Bond serial-correlation tests on differenced residuals
  // (system GMM only).
  double ar1_stat = std::numeric_limits<double>::quiet_NaN();
  double ar1_p = std::numeric_limits<double>::quiet_NaN();
  double ar2_stat = std::numeric_limits<double>::quiet_NaN();
  double ar2_p = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> warnings;
};

struct AttentionWindow {
  int start = 0;
  int end = 0;  // exclusive
  double gamma_hat = 0.0;
  double se_gamma = 0.0;
  double rho_hat = 0.0;
  double sigma_pi_hat = 0.0;  // std of realized inflation in the window
  double median_pi = 0.0;
  int n_obs = 0;
};

struct AttentionPath {
  std::vector<AttentionWindow> windows;
  std::vector<std::string> warnings;  // skipped windows, undefined gammas
};

enum class EstimatorKind { PooledOls, SystemGmm, Consensus, TimeFe };

inline const char* estimator_name(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::PooledOls: return "pooled_ols";
    case EstimatorKind::SystemGmm: return "system_gmm_1step";
    case EstimatorKind::Consensus: return "consensus_ols";
    case EstimatorKind::TimeFe: return "time_fe";
  }
  return "?";
}

namespace detail {

inline double normal_sf2(double z) {  // two-sided p-value
  return std::erfc(std::abs(z) / std::sqrt(2.0));
}

inline int default_nw_lags(int T) {
  return static_cast<int>(std::floor(4.0 * std::pow(T / 100.0, 2.0 / 9.0)));
}

struct RegRow {
  int id;
  int t;
  double y;    // pi_e_{t+1|t}
  double x1;   // pi_e_{t|t-1}
  double fe;   // pi_t - pi_e_{t|t-1}
  double pi;   // realized pi_t
};

/// Regression rows with consecutive-period lags, after the min-obs and
/// initial-period trims.
inline std::vector<RegRow> build_rows(const PanelData& panel, const EstimatorOptions& opt) {
  std::vector<RegRow> rows;
  int t_min = std::numeric_limits<int>::max();
  for (const auto& r : panel.records) t_min = std::min(t_min, r.t);
  for (int id : panel.forecaster_ids()) {
    auto s = panel.series(id);
    if (static_cast<int>(s.size()) < opt.min_obs) continue;
    for (std::size_t j = 1; j < s.size(); ++j) {
      if (s[j].t != s[j - 1].t + 1) continue;
      if (s[j].t - t_min < opt.skip_initial) continue;
      rows.push_back({id, s[j].t, s[j].expectation, s[j - 1].expectation, s[j].realized - s[j - 1].expectation,
                      s[j].realized});
    }
  }
  return rows;
}

inline void finish_gamma(EstimationResult& res, const EstimatorOptions& opt) {
  if (std::abs(res.beta1) < opt.beta1_tol) {
    res.gamma_defined = false;
    res.warnings.push_back("gamma undefined: |beta1| below tolerance");
    return;
  }
  res.gamma_defined = true;
  res.gamma = res.beta2 / res.beta1;
  Eigen::Vector2d g(-res.beta2 / (res.beta1 * res.beta1), 1.0 / res.beta1);
  res.se_gamma = std::sqrt(std::max(0.0, double(g.transpose() * res.cov_b12 * g)));
  if (res.gamma < 0.0 || res.gamma > 1.0) res.warnings.push_back("gamma outside [0,1]");
}

}  // namespace detail

/// Bartlett-kernel HAC covariance of OLS coefficients:
///   (X'X)^-1 [ G_0 + sum_{l=1..L} w_l (G_l + G_l') ] (X'X)^-1,
/// with w_l = 1 - l/(L+1). L = 0 collapses to the White covariance. The
/// meat is positive semi-definite by construction of the Bartlett weights.
inline Eigen::MatrixXd newey_west_cov(const Eigen::MatrixXd& X, const Eigen::VectorXd& e, int L) {
  const int T = static_cast<int>(X.rows());
  const int k = static_cast<int>(X.cols());
  if (e.size() != T) throw std::invalid_argument("newey_west_cov: dimension mismatch");
  if (L < 0 || L >= T) throw std::invalid_argument("newey_west_cov: need 0 <= L < T");
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(k, k);
  for (int l = 0; l <= L; ++l) {
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(k, k);
    for (int t = l; t < T; ++t) G += e[t] * e[t - l] * X.row(t).transpose() * X.row(t - l);
    const double w = 1.0 - static_cast<double>(l) / (L + 1);
    S += (l == 0) ? G : w * (G + G.transpose());
  }
  Eigen::MatrixXd bread = (X.transpose() * X).inverse();
  return bread * S * bread;
}

/// Pooled OLS of the updating regression with a common intercept.
/// Standard errors are clustered by forecaster (robust to arbitrary
/// within-forecaster correlation).
inline EstimationResult pooled_ols(const PanelData& panel, const EstimatorOptions& opt = {}) {
  auto rows = detail::build_rows(panel, opt);
  const int n = static_cast<int>(rows.size());
  if (n < 4) throw std::runtime_error("pooled_ols: too few usable observations");
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = rows[i].x1;
    X(i, 2) = rows[i].fe;
    y[i] = rows[i].y;
  }
  Eigen::MatrixXd XtX = X.transpose() * X;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(XtX);
  if (!lu.isInvertible()) throw std::runtime_error("pooled_ols: rank-deficient design");
  Eigen::VectorXd b = lu.solve(X.transpose() * y);
  Eigen::VectorXd e = y - X * b;

  // Cluster-by-forecaster sandwich.
  std::map<int, Eigen::Vector3d> scores;
  for (int i = 0; i < n; ++i) {
    auto [it, fresh] = scores.insert({rows[i].id, Eigen::Vector3d::Zero()});
    it->second += e[i] * X.row(i).transpose();
  }
  Eigen::Matrix3d meat = Eigen::Matrix3d::Zero();
  for (const auto& [id, s] : scores) meat += s * s.transpose();
  Eigen::MatrixXd bread = lu.inverse();
  Eigen::Matrix3d V = bread * meat * bread;

  EstimationResult res;
  res.estimator = estimator_name(EstimatorKind::PooledOls);
  res.intercept = b[0];
  res.beta1 = b[1];
  res.beta2 = b[2];
  res.cov_b12 = V.bottomRightCorner<2, 2>();
  res.n_obs = n;
  detail::finish_gamma(res, opt);
  return res;
}

/// One-step Blundell-Bond system GMM of the updating regression.
///
/// The regression is reparametrized as y_it = beta_i + a y_{i,t-1} + b pi_t
/// with a = beta1 - beta2, b = beta2, so the lagged forecast is the lagged
/// dependent variable. The differenced equation is instrumented by collapsed
/// lagged levels starting at lag 3, the levels equation by the collapsed
/// twice-lagged difference; realized inflation instruments itself. Starting
/// one lag deeper than the no-measurement-error minimum keeps the moments
/// valid when reported expectations carry i.i.d. reporting noise (which
/// makes the equation errors MA(1)). Standard errors are robust, clustered
/// by forecaster.
inline EstimationResult fixed_effects_system_gmm(const PanelData& panel, const EstimatorOptions& opt = {}) {
  auto rows = detail::build_rows(panel, opt);
  if (rows.size() < 8) throw std::runtime_error("system_gmm: too few usable observations");

  // Group rows by forecaster; rows are consecutive in t within runs.
  std::map<int, std::vector<detail::RegRow>> by_id;
  for (const auto& r : rows) by_id[r.id].push_back(r);
  for (auto& [id, v] : by_id)
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.t < b.t; });

  int max_depth = 0;
  for (auto& [id, v] : by_id) max_depth = std::max(max_depth, static_cast<int>(v.size()));
  int n_lag_cols = std::max(1, max_depth - 2);
  if (opt.max_lags > 0) n_lag_cols = std::min(n_lag_cols, opt.max_lags);

  // Z columns: [diff-lag instruments (n_lag_cols) | dpi | const | pi | dylag]
  const int nz = n_lag_cols + 4;
  const int np = 3;  // (mu, a, b)

  struct Block {
    Eigen::MatrixXd X, Z;
    Eigen::VectorXd y;
    Eigen::MatrixXd H;
    std::vector<int> diff_t;  // periods of the diff rows, for the AR tests
    int n_diff = 0;
  };
  std::vector<Block> blocks;
  int n_rows_total = 0;

  for (auto& [id, v] : by_id) {
    // y-series indexed by position j; y_j = v[j].y, and v[j].x1 = y_{j-1}
    // whenever periods are consecutive.
    // Differenced rows are collected first, level rows after, so the block
    // weighting matrix and the AR tests can address the diff rows as a
    // leading contiguous range.
    std::vector<Eigen::RowVectorXd> Xd, Zd, Xl, Zl;
    std::vector<double> yd, yl;
    std::vector<int> difft;
    auto consecutive = [&](std::size_t j, std::size_t l) { return v[j].t - v[j - l].t == static_cast<int>(l); };
    for (std::size_t j = 1; j < v.size(); ++j) {
      if (!consecutive(j, 1)) continue;
      // Differenced equation needs y_{j-2} as well.
      if (j >= 2 && consecutive(j, 2)) {
        Eigen::RowVectorXd x = Eigen::RowVectorXd::Zero(np);
        x[1] = v[j].x1 - v[j - 1].x1;          // d y_{t-1}
        x[2] = v[j].pi - v[j - 1].pi;          // d pi_t
        Eigen::RowVectorXd z = Eigen::RowVectorXd::Zero(nz);
        for (int l = 3; l <= static_cast<int>(j); ++l) {
          const int col = l - 3;
          if (col >= n_lag_cols) break;
          if (!consecutive(j, static_cast<std::size_t>(l))) break;
          z[col] = v[j - l].y;                 // level lag l (collapsed)
        }
        z[n_lag_cols + 0] = x[2];              // d pi instruments itself
        Xd.push_back(x);
        Zd.push_back(z);
        yd.push_back(v[j].y - v[j - 1].y);
        difft.push_back(v[j].t);
      }
      // Levels equation, instrumented by the lagged difference.
      if (j >= 2 && consecutive(j, 2)) {
        Eigen::RowVectorXd x(np);
        x[0] = 1.0;
        x[1] = v[j].x1;
        x[2] = v[j].pi;
        Eigen::RowVectorXd z = Eigen::RowVectorXd::Zero(nz);
        z[n_lag_cols + 1] = 1.0;
        z[n_lag_cols + 2] = v[j].pi;
        z[n_lag_cols + 3] = v[j - 2].y - v[j - 2].x1;  // d y_{t-2}
        Xl.push_back(x);
        Zl.push_back(z);
        yl.push_back(v[j].y);
      }
    }
    if (Xd.empty() && Xl.empty()) continue;
    Block blk;
    const int ndiff = static_cast<int>(Xd.size());
    const int m = ndiff + static_cast<int>(Xl.size());
    blk.X.resize(m, np);
    blk.Z.resize(m, nz);
    blk.y.resize(m);
    for (int i = 0; i < ndiff; ++i) {
      blk.X.row(i) = Xd[i];
      blk.Z.row(i) = Zd[i];
      blk.y[i] = yd[i];
    }
    for (int i = ndiff; i < m; ++i) {
      blk.X.row(i) = Xl[i - ndiff];
      blk.Z.row(i) = Zl[i - ndiff];
      blk.y[i] = yl[i - ndiff];
    }
    // One-step weighting blocks: tridiag(2,-1) for adjacent differenced
    // rows, identity for levels rows.
    blk.H = Eigen::MatrixXd::Identity(m, m);
    for (int i = 0; i < ndiff; ++i) {
      blk.H(i, i) = 2.0;
      if (i + 1 < ndiff && difft[i + 1] == difft[i] + 1) {
        blk.H(i, i + 1) = -1.0;
        blk.H(i + 1, i) = -1.0;
      }
    }
    blk.diff_t = difft;
    blk.n_diff = ndiff;
    n_rows_total += m;
    blocks.push_back(std::move(blk));
  }
  if (blocks.empty()) throw std::runtime_error("system_gmm: no usable forecaster blocks");

  EstimationResult res;
  res.estimator = estimator_name(EstimatorKind::SystemGmm);
  if (nz >= n_rows_total) res.warnings.push_back("weak identification: instrument count >= observation count");

  Eigen::MatrixXd ZHZ = Eigen::MatrixXd::Zero(nz, nz);
  Eigen::MatrixXd XtZ = Eigen::MatrixXd::Zero(np, nz);
  Eigen::VectorXd Zty = Eigen::VectorXd::Zero(nz);
  for (const auto& b : blocks) {
    ZHZ += b.Z.transpose() * b.H * b.Z;
    XtZ += b.X.transpose() * b.Z;
    Zty += b.Z.transpose() * b.y;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> luW(ZHZ);
  // Collapsed instrument columns can be structurally empty (short panels);
  // drop them rather than fail.
  Eigen::MatrixXd W;
  if (luW.isInvertible()) {
    W = luW.inverse();
  } else {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(ZHZ);
    if (cod.rank() == 0) throw std::runtime_error("system_gmm: singular weighting matrix");
    W = cod.pseudoInverse();
    res.warnings.push_back("weighting matrix rank-deficient; pseudo-inverse used");
  }

  Eigen::MatrixXd M = XtZ * W * XtZ.transpose();
  Eigen::FullPivLU<Eigen::MatrixXd> luM(M);
  if (!luM.isInvertible()) throw std::runtime_error("system_gmm: singular GMM normal matrix");
  Eigen::VectorXd theta = luM.solve(XtZ * W * Zty);

  // Robust covariance, clustered by forecaster.
  Eigen::MatrixXd Omega = Eigen::MatrixXd::Zero(nz, nz);
  for (const auto& b : blocks) {
    Eigen::VectorXd e = b.y - b.X * theta;
    Eigen::VectorXd ze = b.Z.transpose() * e;
    Omega += ze * ze.transpose();
  }
  Eigen::MatrixXd Minv = luM.inverse();
  Eigen::MatrixXd Vtheta = Minv * XtZ * W * Omega * W * XtZ.transpose() * Minv;

  // Map (mu, a, b) -> (beta1, beta2) = (a + b, b).
  Eigen::Matrix<double, 2, 3> G;
  G << 0, 1, 1, 0, 0, 1;
  res.intercept = theta[0];
  res.beta1 = theta[1] + theta[2];
  res.beta2 = theta[2];
  res.cov_b12 = G * Vtheta * G.transpose();
  res.n_obs = n_rows_total;
  detail::finish_gamma(res, opt);

  // Arellano-Bond AR(1)/AR(2) tests on the differenced residuals, with the
  // standard variance correction for estimated coefficients:
  //   v = sum_i s_i^2 - 2 q' cov(theta_hat, sum_i Z_i'e_i) + q' V(theta) q,
  // s_i = e_{i,-l}'e_i over diff rows, q = sum_i X_i'e_{i,-l}.
  for (int lag = 1; lag <= 2; ++lag) {
    double num = 0.0, term1 = 0.0;
    Eigen::VectorXd q = Eigen::VectorXd::Zero(np);
    Eigen::VectorXd zes = Eigen::VectorXd::Zero(nz);
    for (const auto& b : blocks) {
      Eigen::VectorXd e_all = b.y - b.X * theta;
      Eigen::VectorXd e = e_all.head(b.n_diff);
      Eigen::VectorXd elag = Eigen::VectorXd::Zero(b.n_diff);
      for (int i = 0; i < b.n_diff; ++i)
        for (int j = 0; j < i; ++j)
          if (b.diff_t[i] - b.diff_t[j] == lag) elag[i] = e[j];
      const double s = elag.dot(e);
      num += s;
      term1 += s * s;
      q += b.X.topRows(b.n_diff).transpose() * elag;
      zes += (b.Z.transpose() * e_all) * s;
    }
    const double middle = q.dot(Minv * (XtZ * (W * zes)));
    const double den = term1 - 2.0 * middle + q.dot(Vtheta * q);
    if (den > 0.0) {
      const double stat = num / std::sqrt(den);
      if (lag == 1) {
        res.ar1_stat = stat;
        res.ar1_p = detail::normal_sf2(stat);
      } else {
        res.ar2_stat = stat;
        res.ar2_p = detail::normal_sf2(stat);
      }
    }
  }
  return res;
}

/// Updating regression on a single aggregate (consensus) series with
/// Newey-West standard errors.
inline EstimationResult consensus_ols(const std::vector<double>& expectation, const std::vector<double>& realized,
                                      int nw_lags = -1, const EstimatorOptions& opt = {}) {
  if (expectation.size() != realized.size()) throw std::invalid_argument("consensus_ols: series length mismatch");
  const int T = static_cast<int>(expectation.size());
  if (T < 10) throw std::runtime_error("consensus_ols: series too short (need >= 10)");
  const int n = T - 1;
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  for (int t = 1; t < T; ++t) {
    X(t - 1, 0) = 1.0;
    X(t - 1, 1) = expectation[t - 1];
    X(t - 1, 2) = realized[t] - expectation[t - 1];
    y[t - 1] = expectation[t];
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(X.transpose() * X);
  if (!lu.isInvertible()) throw std::runtime_error("consensus_ols: rank-deficient design");
  Eigen::VectorXd b = lu.solve(X.transpose() * y);
  Eigen::VectorXd e = y - X * b;
  const int L = (nw_lags >= 0) ? nw_lags : detail::default_nw_lags(n);
  Eigen::MatrixXd V = newey_west_cov(X, e, std::min(L, n - 1));

  EstimationResult res;
  res.estimator = estimator_name(EstimatorKind::Consensus);
  res.intercept = b[0];
  res.beta1 = b[1];
  res.beta2 = b[2];
  res.cov_b12 = V.bottomRightCorner<2, 2>();
  res.n_obs = n;
  detail::finish_gamma(res, opt);
  return res;
}

/// Time-fixed-effects estimate of attention given an external persistence
/// estimate: regresses (pi_e' - rho pi_e)/rho on forecaster and period fixed
/// effects plus the forecast error; the error coefficient is gamma.
inline EstimationResult time_fe_attention(const PanelData& panel, double rho_hat, const EstimatorOptions& opt = {}) {
  if (!(rho_hat > 1e-6) || rho_hat > 1.0 + 1e-12)
    throw std::invalid_argument("time_fe_attention: rho_hat must be in (0,1]");
  auto rows = detail::build_rows(panel, opt);
  const int n = static_cast<int>(rows.size());
  if (n < 4) throw std::runtime_error("time_fe_attention: too few usable observations");

  Eigen::VectorXd dep(n), x(n);
  for (int i = 0; i < n; ++i) {
    dep[i] = (rows[i].y - rho_hat * rows[i].x1) / rho_hat;
    x[i] = rows[i].fe;
  }
  // Two-way within transformation by alternating group demeaning.
  auto demean = [&](Eigen::VectorXd& v) {
    for (int pass = 0; pass < 50; ++pass) {
      double change = 0.0;
      for (int mode = 0; mode < 2; ++mode) {
        std::map<int, std::pair<double, int>> acc;
        for (int i = 0; i < n; ++i) {
          const int key = mode == 0 ? rows[i].id : rows[i].t;
          auto& a = acc[key];
          a.first += v[i];
          a.second += 1;
        }
        for (int i = 0; i < n; ++i) {
          const int key = mode == 0 ? rows[i].id : rows[i].t;
          const auto& a = acc[key];
          const double mu = a.first / a.second;
          v[i] -= mu;
          change = std::max(change, std::abs(mu));
        }
      }
      if (change < 1e-13) break;
    }
  };
  demean(dep);
  demean(x);

  const double sxx = x.squaredNorm();
  if (sxx < 1e-14) throw std::runtime_error("time_fe_attention: no within variation in the forecast error");
  const double g = x.dot(dep) / sxx;
  Eigen::VectorXd e = dep - g * x;
  // Cluster-by-forecaster variance of the within slope.
  std::map<int, double> score;
  for (int i = 0; i < n; ++i) score[rows[i].id] += x[i] * e[i];
  double meat = 0.0;
  for (const auto& [id, s] : score) meat += s * s;

  EstimationResult res;
  res.estimator = estimator_name(EstimatorKind::TimeFe);
  res.beta1 = rho_hat;
  res.beta2 = rho_hat * g;  // report on the same (beta1,beta2) scale
  res.gamma_defined = true;
  res.gamma = g;
  res.se_gamma = std::sqrt(meat) / sxx;
  res.cov_b12.setZero();
  res.cov_b12(1, 1) = rho_hat * rho_hat * res.se_gamma * res.se_gamma;
  res.n_obs = n;
  if (res.gamma < 0.0 || res.gamma > 1.0) res.warnings.push_back("gamma outside [0,1]");
  return res;
}

/// Rolling-window attention estimates plus window-level inflation moments.
inline AttentionPath rolling_attention(const PanelData& panel, int window_length, int step, EstimatorKind kind,
                                       const EstimatorOptions& opt = {}) {
  if (step < 1) throw std::invalid_argument("rolling_attention: step must be >= 1");
  AttentionPath path;
  int t_min = std::numeric_limits<int>::max(), t_max = std::numeric_limits<int>::min();
  for (const auto& r : panel.records) {
    t_min = std::min(t_min, r.t);
    t_max = std::max(t_max, r.t);
  }
  if (panel.records.empty() || t_max - t_min + 1 < window_length) {
    path.warnings.push_back("window longer than sample; no windows estimated");
    return path;
  }
  EstimatorOptions wopt = opt;
  wopt.skip_initial = 0;  // the global trim is applied by masking t below
  for (int start = t_min; start + window_length <= t_max + 1; start += step) {
    const int end = start + window_length;
    PanelData sub;
    std::map<int, double> realized_at;
    for (const auto& r : panel.records)
      if (r.t >= std::max(start, t_min + opt.skip_initial) && r.t < end) {
        sub.records.push_back(r);
        realized_at[r.t] = r.realized;
      }
    AttentionWindow w;
    w.start = start;
    w.end = end;
    try {
      EstimationResult res;
      if (kind == EstimatorKind::Consensus) {
        std::map<int, std::pair<double, int>> acc;
        for (const auto& r : sub.records) {
          acc[r.t].first += r.expectation;
          acc[r.t].second += 1;
        }
        std::vector<double> ex, re;
        for (const auto& [t, a] : acc) {
          ex.push_back(a.first / a.second);
          re.push_back(realized_at.at(t));
        }
        res = consensus_ols(ex, re, wopt.nw_lags, wopt);
      } else if (kind == EstimatorKind::SystemGmm) {
        res = fixed_effects_system_gmm(sub, wopt);
      } else {
        res = pooled_ols(sub, wopt);
      }
      if (!res.gamma_defined) {
        path.warnings.push_back("window [" + std::to_string(start) + "," + std::to_string(end) +
                                "): gamma undefined");
        continue;
      }
      w.gamma_hat = res.gamma;
      w.se_gamma = res.se_gamma;
      w.rho_hat = res.beta1;
      w.n_obs = res.n_obs;
    } catch (const std::exception& ex) {
      path.warnings.push_back("window [" + std::to_string(start) + "," + std::to_string(end) + ") skipped: " +
                              ex.what());
      continue;
    }
    std::vector<double> pis;
    for (const auto& [t, v] : realized_at) pis.push_back(v);
    const double mean = std::accumulate(pis.begin(), pis.end(), 0.0) / pis.size();
    double var = 0.0;
    for (double v : pis) var += (v - mean) * (v - mean);
    w.sigma_pi_hat = pis.size() > 1 ? std::sqrt(var / (pis.size() - 1)) : 0.0;
    std::sort(pis.begin(), pis.end());
    w.median_pi = pis.size() % 2 ? pis[pis.size() / 2] : 0.5 * (pis[pis.size() / 2 - 1] + pis[pis.size() / 2]);
    path.windows.push_back(w);
  }
  return path;
}

enum class VolatilitySubsample { All, Lower50, Lower90 };

struct VolatilityRegression {
  double slope = 0.0;    // coefficient on window inflation volatility
  double se = 0.0;
  double t_stat = 0.0;
  double p_value = 1.0;
  int n_windows = 0;
};

/// OLS of window attention on window inflation volatility (optionally also
/// median inflation), Newey-West SEs. Subsample rules trim the most volatile
/// windows.
inline VolatilityRegression attention_volatility_regression(const AttentionPath& path, bool control_median = false,
                                                            VolatilitySubsample sub = VolatilitySubsample::All,
                                                            int nw_lags = -1) {
  std::vector<AttentionWindow> ws = path.windows;
  if (sub != VolatilitySubsample::All) {
    std::vector<double> vols;
    for (const auto& w : ws) vols.push_back(w.sigma_pi_hat);
    std::sort(vols.begin(), vols.end());
    const double q = sub == VolatilitySubsample::Lower50 ? 0.5 : 0.9;
    const double cut = vols[static_cast<std::size_t>(q * (vols.size() - 1))];
    std::erase_if(ws, [&](const AttentionWindow& w) { return w.sigma_pi_hat > cut; });
  }
  const int n = static_cast<int>(ws.size());
  if (n < 8) throw std::runtime_error("attention_volatility_regression: need at least 8 windows");
  const int k = control_median ? 3 : 2;
  Eigen::MatrixXd X(n, k);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = ws[i].sigma_pi_hat;
    if (control_median) X(i, 2) = ws[i].median_pi;
    y[i] = ws[i].gamma_hat;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(X.transpose() * X);
  if (!lu.isInvertible()) throw std::runtime_error("attention_volatility_regression: rank-deficient design");
  Eigen::VectorXd b = lu.solve(X.transpose() * y);
  Eigen::VectorXd e = y - X * b;
  const int L = (nw_lags >= 0) ? nw_lags : detail::default_nw_lags(n);
  Eigen::MatrixXd V = newey_west_cov(X, e, std::min(L, n - 1));
  VolatilityRegression out;
  out.slope = b[1];
  out.se = std::sqrt(V(1, 1));
  out.t_stat = out.slope / out.se;
  out.p_value = detail::normal_sf2(out.t_stat);
  out.n_windows = n;
  return out;
}

inline constexpr const char* kEstimatesCsvHeader =
    "window_start,window_end,estimator,gamma_hat,se_gamma,rho_hat,sigma_pi_hat,median_pi,n_obs";

inline void save_estimates_csv(const AttentionPath& path, EstimatorKind kind, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write file: " + file);
  out << kEstimatesCsvHeader << "\n";
  out.precision(12);
  for (const auto& w : path.windows)
    out << w.start << ',' << w.end << ',' << estimator_name(kind) << ',' << w.gamma_hat << ',' << w.se_gamma << ','
        << w.rho_hat << ',' << w.sigma_pi_hat << ',' << w.median_pi << ',' << w.n_obs << "\n";
}

}  // namespace attnk
