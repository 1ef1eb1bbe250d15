#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "attnk/attention.hpp"
#include "attnk/csv.hpp"
#include "attnk/numerics/rng.hpp"

namespace attnk {

/// One forecaster-period observation: `expectation` is the forecast made in
/// period t for period t+1, `realized` is actual inflation in period t.
/// Quarterly percent throughout.
struct PanelRecord {
  int forecaster_id = 0;
  int t = 0;
  double expectation = 0.0;
  double realized = 0.0;
};

struct PanelData {
  std::vector<PanelRecord> records;
  // Per-forecaster DGP metadata, populated by simulate_panel (empty for
  // externally loaded panels).
  std::map<int, double> intercept_i;    // c_i
  std::map<int, double> sigma_eps2_i;   // signal-noise variance
  std::map<int, double> sigma_nu2_i;    // perceived innovation variance

  std::vector<int> forecaster_ids() const {
    std::set<int> ids;
    for (const auto& r : records) ids.insert(r.forecaster_id);
    return {ids.begin(), ids.end()};
  }

  /// Records of one forecaster, sorted by t.
  std::vector<PanelRecord> series(int id) const {
    std::vector<PanelRecord> out;
    for (const auto& r : records)
      if (r.forecaster_id == id) out.push_back(r);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
    return out;
  }

  /// Forecasters with fewer than min_obs observations (dropped by the
  /// estimators by default).
  std::vector<int> flagged_few_obs(int min_obs = 8) const {
    std::map<int, int> counts;
    for (const auto& r : records) ++counts[r.forecaster_id];
    std::vector<int> out;
    for (const auto& [id, n] : counts)
      if (n < min_obs) out.push_back(id);
    return out;
  }

  /// Throws if a (forecaster, t) pair repeats or the realized column is
  /// inconsistent across forecasters for the same period.
  void validate() const {
    std::set<std::pair<int, int>> seen;
    std::map<int, double> realized_at;
    for (const auto& r : records) {
      if (!seen.insert({r.forecaster_id, r.t}).second)
        throw std::runtime_error("panel: duplicate (forecaster_id,t) pair (" + std::to_string(r.forecaster_id) +
                                 "," + std::to_string(r.t) + ")");
      auto [it, fresh] = realized_at.insert({r.t, r.realized});
      if (!fresh && it->second != r.realized)
        throw std::runtime_error("panel: inconsistent realized inflation at t=" + std::to_string(r.t));
    }
  }
};

/// Configuration of the synthetic forecaster-panel DGP.
struct PanelConfig {
  double true_gamma = 0.7;   // common attention, in [0,1]
  double rho = 0.93;         // perceived persistence
  double c = 0.5;            // perceived mean (quarterly %)
  double sigma_nu = 0.3;     // innovation std of actual inflation (quarterly %)
  double c_i_std = 0.1;      // dispersion of individual intercepts around c
  double noise_scale_min = 0.5;  // forecaster-specific SNR-preserving scale k_i
  double noise_scale_max = 2.0;
  double u_std = 0.25;       // updating disturbance std (the u_{i,t} shock)
  int n_forecasters = 100;
  int T = 88;
  std::uint64_t seed = 1;

  void validate() const {
    if (n_forecasters < 1 || T < 2) throw std::invalid_argument("PanelConfig: need N >= 1, T >= 2");
    if (true_gamma < 0.0 || true_gamma > 1.0) throw std::invalid_argument("PanelConfig: gamma in [0,1]");
    if (sigma_nu < 0.0 || c_i_std < 0.0 || u_std < 0.0) throw std::invalid_argument("PanelConfig: negative std");
    if (std::abs(rho) > 1.0) throw std::invalid_argument("PanelConfig: |rho| <= 1");
  }
};

/// AR(1) inflation path pi_t = (1-rho) c + rho pi_{t-1} + nu_t. The initial
/// value is drawn from the stationary distribution (|rho| < 1) or set to c
/// (rho = 1).
inline std::vector<double> simulate_inflation(double rho, double c, double sigma_nu, int T, std::uint64_t seed) {
  if (std::abs(rho) > 1.0) throw std::invalid_argument("simulate_inflation: |rho| <= 1 required");
  NormalStream rng(seed);
  std::vector<double> pi(T);
  double prev = (std::abs(rho) < 1.0) ? c + sigma_nu / std::sqrt(1.0 - rho * rho) * rng() : c;
  for (int t = 0; t < T; ++t) {
    prev = (1.0 - rho) * c + rho * prev + sigma_nu * rng();
    pi[t] = prev;
  }
  return pi;
}

/// Synthetic forecaster panel. Each forecaster receives the signal
/// s_it = pi_t + eps_it and updates
///   pi_e' = (1-rho) c_i + rho pi_e + rho gamma (s_it - pi_e);
/// the recorded expectation is pi_e' + u_it with u i.i.d. reporting noise
/// (the forecaster's own recursion carries the true pi_e'). Signal-noise
/// variances are scaled per forecaster jointly with the perceived innovation
/// variance so the signal-to-noise ratio, and hence gamma, is identical
/// across forecasters. Initial forecasts start at c_i.
inline PanelData simulate_panel(const PanelConfig& cfg) {
  cfg.validate();
  const double gamma = cfg.true_gamma;
  const double sigma_nu2 = cfg.sigma_nu * cfg.sigma_nu;
  // Prior variance of the perceived process; rho = 1 has no stationary
  // variance, fall back to the one-step-ahead variance sigma_nu2.
  const double sigma_pi2 = (cfg.rho < 1.0) ? stationary_prior_variance(cfg.rho, sigma_nu2) : sigma_nu2;
  const double base_eps2 = noise_from_attention(std::max(gamma, 1e-300), sigma_pi2);

  NormalStream rng(cfg.seed);
  // Inflation path uses its own stream so the same (rho,c,sigma_nu,T,seed)
  // reproduces simulate_inflation exactly.
  std::vector<double> pi = simulate_inflation(cfg.rho, cfg.c, cfg.sigma_nu, cfg.T, cfg.seed);

  PanelData panel;
  panel.records.reserve(static_cast<std::size_t>(cfg.n_forecasters) * cfg.T);
  BeliefParams beliefs{cfg.rho, cfg.c, sigma_nu2, 0.0, std::nullopt, std::nullopt};
  for (int i = 0; i < cfg.n_forecasters; ++i) {
    const double c_i = cfg.c + cfg.c_i_std * rng();
    const double k_i = cfg.noise_scale_min + (cfg.noise_scale_max - cfg.noise_scale_min) * rng.next_u01();
    const double eps2_i = (gamma > 0.0) ? k_i * base_eps2 : std::numeric_limits<double>::infinity();
    panel.intercept_i[i] = c_i;
    panel.sigma_eps2_i[i] = eps2_i;
    panel.sigma_nu2_i[i] = k_i * sigma_nu2;
    const double eps_std = (gamma > 0.0) ? std::sqrt(eps2_i) : 0.0;

    beliefs.c = c_i;
    double prior = c_i;
    for (int t = 0; t < cfg.T; ++t) {
      const double z_eps = rng();
      const double z_u = rng();
      const double signal = pi[t] + eps_std * z_eps;
      const double next = update_forecast(prior, (gamma > 0.0) ? signal : prior, beliefs, gamma);
      panel.records.push_back({i, t, next + cfg.u_std * z_u, pi[t]});
      prior = next;
    }
  }
  return panel;
}

inline constexpr const char* kPanelCsvHeader = "forecaster_id,t,expectation,realized";

inline void save_panel_csv(const PanelData& panel, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out << kPanelCsvHeader << "\n";
  out.precision(17);
  for (const auto& r : panel.records)
    out << r.forecaster_id << ',' << r.t << ',' << r.expectation << ',' << r.realized << "\n";
}

inline PanelData load_panel_csv(const std::string& path) {
  PanelData panel;
  auto rows = csv::read_rows(path, kPanelCsvHeader);
  for (const auto& [lineno, f] : rows) {
    const std::string ctx = path + ": line " + std::to_string(lineno);
    PanelRecord r;
    r.forecaster_id = static_cast<int>(csv::to_long(f[0], ctx));
    r.t = static_cast<int>(csv::to_long(f[1], ctx));
    r.expectation = csv::to_double(f[2], ctx);
    r.realized = csv::to_double(f[3], ctx);
    panel.records.push_back(r);
  }
  panel.validate();
  return panel;
}

}  // namespace attnk
