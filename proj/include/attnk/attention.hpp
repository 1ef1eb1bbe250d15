#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace attnk {

/// Perceived inflation process and information-cost parameters.
///
/// Beliefs: pi_t = (1 - rho) c + rho pi_{t-1} + nu_t, nu ~ N(0, sigma_nu2).
/// lambda_tilde is the information cost relative to the stakes of a forecast
/// mistake. Construct either with lambda_tilde directly or from (stakes,
/// cost), in which case lambda_tilde = cost / stakes.
/// All rates are quarterly percent.
struct BeliefParams {
  double rho = 1.0;
  double c = 0.0;
  double sigma_nu2 = 0.0;
  double lambda_tilde = 0.0;
  std::optional<double> stakes;  // r > 0
  std::optional<double> cost;    // lambda >= 0

  static BeliefParams from_stakes(double rho, double c, double sigma_nu2, double stakes, double cost) {
    if (!(stakes > 0.0)) throw std::invalid_argument("BeliefParams: stakes must be > 0");
    if (cost < 0.0) throw std::invalid_argument("BeliefParams: cost must be >= 0");
    BeliefParams p{rho, c, sigma_nu2, cost / stakes, stakes, cost};
    p.validate();
    return p;
  }

  void validate() const {
    if (rho < 0.0 || rho > 1.0) throw std::invalid_argument("BeliefParams: rho must be in [0,1]");
    if (sigma_nu2 < 0.0) throw std::invalid_argument("BeliefParams: sigma_nu2 must be >= 0");
    if (lambda_tilde < 0.0) throw std::invalid_argument("BeliefParams: lambda_tilde must be >= 0");
  }
};

/// Current belief about inflation: prior mean/variance, attention and the
/// equivalent signal-noise variance. gamma = sigma_pi2/(sigma_pi2+sigma_eps2);
/// gamma = 0 corresponds to an infinitely noisy signal.
struct BeliefState {
  double prior_mean = 0.0;
  double prior_var = 0.0;
  double gamma = 0.0;
  double sigma_eps2 = std::numeric_limits<double>::infinity();
};

/// Stationary variance of the perceived AR(1): sigma_nu2 / (1 - rho^2).
/// Random-walk beliefs (rho = 1) have no stationary variance; callers must
/// supply sigma_pi2 themselves in that case.
inline double stationary_prior_variance(double rho, double sigma_nu2) {
  if (rho >= 1.0) throw std::domain_error("stationary_prior_variance: undefined for rho >= 1");
  return sigma_nu2 / (1.0 - rho * rho);
}

/// Information-choice objective at attention level gamma:
///   -r rho^2 (1 - gamma) sigma_pi2 - (lambda/2) log(1/(1-gamma)).
/// Strictly concave on [0,1); -inf at gamma = 1 when lambda > 0.
inline double attention_objective(double gamma, const BeliefParams& params, double sigma_pi2) {
  const double r = params.stakes.value_or(1.0);
  const double lambda = params.cost.value_or(params.lambda_tilde * r);
  if (gamma >= 1.0) return lambda > 0.0 ? -std::numeric_limits<double>::infinity() : 0.0;
  return -r * params.rho * params.rho * (1.0 - gamma) * sigma_pi2 - 0.5 * lambda * std::log(1.0 / (1.0 - gamma));
}

/// Optimal attention: gamma = max(0, 1 - lambda_tilde / (2 rho^2 sigma_pi2)).
/// The costless-information limit lambda_tilde = 0 returns 1; a degenerate
/// prior (rho^2 sigma_pi2 = 0) returns 0.
inline double optimal_attention(const BeliefParams& params, double sigma_pi2) {
  const double scale = params.rho * params.rho * sigma_pi2;
  if (params.lambda_tilde == 0.0) return 1.0;
  if (scale <= 0.0) return 0.0;
  return std::max(0.0, 1.0 - params.lambda_tilde / (2.0 * scale));
}

/// Signal-noise variance implied by an attention level:
/// sigma_eps2 = sigma_pi2 (1 - gamma) / gamma. gamma = 0 maps to +inf.
inline double noise_from_attention(double gamma, double sigma_pi2) {
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("noise_from_attention: gamma must be in [0,1]");
  if (gamma == 0.0) return std::numeric_limits<double>::infinity();
  return sigma_pi2 * (1.0 - gamma) / gamma;
}

/// Attention implied by prior and signal-noise variances.
inline double attention_from_noise(double sigma_pi2, double sigma_eps2) {
  if (std::isinf(sigma_eps2)) return 0.0;
  return sigma_pi2 / (sigma_pi2 + sigma_eps2);
}

/// One belief-updating step:
///   pi_e' = (1 - rho) c + rho pi_e + rho gamma (observed - pi_e).
/// With rho = 1 this is the random-walk updating rule. Passing c = 0 gives
/// the demeaned-inflation form of the same update.
inline double update_forecast(double prior_forecast, double observed, const BeliefParams& params, double gamma) {
  return (1.0 - params.rho) * params.c + params.rho * prior_forecast +
         params.rho * gamma * (observed - prior_forecast);
}

}  // namespace attnk
