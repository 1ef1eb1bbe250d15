#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "attnk/numerics/rng.hpp"

namespace attnk {

enum class TaylorRuleKind { Baseline, Simple };
enum class ExpectationKind { Limited, Fire };
enum class ShockType { NaturalRate, CostPush };

/// Structural block, policy rule, shock processes and belief variant of the
/// sticky-price economy. All rates are quarterly percent, deviations from a
/// zero-inflation steady state.
struct ModelParams {
  double beta = 0.9975;     // discount factor
  double kappa = 0.057;     // Phillips-curve slope
  double phi_elas = 1.0;    // real-rate elasticity of demand
  double chi = 0.007;       // output-gap weight in the loss function

  TaylorRuleKind rule = TaylorRuleKind::Baseline;
  double rho_i = 0.7;       // smoothing on the realized (ELB-constrained) rate
  double phi_pi = 2.0;
  // Output-gap response, quarterly-rate units. With the textbook annual
  // weight 0.5 the rule reacts so strongly to the post-liftoff boom that no
  // perfect-foresight ELB path exists under low attention; 0.185 keeps the
  // trap equilibrium while preserving the FIRE spell length.
  double phi_y = 0.185;
  double simple_phi_pi = 1.5;  // Simple rule: i = 1.5 pi, no smoothing

  double rho_r = 0.8;       // natural-rate shock persistence
  double sigma_r = 0.2940;  // natural-rate innovation std (quarterly %)
  double rho_u = 0.0;       // cost-push persistence
  double sigma_u = 0.154;   // cost-push innovation std (quarterly %)

  double elb_level = 0.25;  // i >= -elb_level (1% annualized steady-state rate)
  bool elb_on = true;

  double rho_belief = 1.0;  // perceived persistence in the updating rule
  double gamma_firms = 0.3;
  double gamma_households = 0.3;

  void set_gamma(double g) { gamma_firms = gamma_households = g; }

  void validate() const {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("ModelParams: beta in (0,1)");
    if (!(kappa > 0.0)) throw std::invalid_argument("ModelParams: kappa > 0");
    if (rule == TaylorRuleKind::Baseline && !(phi_pi > 1.0))
      throw std::invalid_argument("ModelParams: baseline rule needs phi_pi > 1");
    if (sigma_r < 0.0 || sigma_u < 0.0) throw std::invalid_argument("ModelParams: negative shock std");
    if (gamma_firms < 0.0 || gamma_firms > 1.0 || gamma_households < 0.0 || gamma_households > 1.0)
      throw std::invalid_argument("ModelParams: gamma in [0,1]");
    if (rho_belief < 0.0 || rho_belief > 1.0) throw std::invalid_argument("ModelParams: rho_belief in [0,1]");
    if (elb_level < 0.0) throw std::invalid_argument("ModelParams: elb_level >= 0");
  }
};

/// Simulated or perfect-foresight time series. pi_e is the expectation formed
/// in t about t+1 (firms'; pi_e_hh is the household counterpart and equals
/// pi_e unless expectations are split). pi_e_prior is the expectation carried
/// into t, i.e. pi_e shifted one period.
struct Path {
  std::vector<double> i;         // actual rate, max(shadow, -elb)
  std::vector<double> i_shadow;  // unconstrained rule output
  std::vector<double> pi;
  std::vector<double> pi_e;      // pi^e_{t+1|t}, firms
  std::vector<double> pi_e_hh;   // pi^e_{t+1|t}, households
  std::vector<double> pi_e_prior;  // pi^e_{t|t-1}, firms
  std::vector<double> ygap;
  std::vector<double> r_n;
  std::vector<double> u;
  std::vector<int> elb_flag;

  std::size_t size() const { return pi.size(); }
};

struct PhillipsCoefficients {
  double prior_loading;  // beta (1-gamma) / (1-beta gamma)
  double output_slope;   // kappa / (1-beta gamma)
  double shock_loading;  // 1 / (1-beta gamma)
};

/// Closed-form coefficients of inflation on (prior expectation, output gap,
/// cost-push shock) after substituting the updating rule into the Phillips
/// curve (random-walk beliefs).
inline PhillipsCoefficients phillips_coefficients(const ModelParams& p, double gamma) {
  const double d = 1.0 - p.beta * gamma;
  if (!(d > 0.0)) throw std::invalid_argument("phillips_coefficients: need beta*gamma < 1");
  return {p.beta * (1.0 - gamma) / d, p.kappa / d, 1.0 / d};
}

/// Policy rule: shadow rate and the ELB-constrained actual rate.
/// Baseline: shadow = rho_i i_{-1} + (1-rho_i)(phi_pi pi + phi_y y), where
/// i_{-1} is the lagged realized rate, so the smoothing state is pinned at
/// -elb_level while the bound binds and the rate lifts off gradually.
/// Simple:   shadow = 1.5 pi.
inline std::pair<double, double> taylor_rate(const ModelParams& p, double lagged_rate, double pi, double ygap) {
  const double shadow = (p.rule == TaylorRuleKind::Baseline)
                            ? p.rho_i * lagged_rate + (1.0 - p.rho_i) * (p.phi_pi * pi + p.phi_y * ygap)
                            : p.simple_phi_pi * pi;
  const double i = p.elb_on ? std::max(shadow, -p.elb_level) : shadow;
  return {shadow, i};
}

struct ShockSpec {
  ShockType type = ShockType::NaturalRate;
  double size_sd = 3.0;  // impulse in standard deviations of the innovation
  int sign = -1;
};

namespace detail {

/// Exogenous shock paths for a one-time date-0 impulse.
inline void impulse_paths(const ModelParams& p, const ShockSpec& shock, int H, std::vector<double>& r_n,
                          std::vector<double>& u) {
  r_n.assign(H, 0.0);
  u.assign(H, 0.0);
  double* series = shock.type == ShockType::NaturalRate ? r_n.data() : u.data();
  const double rho = shock.type == ShockType::NaturalRate ? p.rho_r : p.rho_u;
  const double sigma = shock.type == ShockType::NaturalRate ? p.sigma_r : p.sigma_u;
  double v = shock.sign * shock.size_sd * sigma;
  for (int t = 0; t < H; ++t) {
    series[t] = v;
    v *= rho;
  }
}

/// Exact solve of the path system conditional on a guessed set of
/// ELB-binding periods. Everything (beliefs, supply, demand, rule) is linear
/// given the regime sequence, so stack pi, y, shadow, pe_f, pe_h over the
/// horizon and solve one linear system per candidate regime.
inline bool regime_candidate_solve(const ModelParams& p, ExpectationKind kind, const std::vector<double>& r_n,
                                   const std::vector<double>& u, const std::vector<char>& bound,
                                   Eigen::VectorXd& x) {
  const int H = static_cast<int>(r_n.size());
  const int n = 5 * H;  // per period: pi, y, s, pe_f, pe_h
  auto PI = [](int t) { return 5 * t; };
  auto YY = [](int t) { return 5 * t + 1; };
  auto SS = [](int t) { return 5 * t + 2; };
  auto PF = [](int t) { return 5 * t + 3; };
  auto PH = [](int t) { return 5 * t + 4; };
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int t = 0; t < H; ++t) {
    int r = PI(t);  // supply: pi - beta pe_f - kappa y = u
    A(r, PI(t)) = 1.0;
    A(r, PF(t)) = -p.beta;
    A(r, YY(t)) = -p.kappa;
    b[r] = u[t];
    r = YY(t);  // demand: y - y' + phi (i - pe_h - r_n) = 0, y_H = 0
    A(r, YY(t)) = 1.0;
    if (t + 1 < H) A(r, YY(t + 1)) = -1.0;
    A(r, PH(t)) = -p.phi_elas;
    if (bound[t]) {
      b[r] = p.phi_elas * (r_n[t] + p.elb_level);
    } else {
      A(r, SS(t)) = p.phi_elas;
      b[r] = p.phi_elas * r_n[t];
    }
    r = SS(t);  // policy rule; the smoothing state is the lagged actual rate
    A(r, SS(t)) = 1.0;
    if (p.rule == TaylorRuleKind::Baseline) {
      if (t > 0) {
        if (bound[t - 1])
          b[r] = -p.rho_i * p.elb_level;
        else
          A(r, SS(t - 1)) = -p.rho_i;
      }
      A(r, PI(t)) = -(1.0 - p.rho_i) * p.phi_pi;
      A(r, YY(t)) = -(1.0 - p.rho_i) * p.phi_y;
    } else {
      A(r, PI(t)) = -p.simple_phi_pi;
    }
    // expectations
    if (kind == ExpectationKind::Fire) {
      r = PF(t);  // pe_f = pi_{t+1} (0 at the steady terminal state)
      A(r, PF(t)) = 1.0;
      if (t + 1 < H) A(r, PI(t + 1)) = -1.0;
      r = PH(t);
      A(r, PH(t)) = 1.0;
      A(r, PF(t)) = -1.0;
    } else {
      const double rb = p.rho_belief;
      r = PF(t);  // pe_f = rb (1-g) pe_f_{-1} + rb g pi
      A(r, PF(t)) = 1.0;
      if (t > 0) A(r, PF(t - 1)) = -rb * (1.0 - p.gamma_firms);
      A(r, PI(t)) = -rb * p.gamma_firms;
      r = PH(t);
      A(r, PH(t)) = 1.0;
      if (t > 0) A(r, PH(t - 1)) = -rb * (1.0 - p.gamma_households);
      A(r, PI(t)) = -rb * p.gamma_households;
    }
  }
  x = Eigen::PartialPivLU<Eigen::MatrixXd>(A).solve(b);
  // the guessed regime must reproduce itself under the rule
  for (int t = 0; t < H; ++t) {
    const bool want = p.elb_on && x[SS(t)] < -p.elb_level;
    if (want != static_cast<bool>(bound[t])) return false;
  }
  return true;
}

/// Piecewise-linear path solver: a date-0 impulse puts any ELB episode at the
/// front of the path, so scan contiguous candidate spells [0, k) in
/// increasing k and keep the first self-consistent regime. Multiple spell
/// lengths can be self-consistent under limited attention (liftoff is a
/// coordination problem); taking the smallest selects the minimal-duration
/// equilibrium, the one continuous in the shock size.
inline bool regime_path_solve(const ModelParams& p, ExpectationKind kind, const std::vector<double>& r_n,
                              const std::vector<double>& u, std::vector<double>& pi, std::vector<double>& y,
                              std::vector<double>& pe_f, std::vector<double>& pe_h, std::vector<double>& shadow,
                              std::vector<double>& irate) {
  const int H = static_cast<int>(r_n.size());
  auto PI = [](int t) { return 5 * t; };
  auto YY = [](int t) { return 5 * t + 1; };
  auto SS = [](int t) { return 5 * t + 2; };
  auto PF = [](int t) { return 5 * t + 3; };
  auto PH = [](int t) { return 5 * t + 4; };
  const int max_spell = std::min(H, 80);
  std::vector<char> bound(H, 0);
  Eigen::VectorXd x;
  for (int k = 0; k <= max_spell; ++k) {
    std::fill(bound.begin(), bound.end(), char(0));
    std::fill(bound.begin(), bound.begin() + k, char(1));
    if (!regime_candidate_solve(p, kind, r_n, u, bound, x)) continue;
    for (int t = 0; t < H; ++t) {
      pi[t] = x[PI(t)];
      y[t] = x[YY(t)];
      shadow[t] = x[SS(t)];
      pe_f[t] = x[PF(t)];
      pe_h[t] = x[PH(t)];
      irate[t] = p.elb_on ? std::max(shadow[t], -p.elb_level) : shadow[t];
    }
    return true;
  }
  return false;
}

}  // namespace detail

/// Deterministic nonlinear impulse response with the ELB imposed, solved by
/// a damped fixed point over the whole path: given {pi, y}, roll
/// expectations forward (updating rule, or next-period inflation under
/// perfect foresight), compute the policy rate forward, then solve the
/// demand block backward from the steady terminal state and the supply block
/// pointwise; damp and repeat until the max-norm update is below 1e-10.
/// Falls back to an exact regime-set linear solve (detail::regime_path_solve)
/// when the fixed point diverges, which happens for long ELB spells.
inline Path perfect_foresight_irf(const ModelParams& params, ExpectationKind kind, const ShockSpec& shock,
                                  int horizon = 400) {
  params.validate();
  if (horizon < 4) throw std::invalid_argument("perfect_foresight_irf: horizon too short");
  const int H = horizon;
  std::vector<double> r_n, u;
  detail::impulse_paths(params, shock, H, r_n, u);

  std::vector<double> pi(H, 0.0), y(H, 0.0);
  std::vector<double> pe_f(H, 0.0), pe_h(H, 0.0), pe_prior(H, 0.0), shadow(H, 0.0), irate(H, 0.0);
  std::vector<double> pi_new(H), y_new(H);

  const double rb = params.rho_belief;
  double damping = 0.5;
  double prev_change = std::numeric_limits<double>::infinity();
  bool converged = false;
  double change = 0.0;
  const int max_iter = 50000;
  for (int it = 0; it < max_iter; ++it) {
    // (a) expectations given the current path guess
    if (kind == ExpectationKind::Fire) {
      for (int t = 0; t < H; ++t) {
        pe_prior[t] = (t == 0) ? 0.0 : pi[t];
        pe_f[t] = pe_h[t] = (t + 1 < H) ? pi[t + 1] : 0.0;
      }
    } else {
      double prior_f = 0.0, prior_h = 0.0;
      for (int t = 0; t < H; ++t) {
        pe_prior[t] = prior_f;
        pe_f[t] = rb * prior_f + rb * params.gamma_firms * (pi[t] - prior_f);
        pe_h[t] = rb * prior_h + rb * params.gamma_households * (pi[t] - prior_h);
        prior_f = pe_f[t];
        prior_h = pe_h[t];
      }
    }
    // (b) policy rate forward, smoothing over the realized rate
    double lag_rate = 0.0;
    for (int t = 0; t < H; ++t) {
      auto [s, i] = taylor_rate(params, lag_rate, pi[t], y[t]);
      shadow[t] = s;
      irate[t] = i;
      lag_rate = i;
    }
    // (c) demand backward from the steady terminal state, supply pointwise
    double y_next = 0.0;
    for (int t = H - 1; t >= 0; --t) {
      y_new[t] = y_next - params.phi_elas * (irate[t] - pe_h[t] - r_n[t]);
      y_next = y_new[t];
    }
    for (int t = 0; t < H; ++t) pi_new[t] = params.beta * pe_f[t] + params.kappa * y_new[t] + u[t];

    change = 0.0;
    for (int t = 0; t < H; ++t) change = std::max({change, std::abs(pi_new[t] - pi[t]), std::abs(y_new[t] - y[t])});
    if (change <= 1e-10) {
      converged = true;
      break;
    }
    if (change > 1e4) break;  // diverging: hand over to the regime-set solve
    if (change > prev_change && damping > 0.02) damping *= 0.5;  // adaptive fallback
    prev_change = change;
    for (int t = 0; t < H; ++t) {
      pi[t] += damping * (pi_new[t] - pi[t]);
      y[t] += damping * (y_new[t] - y[t]);
    }
  }
  if (!converged) {
    if (!detail::regime_path_solve(params, kind, r_n, u, pi, y, pe_f, pe_h, shadow, irate))
      throw std::runtime_error("perfect_foresight_irf: no convergence, last fixed-point update " +
                               std::to_string(change));
    // rebuild the prior series from the solved expectations
    if (kind == ExpectationKind::Fire) {
      for (int t = 0; t < H; ++t) pe_prior[t] = (t == 0) ? 0.0 : pi[t];
    } else {
      for (int t = 0; t < H; ++t) pe_prior[t] = (t == 0) ? 0.0 : pe_f[t - 1];
    }
  }
  if (std::abs(pi[H - 1]) > 1e-8 || std::abs(y[H - 1]) > 1e-8)
    throw std::runtime_error("perfect_foresight_irf: horizon too short for a steady terminal state");

  Path path;
  path.pi = pi;
  path.ygap = y;
  path.pi_e = pe_f;
  path.pi_e_hh = pe_h;
  path.pi_e_prior = pe_prior;
  path.i_shadow = shadow;
  path.i = irate;
  path.r_n = r_n;
  path.u = u;
  path.elb_flag.resize(H);
  for (int t = 0; t < H; ++t) path.elb_flag[t] = (params.elb_on && irate[t] <= -params.elb_level + 1e-12) ? 1 : 0;
  return path;
}

namespace detail {

/// Linear decision rule y = g . (i_{-1}, pe_f, pe_h, r_n, u) of the
/// unconstrained economy (where i_{-1} = shadow_{-1}), used for the
/// household's output-gap expectation in stochastic simulations. Solved as a
/// fixed point in the rule coefficients.
struct DecisionRule {
  double g[5] = {0, 0, 0, 0, 0};
};

struct PeriodSolution {
  double pi, y, shadow, i, pe_f_next, pe_h_next, e_y_next;
  bool elb;
};

/// Static period system given states and the output-gap rule: supply, demand
/// with E y' from the rule, the policy rule, and the belief updates. Linear
/// in (pi, y) on each branch of the ELB kink.
inline PeriodSolution solve_period(const ModelParams& p, const DecisionRule& rule, double lag_rate, double pe_f,
                                   double pe_h, double r_n, double u, bool impose_elb) {
  const double rb = p.rho_belief;
  const double bf = rb * p.gamma_firms;          // pe_f' = af + bf pi
  const double af = rb * (1.0 - p.gamma_firms) * pe_f;
  const double bh = rb * p.gamma_households;
  const double ah = rb * (1.0 - p.gamma_households) * pe_h;
  // shadow = c0 + cpi pi + cy y
  double c0, cpi, cy;
  if (p.rule == TaylorRuleKind::Baseline) {
    c0 = p.rho_i * lag_rate;
    cpi = (1.0 - p.rho_i) * p.phi_pi;
    cy = (1.0 - p.rho_i) * p.phi_y;
  } else {
    c0 = 0.0;
    cpi = p.simple_phi_pi;
    cy = 0.0;
  }
  const double* g = rule.g;

  auto solve_branch = [&](bool bound) -> PeriodSolution {
    // E y' = g0 shadow + g1 pe_f' + g2 pe_h' + g3 rho_r r_n + g4 rho_u u
    // Supply: (1 - beta bf) pi - kappa y = beta af + u
    // Demand: y - E y' + phi (i - pe_h' - r_n) = 0
    Eigen::Matrix2d A;
    Eigen::Vector2d b;
    A(0, 0) = 1.0 - p.beta * bf;
    A(0, 1) = -p.kappa;
    b[0] = p.beta * af + u;
    const double rhs_common = g[0] * c0 + g[1] * af + g[2] * ah + g[3] * p.rho_r * r_n + g[4] * p.rho_u * u +
                              p.phi_elas * ah + p.phi_elas * r_n;
    if (!bound) {
      A(1, 0) = -(g[0] * cpi + g[1] * bf + g[2] * bh) + p.phi_elas * cpi - p.phi_elas * bh;
      A(1, 1) = 1.0 - g[0] * cy + p.phi_elas * cy;
      b[1] = rhs_common - p.phi_elas * c0;
    } else {
      A(1, 0) = -(g[0] * cpi + g[1] * bf + g[2] * bh) - p.phi_elas * bh;
      A(1, 1) = 1.0 - g[0] * cy;
      b[1] = rhs_common + p.phi_elas * p.elb_level;
    }
    Eigen::Vector2d x = A.fullPivLu().solve(b);
    PeriodSolution s;
    s.pi = x[0];
    s.y = x[1];
    s.shadow = c0 + cpi * s.pi + cy * s.y;
    s.i = bound ? -p.elb_level : s.shadow;
    s.pe_f_next = af + bf * s.pi;
    s.pe_h_next = ah + bh * s.pi;
    s.e_y_next = g[0] * s.i + g[1] * s.pe_f_next + g[2] * s.pe_h_next + g[3] * p.rho_r * r_n + g[4] * p.rho_u * u;
    s.elb = bound;
    return s;
  };

  PeriodSolution s = solve_branch(false);
  if (impose_elb && s.shadow < -p.elb_level) s = solve_branch(true);
  return s;
}

/// Fixed point in the rule coefficients: the conjectured linear rule must
/// reproduce the unconstrained period solution at unit states.
inline DecisionRule solve_decision_rule(const ModelParams& p) {
  DecisionRule rule;
  for (int it = 0; it < 2000; ++it) {
    DecisionRule next;
    double states[5];
    double diff = 0.0;
    for (int k = 0; k < 5; ++k) {
      for (int j = 0; j < 5; ++j) states[j] = (j == k) ? 1.0 : 0.0;
      PeriodSolution s = solve_period(p, rule, states[0], states[1], states[2], states[3], states[4], false);
      next.g[k] = s.y;
      diff = std::max(diff, std::abs(next.g[k] - rule.g[k]));
    }
    rule = next;
    if (diff < 1e-14) return rule;
  }
  throw std::runtime_error("stochastic_simulate: decision-rule fixed point did not converge");
}

}  // namespace detail

/// Stochastic simulation under limited attention. The household's
/// expectation of next period's output gap comes from the linear decision
/// rule of the unconstrained economy (an approximation whenever the ELB
/// binds); the ELB itself is imposed every period when elb_on.
inline Path stochastic_simulate(const ModelParams& params, int T, std::uint64_t seed, int burn_in = 0) {
  params.validate();
  if (T <= burn_in) throw std::invalid_argument("stochastic_simulate: need T > burn_in");
  detail::DecisionRule rule = detail::solve_decision_rule(params);
  NormalStream rng(seed);

  Path path;
  const int keep = T - burn_in;
  auto reserve = [&](auto& v) { v.reserve(keep); };
  reserve(path.i);
  reserve(path.i_shadow);
  reserve(path.pi);
  reserve(path.pi_e);
  reserve(path.pi_e_hh);
  reserve(path.pi_e_prior);
  reserve(path.ygap);
  reserve(path.r_n);
  reserve(path.u);
  path.elb_flag.reserve(keep);

  double lag_rate = 0.0, pe_f = 0.0, pe_h = 0.0, r_n = 0.0, u = 0.0;
  for (int t = 0; t < T; ++t) {
    r_n = params.rho_r * r_n + params.sigma_r * rng();
    u = params.rho_u * u + params.sigma_u * rng();
    detail::PeriodSolution s = detail::solve_period(params, rule, lag_rate, pe_f, pe_h, r_n, u, params.elb_on);
    if (t >= burn_in) {
      path.i.push_back(s.i);
      path.i_shadow.push_back(s.shadow);
      path.pi.push_back(s.pi);
      path.pi_e.push_back(s.pe_f_next);
      path.pi_e_hh.push_back(s.pe_h_next);
      path.pi_e_prior.push_back(pe_f);
      path.ygap.push_back(s.y);
      path.r_n.push_back(r_n);
      path.u.push_back(u);
      path.elb_flag.push_back(s.elb ? 1 : 0);
    }
    lag_rate = s.i;
    pe_f = s.pe_f_next;
    pe_h = s.pe_h_next;
  }
  return path;
}

/// Largest pointwise residual of the supply and demand blocks along a
/// perfect-foresight path (diagnostic; expectations and the policy rule are
/// satisfied by construction).
inline double path_equation_residual(const Path& path, const ModelParams& params) {
  double worst = 0.0;
  const int H = static_cast<int>(path.size());
  for (int t = 0; t < H; ++t) {
    const double as = path.pi[t] - params.beta * path.pi_e[t] - params.kappa * path.ygap[t] - path.u[t];
    const double y_next = (t + 1 < H) ? path.ygap[t + 1] : 0.0;
    const double ad = path.ygap[t] - y_next + params.phi_elas * (path.i[t] - path.pi_e_hh[t] - path.r_n[t]);
    worst = std::max({worst, std::abs(as), std::abs(ad)});
  }
  return worst;
}

struct ElbSpellStats {
  std::vector<int> spell_lengths;  // maximal consecutive runs of elb_flag
  double frequency = 0.0;
  int longest = 0;
  double mean_pi_during = 0.0;
  double mean_pi_after = 0.0;  // mean over the 8 quarters following each spell
};

inline ElbSpellStats elb_spell_stats(const Path& path) {
  ElbSpellStats st;
  const int H = static_cast<int>(path.size());
  if (H == 0) return st;
  int at_elb = 0, run = 0;
  double sum_during = 0.0, sum_after = 0.0;
  int n_during = 0, n_after = 0;
  for (int t = 0; t < H; ++t) {
    if (path.elb_flag[t]) {
      ++at_elb;
      ++run;
      sum_during += path.pi[t];
      ++n_during;
    } else if (run > 0) {
      st.spell_lengths.push_back(run);
      for (int s = t; s < std::min(H, t + 8); ++s)
        if (!path.elb_flag[s]) {
          sum_after += path.pi[s];
          ++n_after;
        }
      run = 0;
    }
  }
  if (run > 0) st.spell_lengths.push_back(run);
  st.frequency = static_cast<double>(at_elb) / H;
  for (int l : st.spell_lengths) st.longest = std::max(st.longest, l);
  if (n_during > 0) st.mean_pi_during = sum_during / n_during;
  if (n_after > 0) st.mean_pi_after = sum_after / n_after;
  return st;
}

/// One-step-ahead inflation forecast errors pi_{t+1} - pi^e_{t+1|t}.
inline std::vector<double> forecast_error_irf(const Path& path) {
  if (path.size() < 2) return {};
  std::vector<double> err(path.size() - 1);
  for (std::size_t t = 0; t + 1 < path.size(); ++t) err[t] = path.pi[t + 1] - path.pi_e[t];
  return err;
}

inline constexpr const char* kIrfCsvHeader = "t,i_annualized,pi_annualized,pi_e_annualized,ygap,elb_flag,r_n,u";

/// Rates are annualized (x4) at this I/O boundary only.
inline void save_irf_csv(const Path& path, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write file: " + file);
  out << kIrfCsvHeader << "\n";
  out.precision(12);
  for (std::size_t t = 0; t < path.size(); ++t)
    out << t << ',' << 4.0 * path.i[t] << ',' << 4.0 * path.pi[t] << ',' << 4.0 * path.pi_e[t] << ',' << path.ygap[t]
        << ',' << path.elb_flag[t] << ',' << path.r_n[t] << ',' << path.u[t] << "\n";
}

}  // namespace attnk
