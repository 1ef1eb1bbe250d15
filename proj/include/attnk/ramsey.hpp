#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "attnk/nkmodel.hpp"
#include "attnk/numerics/quadrature.hpp"
#include "attnk/numerics/rng.hpp"
#include "attnk/numerics/spline.hpp"

namespace attnk {

/// Collocation state of the recursive commitment problem: the carried Euler
/// multiplier, the two exogenous shocks, and the belief carried into the
/// period.
struct RamseyState {
  double zeta = 0.0;        // carried multiplier of the demand constraint
  double u = 0.0;           // cost-push shock
  double r_n = 0.0;         // natural rate
  double pi_e_prior = 0.0;  // inflation expectation entering the period
};

enum class RamseyBranch { Interior, Bound };

/// Saddle-point solution of the one-node optimality system.
struct NodeSolution {
  double pi = 0.0;
  double ygap = 0.0;
  double i = 0.0;
  double mu1 = 0.0;      // Phillips-curve multiplier
  double mu2 = 0.0;      // demand-block (Euler) multiplier
  double phi_elb = 0.0;  // lower-bound multiplier, >= 0
  RamseyBranch branch = RamseyBranch::Interior;
  double foc_residual = 0.0;  // max-norm of the selected branch system
};

struct RamseyOptions {
  int grid_nodes = 9;        // knots per state dimension
  int quad_points = 5;       // Gauss-Hermite points per innovation
  double tol = 1e-7;         // max-norm coefficient change of c -> Phi(c)
  int max_sweeps = 400;      // optimization sweeps (each followed by evaluation)
  double newton_tol = 1e-10;
  double shock_span_sd = 5.0;      // u and r_n grids in unconditional SDs
  double belief_span_scale = 4.0;  // x the Taylor-economy inflation std
  double zeta_span = 0.6;          // initial carried-multiplier half width
  int max_expansions = 3;          // ergodic-coverage grid widenings
  double max_clip_fraction = 0.01;
  // Carry the Phillips multiplier instead of the Euler multiplier between
  // periods (diagnostic only: the return function's -zeta y / beta term
  // matches the continuation value only when the Euler multiplier is
  // carried, so this variant does not price promised output).
  bool carry_phillips_multiplier = false;

  void validate() const {
    if (grid_nodes < 4) throw std::invalid_argument("RamseyOptions: need >= 4 grid nodes per dimension");
    if (quad_points < 1) throw std::invalid_argument("RamseyOptions: need >= 1 quadrature point");
    if (!(tol > 0.0)) throw std::invalid_argument("RamseyOptions: tol must be > 0");
  }
};

namespace detail {

/// Conditional expectation of the value function over next-period shock
/// innovations, as a function of the two endogenous next states: W(z, e) =
/// E[V(z, u', r', e) | u, r]. Built by contracting the tensor-product spline
/// coefficients with quadrature-averaged basis weights in the shock
/// dimensions, which reduces every node solve to a 2-D spline evaluation.
class ExpectedValue {
 public:
  ExpectedValue() = default;

  /// bu, br: quadrature-averaged dense basis weights for the conditional
  /// distributions of u' and r'.
  ExpectedValue(const SplineField& v, const Eigen::VectorXd& bu, const Eigen::VectorXd& br) : v_(&v) {
    const int mz = v.coef_size(0), mu = v.coef_size(1), mr = v.coef_size(2), me = v.coef_size(3);
    d_.setZero(mz, me);
    const double* c = v.coef().data();
    for (int i = 0; i < mz; ++i)
      for (int j = 0; j < mu; ++j) {
        const double wj = bu[j];
        if (wj == 0.0) continue;
        for (int k = 0; k < mr; ++k) {
          const double wjk = wj * br[k];
          if (wjk == 0.0) continue;
          const double* row = c + ((static_cast<std::size_t>(i) * mu + j) * mr + k) * me;
          for (int l = 0; l < me; ++l) d_(i, l) += wjk * row[l];
        }
      }
  }

  /// Value and first derivatives at (z, e).
  void eval1(double z, double e, double& w, double& wz, double& we) const {
    Eigen::VectorXd bz0 = basis(0, z, 0), bz1 = basis(0, z, 1);
    Eigen::VectorXd be0 = basis(3, e, 0), be1 = basis(3, e, 1);
    const Eigen::VectorXd dz0 = d_ * be0;
    w = bz0.dot(dz0);
    wz = bz1.dot(dz0);
    we = bz0.dot(d_ * be1);
  }

  /// Value plus first and second derivatives at (z, e).
  void eval2(double z, double e, double& w, double& wz, double& we, double& wzz, double& wze, double& wee) const {
    Eigen::VectorXd bz0 = basis(0, z, 0), bz1 = basis(0, z, 1), bz2 = basis(0, z, 2);
    Eigen::VectorXd be0 = basis(3, e, 0), be1 = basis(3, e, 1), be2 = basis(3, e, 2);
    const Eigen::VectorXd dz0 = d_ * be0;
    const Eigen::VectorXd dz1 = d_ * be1;
    w = bz0.dot(dz0);
    wz = bz1.dot(dz0);
    we = bz0.dot(dz1);
    wzz = bz2.dot(dz0);
    wze = bz1.dot(dz1);
    wee = bz0.dot(d_ * be2);
  }

 private:
  /// Dense basis weights; second derivatives vanish outside the grid where
  /// the field extends linearly.
  Eigen::VectorXd basis(int dim, double x, int deriv) const {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(v_->coef_size(dim));
    const auto& g = v_->grid(dim);
    if (deriv == 2 && (x < g.front() || x > g.back())) return w;
    v_->basis_vector(dim, x, deriv, std::span<double>(w.data(), w.size()));
    return w;
  }

  const SplineField* v_ = nullptr;
  Eigen::MatrixXd d_;
};

/// Quadrature-averaged dense basis weights of dimension `dim` under the
/// conditional law x' = rho x + sigma eps, eps ~ N(0,1).
inline Eigen::VectorXd shock_basis(const SplineField& v, int dim, double x, double rho, double sigma,
                                   const QuadratureRule& quad) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(v.coef_size(dim));
  Eigen::VectorXd w(v.coef_size(dim));
  for (std::size_t m = 0; m < quad.size(); ++m) {
    v.basis_vector(dim, rho * x + sigma * quad.nodes[m], 0, std::span<double>(w.data(), w.size()));
    b += quad.weights[m] * w;
  }
  return b;
}

/// One-node saddle solve against a prepared conditional expectation.
/// Interior branch: mu2 = 0, 1-D Newton in pi. Bound branch: i = -elb,
/// 2-D Newton in (pi, mu2) with the analytic Jacobian.
inline NodeSolution node_saddle_impl(const RamseyState& s, const ExpectedValue& w, const ModelParams& p, double gamma,
                                     bool elb_on, double newton_tol, double pi_start, double mu2_start) {
  const double bg = 1.0 - p.beta * gamma;
  const double phi = p.phi_elas;
  const double chi = p.chi, kappa = p.kappa, beta = p.beta;
  const double zeta = s.zeta, e = s.pi_e_prior;
  auto ygap_of = [&](double pi) { return (bg * pi - beta * (1.0 - gamma) * e - s.u) / kappa; };
  const double dy = bg / kappa;
  auto pe_of = [&](double pi) { return (1.0 - gamma) * e + gamma * pi; };

  NodeSolution sol;

  // Interior: solve -pi + (1-bg')mu1 + beta gamma W_e = 0 with mu1 from the
  // output FOC and y from the Phillips constraint.
  {
    double pi = pi_start;
    double res = 0.0;
    bool ok = false;
    for (int it = 0; it < 80; ++it) {
      double wv, wz, we, wzz, wze, wee;
      w.eval2(0.0, pe_of(pi), wv, wz, we, wzz, wze, wee);
      const double y = ygap_of(pi);
      const double mu1 = -(chi * y + zeta / beta) / kappa;
      res = -pi + bg * mu1 + beta * gamma * we;
      if (std::abs(res) <= newton_tol) {
        ok = true;
        break;
      }
      const double dres = -1.0 - bg * chi * dy / kappa + beta * gamma * gamma * wee;
      pi -= res / dres;
    }
    if (ok) {
      const double y = ygap_of(pi);
      double wv, wz, we;
      w.eval1(0.0, pe_of(pi), wv, wz, we);
      const double ey_next = -beta * wz;
      const double i = pe_of(pi) + s.r_n + (ey_next - y) / phi;
      if (!elb_on || i >= -p.elb_level - 1e-12) {
        sol.pi = pi;
        sol.ygap = y;
        sol.i = i;
        sol.mu1 = -(chi * y + zeta / beta) / kappa;
        sol.mu2 = 0.0;
        sol.phi_elb = 0.0;
        sol.branch = RamseyBranch::Interior;
        sol.foc_residual = std::abs(res);
        return sol;
      }
    } else if (!elb_on) {
      throw std::runtime_error("node_saddle: interior Newton failed with the bound off");
    }
  }

  // Bound: i pinned at -elb; the Euler equation becomes a constraint with
  // multiplier mu2, carried forward as next period's zeta.
  Eigen::Vector2d x(pi_start, std::max(mu2_start, 0.0));
  double rmax = 0.0;
  bool ok = false;
  for (int it = 0; it < 120; ++it) {
    const double pi = x[0], mu2 = x[1];
    const double y = ygap_of(pi), pe = pe_of(pi);
    const double mu1 = (mu2 - chi * y - zeta / beta) / kappa;
    double wv, wz, we, wzz, wze, wee;
    w.eval2(mu2, pe, wv, wz, we, wzz, wze, wee);
    Eigen::Vector2d r;
    r[0] = -pi + bg * mu1 - gamma * phi * mu2 + beta * gamma * we;
    r[1] = y + phi * (-p.elb_level - pe - s.r_n) + beta * wz;
    rmax = r.cwiseAbs().maxCoeff();
    if (rmax <= newton_tol) {
      ok = true;
      break;
    }
    Eigen::Matrix2d j;
    j(0, 0) = -1.0 - bg * chi * dy / kappa + beta * gamma * gamma * wee;
    j(0, 1) = bg / kappa - gamma * phi + beta * gamma * wze;
    j(1, 0) = dy - phi * gamma + beta * gamma * wze;
    j(1, 1) = beta * wzz;
    x -= j.fullPivLu().solve(r);
  }
  if (!ok)
    throw std::runtime_error("node_saddle: bound-branch Newton failed at state (zeta=" + std::to_string(zeta) +
                             ", u=" + std::to_string(s.u) + ", r_n=" + std::to_string(s.r_n) +
                             ", pi_e=" + std::to_string(e) + ")");
  sol.pi = x[0];
  sol.mu2 = x[1];
  sol.ygap = ygap_of(sol.pi);
  sol.i = -p.elb_level;
  sol.mu1 = (sol.mu2 - chi * sol.ygap - zeta / beta) / kappa;
  sol.phi_elb = phi * sol.mu2;
  sol.branch = RamseyBranch::Bound;
  sol.foc_residual = rmax;
  if (sol.phi_elb < -1e-8)
    throw std::runtime_error("node_saddle: both branches infeasible at state (zeta=" + std::to_string(zeta) +
                             ", u=" + std::to_string(s.u) + ", r_n=" + std::to_string(s.r_n) +
                             ", pi_e=" + std::to_string(e) + ")");
  return sol;
}

/// One-period return of the recursified Lagrangian.
inline double return_h(const NodeSolution& n, const RamseyState& s, const ModelParams& p, double gamma) {
  const double pe = (1.0 - gamma) * s.pi_e_prior + gamma * n.pi;
  return -0.5 * (n.pi * n.pi + p.chi * n.ygap * n.ygap) +
         n.mu1 * (n.pi - p.kappa * n.ygap - p.beta * pe - s.u) +
         n.mu2 * (n.ygap + p.phi_elas * (n.i - pe - s.r_n)) - (s.zeta / p.beta) * n.ygap;
}

}  // namespace detail

/// One-node optimality system against a fitted value function. The
/// expectation over shock innovations is taken inside, conditional on the
/// node's (u, r_n).
inline NodeSolution node_saddle(const RamseyState& state, const SplineField& ev, const ModelParams& params,
                                double gamma, bool elb_on, double newton_tol = 1e-10) {
  QuadratureRule quad = gauss_hermite_rule(5);
  detail::ExpectedValue w(ev, detail::shock_basis(ev, 1, state.u, params.rho_u, params.sigma_u, quad),
                          detail::shock_basis(ev, 2, state.r_n, params.rho_r, params.sigma_r, quad));
  return detail::node_saddle_impl(state, w, params, gamma, elb_on, newton_tol, 0.0, 0.0);
}

/// Converged collocation solution of the commitment problem.
class PolicySolution {
 public:
  /// Value-function collocation on the 4-D state (zeta, u, r_n, pi_e_prior):
  /// optimization sweeps (a saddle solve at every node) alternate with
  /// cheap evaluation sweeps that iterate the Bellman map holding policies
  /// fixed, accelerated by Aitken extrapolation of the coefficient sequence
  /// (the discount factor 0.9975 makes plain iteration impractical). After
  /// convergence a pilot simulation checks ergodic grid coverage and widens
  /// clipped dimensions, re-solving warm-started, up to max_expansions times.
  static PolicySolution solve(const ModelParams& params, double gamma, bool elb_on, RamseyOptions opt = {}) {
    params.validate();
    opt.validate();
    if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("solve_policy: gamma in [0,1]");

    PolicySolution ps;
    ps.p_ = params;
    ps.gamma_ = gamma;
    ps.elb_on_ = elb_on;
    ps.opt_ = opt;
    ps.quad_ = gauss_hermite_rule(opt.quad_points);

    // Grid spans: shocks at +-shock_span_sd unconditional SDs; beliefs at a
    // multiple of the Taylor-economy inflation std at the same gamma; the
    // carried multiplier from a heuristic pilot span, expanded on demand.
    const double sd_u = params.sigma_u / std::sqrt(1.0 - params.rho_u * params.rho_u);
    const double sd_r = params.sigma_r / std::sqrt(1.0 - params.rho_r * params.rho_r);
    double span_e = 0.1;
    if (params.sigma_u > 0.0 || params.sigma_r > 0.0) {
      ModelParams tp = params;
      tp.set_gamma(std::max(gamma, 1e-6));
      Path pilot = stochastic_simulate(tp, 20000, 12345, 1000);
      double m = 0.0, s2 = 0.0;
      for (double x : pilot.pi) m += x;
      m /= pilot.size();
      for (double x : pilot.pi) s2 += (x - m) * (x - m);
      span_e = std::max(opt.belief_span_scale * std::sqrt(s2 / (pilot.size() - 1)), 0.1);
    }
    double span_z = opt.zeta_span;
    double span_u = std::max(opt.shock_span_sd * sd_u, 0.05);
    double span_r = std::max(opt.shock_span_sd * sd_r, 0.05);

    double* spans[4] = {&span_z, &span_u, &span_r, &span_e};
    for (int expansion = 0;; ++expansion) {
      ps.grids_ = {linspace(span_z, opt.grid_nodes), linspace(span_u, opt.grid_nodes),
                   linspace(span_r, opt.grid_nodes), linspace(span_e, opt.grid_nodes)};
      ps.iterate();
      if (params.sigma_u == 0.0 && params.sigma_r == 0.0) break;  // nothing to cover
      RamseyPath cover = ps.simulate(100000, 5000, 9001);
      ps.clip_fraction_ = cover.clip_fraction;
      if (cover.clip_fraction <= opt.max_clip_fraction || expansion >= opt.max_expansions) break;
      for (int d = 0; d < 4; ++d)
        if (cover.clip_by_dim[d] > 0) *spans[d] *= 1.5;
    }
    return ps;
  }

  /// Simulated path carrying the multipliers alongside the standard series.
  struct RamseyPath {
    Path base;
    std::vector<double> zeta, mu1, mu2, phi_elb;
    double clip_fraction = 0.0;
    int clip_by_dim[4] = {0, 0, 0, 0};
  };

  /// Stochastic rollout. Every period re-solves the node system at the
  /// current (clamped) state against the converged value function, so the
  /// optimality conditions hold pointwise along the path.
  RamseyPath simulate(int T, int burn_in, std::uint64_t seed) const {
    if (T <= burn_in) throw std::invalid_argument("simulate_ramsey: need T > burn_in");
    if (!converged_) throw std::runtime_error("simulate_ramsey: solution did not converge");
    NormalStream rng(seed);
    return rollout(T, burn_in, [&](double& eu, double& er) {
      eu = rng();
      er = rng();
    });
  }

  /// Deterministic rollout from a shocked initial state with no future
  /// innovations.
  RamseyPath impulse_response(const ShockSpec& shock, int horizon) const {
    if (!converged_) throw std::runtime_error("ramsey_irf: solution did not converge");
    double u0 = 0.0, r0 = 0.0;
    const double size = shock.sign * shock.size_sd;
    if (shock.type == ShockType::NaturalRate)
      r0 = size * p_.sigma_r;
    else
      u0 = size * p_.sigma_u;
    bool first = true;
    return rollout(horizon, 0, [&](double& eu, double& er) {
      eu = first ? u0 / std::max(p_.sigma_u, 1e-300) : 0.0;
      er = first ? r0 / std::max(p_.sigma_r, 1e-300) : 0.0;
      first = false;
    });
  }

  /// Node policy table entry order matches row-major node order.
  const std::vector<NodeSolution>& node_policies() const { return nodes_; }
  const SplineField& value() const { return v_; }
  const std::vector<std::vector<double>>& grids() const { return grids_; }
  const ModelParams& params() const { return p_; }
  double gamma() const { return gamma_; }
  bool elb_on() const { return elb_on_; }
  bool converged() const { return converged_; }
  double final_change() const { return final_change_; }
  int sweeps() const { return sweeps_; }
  double max_foc_residual() const { return max_foc_; }
  double clip_fraction() const { return clip_fraction_; }

 private:
  static std::vector<double> linspace(double span, int n) {
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = -span + 2.0 * span * i / (n - 1.0);
    return g;
  }

  void iterate() {
    const int n = opt_.grid_nodes;
    const std::size_t total = static_cast<std::size_t>(n) * n * n * n;
    std::vector<double> values(total, 0.0);
    if (v_.dim() == 4) {
      // Warm start after a grid expansion: evaluate the previous field.
      for (std::size_t idx = 0; idx < total; ++idx) {
        const double pt[4] = {grids_[0][idx / n / n / n], grids_[1][(idx / n / n) % n], grids_[2][(idx / n) % n],
                              grids_[3][idx % n]};
        values[idx] = v_.eval(std::span<const double>(pt, 4));
      }
    }
    v_ = spline_fit(grids_, values, SplineEnds::NotAKnot);
    nodes_.assign(total, NodeSolution{});

    // Quadrature-averaged shock basis weights are grid-fixed.
    std::vector<Eigen::VectorXd> bu(n), br(n);
    for (int b = 0; b < n; ++b) {
      bu[b] = detail::shock_basis(v_, 1, grids_[1][b], p_.rho_u, p_.sigma_u, quad_);
      br[b] = detail::shock_basis(v_, 2, grids_[2][b], p_.rho_r, p_.sigma_r, quad_);
    }

    std::vector<detail::ExpectedValue> w(static_cast<std::size_t>(n) * n);
    auto build_w = [&]() {
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) w[static_cast<std::size_t>(b) * n + c] = detail::ExpectedValue(v_, bu[b], br[c]);
    };
    auto node_state = [&](std::size_t idx) {
      RamseyState s;
      s.pi_e_prior = grids_[3][idx % n];
      s.r_n = grids_[2][(idx / n) % n];
      s.u = grids_[1][(idx / n / n) % n];
      s.zeta = grids_[0][idx / n / n / n];
      return s;
    };
    auto zeta_next = [&](const NodeSolution& sol) { return opt_.carry_phillips_multiplier ? sol.mu1 : sol.mu2; };

    std::vector<double> h(total), zn(total), en(total), vals_prev(total);
    converged_ = false;
    max_foc_ = 0.0;
    for (sweeps_ = 1; sweeps_ <= opt_.max_sweeps; ++sweeps_) {
      // Optimization sweep: saddle solve at every node (warm-started).
      build_w();
      max_foc_ = 0.0;
      for (std::size_t idx = 0; idx < total; ++idx) {
        const RamseyState s = node_state(idx);
        const std::size_t wix = ((idx / n / n) % n) * n + (idx / n) % n;
        NodeSolution sol = detail::node_saddle_impl(s, w[wix], p_, gamma_, elb_on_, opt_.newton_tol, nodes_[idx].pi,
                                                    nodes_[idx].mu2);
        nodes_[idx] = sol;
        max_foc_ = std::max(max_foc_, sol.foc_residual);
        h[idx] = detail::return_h(sol, s, p_, gamma_);
        zn[idx] = zeta_next(sol);
        en[idx] = (1.0 - gamma_) * s.pi_e_prior + gamma_ * sol.pi;
        double wv, wz, we;
        w[wix].eval1(zn[idx], en[idx], wv, wz, we);
        values[idx] = h[idx] + p_.beta * wv;
      }
      Eigen::VectorXd coef_before = Eigen::Map<const Eigen::VectorXd>(v_.coef().data(), v_.coef().size());
      v_ = spline_fit(grids_, values, SplineEnds::NotAKnot);
      Eigen::VectorXd coef_after = Eigen::Map<const Eigen::VectorXd>(v_.coef().data(), v_.coef().size());
      final_change_ = (coef_after - coef_before).cwiseAbs().maxCoeff();
      if (final_change_ <= opt_.tol) {
        converged_ = true;
        return;
      }

      // Evaluation sweeps: iterate the Bellman map with policies frozen.
      // The error contracts at ~beta per pass, so extrapolate the geometric
      // tail once the contraction ratio stabilizes (the fit is linear in the
      // data, so value-space extrapolation extrapolates the coefficients).
      double prev_delta = -1.0, prev_ratio = -1.0;
      vals_prev = values;
      for (int pass = 0; pass < 4000; ++pass) {
        build_w();
        for (std::size_t idx = 0; idx < total; ++idx) {
          const std::size_t wix = ((idx / n / n) % n) * n + (idx / n) % n;
          double wv, wz, we;
          w[wix].eval1(zn[idx], en[idx], wv, wz, we);
          values[idx] = h[idx] + p_.beta * wv;
        }
        double delta = 0.0;
        for (std::size_t idx = 0; idx < total; ++idx) delta = std::max(delta, std::abs(values[idx] - vals_prev[idx]));
        const double ratio = prev_delta > 0.0 ? delta / prev_delta : -1.0;
        if (ratio > 0.3 && ratio < 0.9995 && prev_ratio > 0.0 && std::abs(ratio - prev_ratio) < 1e-3 * ratio) {
          // Aitken step: jump to the limit of the geometric tail, then let
          // plain passes re-estimate the ratio.
          const double gain = ratio / (1.0 - ratio);
          for (std::size_t idx = 0; idx < total; ++idx) values[idx] += gain * (values[idx] - vals_prev[idx]);
          prev_delta = -1.0;
          prev_ratio = -1.0;
        } else {
          prev_ratio = ratio;
          prev_delta = delta;
        }
        vals_prev = values;
        v_ = spline_fit(grids_, values, SplineEnds::NotAKnot);
        if (delta <= 0.1 * opt_.tol) break;
      }
    }
    throw std::runtime_error("solve_policy: no convergence after " + std::to_string(opt_.max_sweeps) +
                             " sweeps, last coefficient change " + std::to_string(final_change_));
  }

  template <typename DrawFn>
  RamseyPath rollout(int T, int burn_in, DrawFn&& draw) const {
    RamseyPath out;
    const int keep = T - burn_in;
    auto reserve = [&](auto& v) { v.reserve(keep); };
    reserve(out.base.i);
    reserve(out.base.i_shadow);
    reserve(out.base.pi);
    reserve(out.base.pi_e);
    reserve(out.base.pi_e_hh);
    reserve(out.base.pi_e_prior);
    reserve(out.base.ygap);
    reserve(out.base.r_n);
    reserve(out.base.u);
    out.base.elb_flag.reserve(keep);
    reserve(out.zeta);
    reserve(out.mu1);
    reserve(out.mu2);
    reserve(out.phi_elb);

    double zeta = 0.0, u = 0.0, r = 0.0, e = 0.0;
    double pi_prev = 0.0, mu2_prev = 0.0;
    long clipped = 0;
    int clip_dim[4] = {0, 0, 0, 0};
    for (int t = 0; t < T; ++t) {
      double eu, er;
      draw(eu, er);
      u = p_.rho_u * u + p_.sigma_u * eu;
      r = p_.rho_r * r + p_.sigma_r * er;
      RamseyState s{zeta, u, r, e};
      bool clip = false;
      clip |= clamp_dim(0, s.zeta, clip_dim);
      clip |= clamp_dim(1, s.u, clip_dim);
      clip |= clamp_dim(2, s.r_n, clip_dim);
      clip |= clamp_dim(3, s.pi_e_prior, clip_dim);
      if (clip) ++clipped;

      detail::ExpectedValue w(v_, detail::shock_basis(v_, 1, s.u, p_.rho_u, p_.sigma_u, quad_),
                              detail::shock_basis(v_, 2, s.r_n, p_.rho_r, p_.sigma_r, quad_));
      NodeSolution sol = detail::node_saddle_impl(s, w, p_, gamma_, elb_on_, opt_.newton_tol, pi_prev, mu2_prev);
      pi_prev = sol.pi;
      mu2_prev = sol.mu2;
      const double pe_next = (1.0 - gamma_) * s.pi_e_prior + gamma_ * sol.pi;
      if (t >= burn_in) {
        out.base.i.push_back(sol.i);
        out.base.i_shadow.push_back(sol.i);
        out.base.pi.push_back(sol.pi);
        out.base.pi_e.push_back(pe_next);
        out.base.pi_e_hh.push_back(pe_next);
        out.base.pi_e_prior.push_back(s.pi_e_prior);
        out.base.ygap.push_back(sol.ygap);
        out.base.r_n.push_back(r);
        out.base.u.push_back(u);
        out.base.elb_flag.push_back(sol.branch == RamseyBranch::Bound ? 1 : 0);
        out.zeta.push_back(s.zeta);
        out.mu1.push_back(sol.mu1);
        out.mu2.push_back(sol.mu2);
        out.phi_elb.push_back(sol.phi_elb);
      }
      zeta = opt_.carry_phillips_multiplier ? sol.mu1 : sol.mu2;
      e = pe_next;
    }
    out.clip_fraction = static_cast<double>(clipped) / T;
    for (int d = 0; d < 4; ++d) out.clip_by_dim[d] = clip_dim[d];
    return out;
  }

  bool clamp_dim(int d, double& x, int clip_dim[4]) const {
    const double lo = grids_[d].front(), hi = grids_[d].back();
    if (x >= lo && x <= hi) return false;
    x = std::clamp(x, lo, hi);
    ++clip_dim[d];
    return true;
  }

  ModelParams p_;
  double gamma_ = 0.0;
  bool elb_on_ = true;
  RamseyOptions opt_;
  QuadratureRule quad_;
  std::vector<std::vector<double>> grids_;
  SplineField v_;
  std::vector<NodeSolution> nodes_;
  bool converged_ = false;
  double final_change_ = 0.0;
  int sweeps_ = 0;
  double max_foc_ = 0.0;
  double clip_fraction_ = 0.0;
};

using RamseyPath = PolicySolution::RamseyPath;

inline PolicySolution solve_policy(const ModelParams& params, double gamma, bool elb_on, RamseyOptions opt = {}) {
  return PolicySolution::solve(params, gamma, elb_on, opt);
}

inline RamseyPath simulate_ramsey(const PolicySolution& solution, int T, int burn_in, std::uint64_t seed) {
  return solution.simulate(T, burn_in, seed);
}

inline RamseyPath ramsey_irf(const PolicySolution& solution, const ShockSpec& shock, int horizon) {
  return solution.impulse_response(shock, horizon);
}

struct ErgodicStats {
  double mean_pi = 0.0;   // annualized %, the optimal inflation target
  double std_pi = 0.0;    // annualized %
  double mean_ygap = 0.0;
  double elb_frequency = 0.0;
  double welfare_per_period = 0.0;  // E[-(pi^2 + chi y^2)/2], quarterly units
  double welfare_discounted = 0.0;  // per-period value / (1 - beta)
  double clip_fraction = 0.0;
};

inline ErgodicStats ergodic_stats(const PolicySolution& solution, int T = 500000, int burn_in = 10000,
                                  std::uint64_t seed = 20240901) {
  RamseyPath path = simulate_ramsey(solution, T, burn_in, seed);
  const ModelParams& p = solution.params();
  ErgodicStats st;
  const std::size_t n = path.base.size();
  double sum_pi = 0.0, sum_y = 0.0, loss = 0.0;
  long at_elb = 0;
  for (std::size_t t = 0; t < n; ++t) {
    sum_pi += path.base.pi[t];
    sum_y += path.base.ygap[t];
    loss += 0.5 * (path.base.pi[t] * path.base.pi[t] + p.chi * path.base.ygap[t] * path.base.ygap[t]);
    at_elb += path.base.elb_flag[t];
  }
  const double mean_pi_q = sum_pi / n;
  double s2 = 0.0;
  for (std::size_t t = 0; t < n; ++t) s2 += (path.base.pi[t] - mean_pi_q) * (path.base.pi[t] - mean_pi_q);
  st.mean_pi = 4.0 * mean_pi_q;
  st.std_pi = 4.0 * std::sqrt(s2 / (n - 1));
  st.mean_ygap = sum_y / n;
  st.elb_frequency = static_cast<double>(at_elb) / n;
  st.welfare_per_period = -loss / n;
  st.welfare_discounted = st.welfare_per_period / (1.0 - p.beta);
  st.clip_fraction = path.clip_fraction;
  return st;
}

/// Pointwise residuals of the commitment target rules along a simulated
/// path: the bound-aware rule linking inflation, the output gap and the
/// lower-bound multiplier, and the no-bound rule pi + (chi/kappa)(1 - beta
/// gamma) y = 0 (which collapses to the discretion rule at gamma = 0).
struct TargetRuleResiduals {
  std::vector<double> elb_rule;
  std::vector<double> no_elb_rule;
  double max_abs_elb = 0.0, mean_abs_elb = 0.0;
  double max_abs_no_elb = 0.0, mean_abs_no_elb = 0.0;
};

inline TargetRuleResiduals target_rule_residual(const RamseyPath& path, const ModelParams& params, double gamma) {
  const double bg = 1.0 - params.beta * gamma;
  const double ck = params.chi / params.kappa;
  const double phi = params.phi_elas;
  TargetRuleResiduals res;
  const std::size_t n = path.base.size();
  res.elb_rule.resize(n);
  res.no_elb_rule.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double lhs = path.base.pi[t] + ck * bg * path.base.ygap[t];
    const double phi_lag = t == 0 ? 0.0 : path.phi_elb[t - 1];
    res.no_elb_rule[t] = lhs;
    res.elb_rule[t] = lhs - path.phi_elb[t] * (bg / (phi * params.kappa) - gamma) +
                      (bg / (params.kappa * params.beta * phi)) * phi_lag;
    res.max_abs_elb = std::max(res.max_abs_elb, std::abs(res.elb_rule[t]));
    res.mean_abs_elb += std::abs(res.elb_rule[t]);
    res.max_abs_no_elb = std::max(res.max_abs_no_elb, std::abs(res.no_elb_rule[t]));
    res.mean_abs_no_elb += std::abs(res.no_elb_rule[t]);
  }
  if (n > 0) {
    res.mean_abs_elb /= n;
    res.mean_abs_no_elb /= n;
  }
  return res;
}

/// Structural-equation residuals along a simulated commitment path. The
/// Phillips residual is checked at every date. The demand-block residual
/// needs the conditional expectation of next period's output gap, so every
/// `stride`-th date re-solves the node system at the quadrature images of
/// the next state; this measures value-function approximation error, not
/// innovation noise.
struct PathResiduals {
  double max_phillips = 0.0;
  double max_euler = 0.0;
  int euler_dates_checked = 0;
};

inline PathResiduals ramsey_path_residual(const PolicySolution& solution, const RamseyPath& path, int stride = 100) {
  const ModelParams& p = solution.params();
  const double gamma = solution.gamma();
  PathResiduals res;
  const std::size_t n = path.base.size();
  QuadratureRule quad = gauss_hermite_rule(5);
  auto clamp_to = [&](int d, double x) {
    return std::clamp(x, solution.grids()[d].front(), solution.grids()[d].back());
  };
  for (std::size_t t = 0; t + 1 < n; ++t) {
    const double pe = path.base.pi_e[t];
    const double as = path.base.pi[t] - p.beta * pe - p.kappa * path.base.ygap[t] - path.base.u[t];
    res.max_phillips = std::max(res.max_phillips, std::abs(as));
    if (stride <= 0 || t % stride != 0) continue;
    double ey_next = 0.0;
    for (std::size_t m = 0; m < quad.size(); ++m)
      for (std::size_t k = 0; k < quad.size(); ++k) {
        RamseyState s;
        s.zeta = clamp_to(0, path.zeta[t + 1]);
        s.u = clamp_to(1, p.rho_u * path.base.u[t] + p.sigma_u * quad.nodes[m]);
        s.r_n = clamp_to(2, p.rho_r * path.base.r_n[t] + p.sigma_r * quad.nodes[k]);
        s.pi_e_prior = clamp_to(3, pe);
        ey_next += quad.weights[m] * quad.weights[k] *
                   node_saddle(s, solution.value(), p, gamma, solution.elb_on()).ygap;
      }
    const double ad = path.base.ygap[t] - ey_next + p.phi_elas * (path.base.i[t] - pe - path.base.r_n[t]);
    res.max_euler = std::max(res.max_euler, std::abs(ad));
    ++res.euler_dates_checked;
  }
  return res;
}

inline constexpr const char* kErgodicCsvHeader =
    "gamma,elb_on,mean_pi_annualized,std_pi_annualized,elb_frequency,welfare_per_period,welfare_discounted,"
    "clip_fraction";

struct ErgodicCsvRow {
  double gamma;
  bool elb_on;
  ErgodicStats stats;
};

inline void save_ergodic_csv(const std::vector<ErgodicCsvRow>& rows, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write file: " + file);
  out << kErgodicCsvHeader << "\n";
  out.precision(12);
  for (const auto& r : rows)
    out << r.gamma << ',' << (r.elb_on ? 1 : 0) << ',' << r.stats.mean_pi << ',' << r.stats.std_pi << ','
        << r.stats.elb_frequency << ',' << r.stats.welfare_per_period << ',' << r.stats.welfare_discounted << ','
        << r.stats.clip_fraction << "\n";
}

inline constexpr const char* kRamseyPathCsvHeader =
    "t,i_annualized,pi_annualized,pi_e_annualized,ygap,elb_flag,r_n,u,zeta,mu1,mu2,phi_elb";

/// Rates are annualized (x4) at this I/O boundary only.
inline void save_ramsey_path_csv(const RamseyPath& path, const std::string& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write file: " + file);
  out << kRamseyPathCsvHeader << "\n";
  out.precision(12);
  for (std::size_t t = 0; t < path.base.size(); ++t)
    out << t << ',' << 4.0 * path.base.i[t] << ',' << 4.0 * path.base.pi[t] << ',' << 4.0 * path.base.pi_e[t] << ','
        << path.base.ygap[t] << ',' << path.base.elb_flag[t] << ',' << path.base.r_n[t] << ',' << path.base.u[t] << ','
        << path.zeta[t] << ',' << path.mu1[t] << ',' << path.mu2[t] << ',' << path.phi_elb[t] << "\n";
}

}  // namespace attnk
