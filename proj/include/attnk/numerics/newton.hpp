#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>

namespace attnk {

struct NewtonConfig {
  double tol = 1e-10;      // max-norm of the residual at the solution
  int max_iter = 60;
  double damping = 1.0;    // step fraction in (0,1]
  double fd_step = 1e-7;   // forward-difference step for numerical Jacobians

  void validate() const {
    if (!(tol > 0.0)) throw std::invalid_argument("NewtonConfig: tol must be > 0");
    if (max_iter < 1) throw std::invalid_argument("NewtonConfig: max_iter must be >= 1");
    if (!(damping > 0.0) || damping > 1.0) throw std::invalid_argument("NewtonConfig: damping must be in (0,1]");
  }
};

struct NewtonReport {
  bool converged = false;
  bool singular = false;   // Jacobian became numerically singular
  int iterations = 0;
  double residual_norm = 0.0;
};

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

/// Damped Newton iteration on residual(x) = 0. If no Jacobian is supplied,
/// a forward-difference one is built from cfg.fd_step. On success the
/// max-norm of the residual at x is <= cfg.tol. A singular Jacobian is
/// signaled in the report, never thrown.
inline NewtonReport newton_solve(const ResidualFn& residual, const JacobianFn& jacobian, Eigen::VectorXd& x,
                                 const NewtonConfig& cfg = {}) {
  cfg.validate();
  NewtonReport rep;
  const int k = static_cast<int>(x.size());
  Eigen::VectorXd r = residual(x);
  rep.residual_norm = r.lpNorm<Eigen::Infinity>();
  for (rep.iterations = 0; rep.iterations < cfg.max_iter; ++rep.iterations) {
    if (rep.residual_norm <= cfg.tol) {
      rep.converged = true;
      return rep;
    }
    Eigen::MatrixXd J;
    if (jacobian) {
      J = jacobian(x);
    } else {
      J.resize(k, k);
      Eigen::VectorXd xp = x;
      for (int j = 0; j < k; ++j) {
        const double h = cfg.fd_step * std::max(1.0, std::abs(x[j]));
        xp[j] = x[j] + h;
        J.col(j) = (residual(xp) - r) / h;
        xp[j] = x[j];
      }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
    if (!lu.isInvertible()) {
      rep.singular = true;
      return rep;
    }
    x -= cfg.damping * lu.solve(r);
    r = residual(x);
    rep.residual_norm = r.lpNorm<Eigen::Infinity>();
  }
  rep.converged = rep.residual_norm <= cfg.tol;
  return rep;
}

inline NewtonReport newton_solve(const ResidualFn& residual, Eigen::VectorXd& x, const NewtonConfig& cfg = {}) {
  return newton_solve(residual, nullptr, x, cfg);
}

}  // namespace attnk
