#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace attnk {

/// Quadrature rule against the standard normal density: for g smooth,
/// E[g(Z)] ~= sum_m weights[m] * g(nodes[m]) with Z ~ N(0,1).
/// Exact for polynomials up to degree 2n-1. Weights sum to one and nodes are
/// symmetric about zero.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }

  template <typename F>
  double expect(F&& g) const {
    double s = 0.0;
    for (std::size_t m = 0; m < nodes.size(); ++m) s += weights[m] * g(nodes[m]);
    return s;
  }
};

/// Gauss-Hermite rule in standardized-normal units.
///
/// Computes the physicists' Gauss-Hermite nodes/weights by Newton iteration
/// on H_n (initial guesses per Stroud & Secrest), then applies the change of
/// variables x -> sqrt(2) x, w -> w / sqrt(pi) so the rule integrates against
/// the N(0,1) density directly.
inline QuadratureRule gauss_hermite_rule(int n) {
  if (n < 1 || n > 64) throw std::invalid_argument("gauss_hermite_rule: n must be in [1,64]");

  const double pi = 3.141592653589793238462643383279502884;
  std::vector<double> x(n), w(n);
  const int m = (n + 1) / 2;
  double z = 0.0;
  for (int i = 0; i < m; ++i) {
    // Initial guess for the i-th largest root.
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[i - 2];
    }
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Orthonormal Hermite recurrence: p1 = ~H_n(z), pp = d/dz ~H_n(z).
      double p1 = std::pow(pi, -0.25);
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / (j + 1.0)) * p2 - std::sqrt(static_cast<double>(j) / (j + 1.0)) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = z;
    x[n - 1 - i] = -z;
    w[i] = 2.0 / (pp * pp);
    w[n - 1 - i] = w[i];
  }
  if (n % 2 == 1) x[n / 2] = 0.0;

  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double sqrt2 = std::sqrt(2.0);
  const double sqrtpi = std::sqrt(pi);
  // Emit in increasing node order.
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = sqrt2 * x[n - 1 - i];
    rule.weights[i] = w[n - 1 - i] / sqrtpi;
  }
  return rule;
}

}  // namespace attnk
