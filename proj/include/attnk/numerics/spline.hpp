#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

namespace attnk {

/// End conditions for cubic-spline fitting.
///  - Natural: zero second derivative at both ends (default).
///  - NotAKnot: third-derivative continuity across the first and last
///    interior knots; reproduces cubics exactly.
enum class SplineEnds { Natural, NotAKnot };

namespace detail {

/// Cubic B-spline basis functions and derivatives at u, NURBS-book A2.3.
/// t[i] <= u <= t[i+1] with a nonempty span; ders[k][j] holds the k-th
/// derivative of basis function (i-3+j), j = 0..3, k = 0..nd (nd <= 3).
inline void ders_basis_cubic(const double* t, int i, double u, int nd, double ders[4][4]) {
  constexpr int p = 3;
  double ndu[p + 1][p + 1];
  double left[p + 1], right[p + 1];
  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = u - t[i + 1 - j];
    right[j] = t[i + j] - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      const double temp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    ndu[j][j] = saved;
  }
  for (int j = 0; j <= p; ++j) ders[0][j] = ndu[j][p];
  double a[2][p + 1];
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= nd; ++k) {
      double d = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        d = a[s2][0] * ndu[rk][pk];
      }
      const int j1 = (rk >= -1) ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        d += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
        d += a[s2][k] * ndu[r][pk];
      }
      ders[k][r] = d;
      std::swap(s1, s2);
    }
  }
  double rfac = p;
  for (int k = 1; k <= nd; ++k) {
    for (int j = 0; j <= p; ++j) ders[k][j] *= rfac;
    rfac *= (p - k);
  }
}

}  // namespace detail

/// Tensor-product cubic-spline interpolant on a d-dimensional rectangular
/// grid, d in {1..4}. Immutable after fitting; evaluation supports mixed
/// first partial derivatives (analytic, not finite-difference). Outside the
/// hyper-rectangle the field extends linearly, holding the boundary
/// derivative constant.
class SplineField {
 public:
  SplineField() = default;

  /// Interpolates `values` (row-major, dimension 0 slowest) on `grids`.
  /// Each grid must be strictly increasing with at least 4 knots.
  static SplineField fit(std::vector<std::vector<double>> grids, const std::vector<double>& values,
                         SplineEnds ends = SplineEnds::Natural) {
    if (grids.empty() || grids.size() > 4) throw std::invalid_argument("spline_fit: dimension must be 1..4");
    SplineField f;
    std::size_t total = 1;
    for (auto& g : grids) {
      if (g.size() < 4) throw std::invalid_argument("spline_fit: need at least 4 knots per dimension");
      for (std::size_t i = 1; i < g.size(); ++i)
        if (!(g[i] > g[i - 1])) throw std::invalid_argument("spline_fit: grid must be strictly increasing");
      total *= g.size();
    }
    if (values.size() != total) throw std::invalid_argument("spline_fit: values shape does not match grids");

    for (auto& g : grids) f.axes_.push_back(Axis(std::move(g), ends));

    // Fit dimension by dimension: each sweep replaces the n_d data values
    // along dimension d by the n_d + 2 B-spline coefficients of the 1-D
    // interpolant through them.
    const int d = static_cast<int>(f.axes_.size());
    std::vector<double> work = values;
    std::vector<int> dims(d);
    for (int k = 0; k < d; ++k) dims[k] = static_cast<int>(f.axes_[k].x.size());
    for (int k = d - 1; k >= 0; --k) {
      const Axis& ax = f.axes_[k];
      const int n = dims[k];
      const int m = ax.ncoef();
      int inner = 1, outer = 1;
      for (int j = k + 1; j < d; ++j) inner *= dims[j];
      for (int j = 0; j < k; ++j) outer *= dims[j];
      std::vector<double> next(static_cast<std::size_t>(outer) * m * inner);
      Eigen::VectorXd rhs(m), sol(m);
      for (int o = 0; o < outer; ++o) {
        for (int in = 0; in < inner; ++in) {
          rhs.setZero();
          for (int i = 0; i < n; ++i)
            rhs[i + 1] = work[(static_cast<std::size_t>(o) * n + i) * inner + in];
          sol = ax.lu().solve(rhs);
          for (int i = 0; i < m; ++i)
            next[(static_cast<std::size_t>(o) * m + i) * inner + in] = sol[i];
        }
      }
      work.swap(next);
      dims[k] = m;
    }
    f.coef_ = std::move(work);
    for (auto& ax : f.axes_) ax.release_lu();
    return f;
  }

  int dim() const { return static_cast<int>(axes_.size()); }
  int coef_size(int d) const { return axes_[d].ncoef(); }
  const std::vector<double>& coef() const { return coef_; }
  const std::vector<double>& grid(int d) const { return axes_[d].x; }

  bool inside(std::span<const double> pt) const {
    for (int k = 0; k < dim(); ++k)
      if (pt[k] < axes_[k].x.front() || pt[k] > axes_[k].x.back()) return false;
    return true;
  }

  double eval(std::span<const double> pt) const {
    static constexpr int zeros[4] = {0, 0, 0, 0};
    return eval(pt, std::span<const int>(zeros, pt.size()));
  }

  double eval(std::initializer_list<double> pt) const { return eval(std::span<const double>(pt.begin(), pt.size())); }

  double eval(std::initializer_list<double> pt, std::initializer_list<int> deriv) const {
    return eval(std::span<const double>(pt.begin(), pt.size()), std::span<const int>(deriv.begin(), deriv.size()));
  }

  bool inside(std::initializer_list<double> pt) const { return inside(std::span<const double>(pt.begin(), pt.size())); }

  /// Mixed partial derivative; deriv[k] in {0,1} per dimension.
  double eval(std::span<const double> pt, std::span<const int> deriv) const {
    const int d = dim();
    if (static_cast<int>(pt.size()) != d || static_cast<int>(deriv.size()) != d)
      throw std::invalid_argument("spline_eval: dimension mismatch");
    int first[4];
    double b[4][4];
    for (int k = 0; k < d; ++k) {
      if (deriv[k] < 0 || deriv[k] > 1) throw std::invalid_argument("spline_eval: derivative order must be 0 or 1");
      local_basis(k, pt[k], deriv[k], first[k], b[k]);
    }
    return contract(first, b);
  }

  /// Value and full gradient in one pass.
  double eval_grad(std::span<const double> pt, std::span<double> grad) const {
    const int d = dim();
    int first[4];
    double b[4][4], db[4][4];
    for (int k = 0; k < d; ++k) {
      local_basis(k, pt[k], 0, first[k], b[k]);
      int f1;
      local_basis(k, pt[k], 1, f1, db[k]);
    }
    double sel[4][4];
    for (int k = 0; k < d; ++k) {
      for (int j = 0; j < d; ++j)
        for (int i = 0; i < 4; ++i) sel[j][i] = (j == k) ? db[j][i] : b[j][i];
      grad[k] = contract(first, sel);
    }
    return contract(first, b);
  }

  /// Dense weight vector over dimension d's coefficients: contracting the
  /// coefficient tensor along d with w is equivalent to evaluating at x in
  /// that dimension (deriv 0) or taking the partial derivative (deriv 1).
  void basis_vector(int d, double x, int deriv, std::span<double> w) const {
    std::fill(w.begin(), w.end(), 0.0);
    int first;
    double b[4];
    local_basis(d, x, deriv, first, b);
    for (int i = 0; i < 4; ++i) w[first + i] += b[i];
  }

 private:
  struct Axis {
    std::vector<double> x;
    std::vector<double> t;  // clamped knot vector, size n + 6

    Axis(std::vector<double> grid, SplineEnds ends) : x(std::move(grid)) {
      const int n = static_cast<int>(x.size());
      t.resize(n + 6);
      for (int i = 0; i < 4; ++i) t[i] = x.front();
      for (int i = 1; i + 1 < n; ++i) t[i + 3] = x[i];
      for (int i = 0; i < 4; ++i) t[n + 2 + i] = x.back();

      // Collocation matrix: row 0 = left end condition, rows 1..n = data
      // sites, row n+1 = right end condition.
      const int m = n + 2;
      Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
      double ders[4][4];
      for (int i = 0; i < n; ++i) {
        const int span = find_span(x[i]);
        detail::ders_basis_cubic(t.data(), span, x[i], 0, ders);
        for (int j = 0; j < 4; ++j) A(i + 1, span - 3 + j) = ders[0][j];
      }
      if (ends == SplineEnds::Natural) {
        int span = find_span(x.front());
        detail::ders_basis_cubic(t.data(), span, x.front(), 2, ders);
        for (int j = 0; j < 4; ++j) A(0, span - 3 + j) = ders[2][j];
        span = find_span(x.back());
        detail::ders_basis_cubic(t.data(), span, x.back(), 2, ders);
        for (int j = 0; j < 4; ++j) A(m - 1, span - 3 + j) = ders[2][j];
      } else {
        // Not-a-knot: the third derivative (constant per interval) matches
        // across x[1] and across x[n-2].
        auto third_jump_row = [&](int knot, int row) {
          const double um = 0.5 * (x[knot - 1] + x[knot]);
          const double up = 0.5 * (x[knot] + x[knot + 1]);
          int span = find_span(um);
          detail::ders_basis_cubic(t.data(), span, um, 3, ders);
          for (int j = 0; j < 4; ++j) A(row, span - 3 + j) += ders[3][j];
          span = find_span(up);
          detail::ders_basis_cubic(t.data(), span, up, 3, ders);
          for (int j = 0; j < 4; ++j) A(row, span - 3 + j) -= ders[3][j];
        };
        third_jump_row(1, 0);
        third_jump_row(n - 2, m - 1);
      }
      lu_ = std::make_shared<Eigen::PartialPivLU<Eigen::MatrixXd>>(A);
    }

    int ncoef() const { return static_cast<int>(x.size()) + 2; }

    int find_span(double u) const {
      const int hi = ncoef() - 1;  // last valid span index
      auto it = std::upper_bound(t.begin(), t.end(), u);
      int i = static_cast<int>(it - t.begin()) - 1;
      return std::clamp(i, 3, hi);
    }

    const Eigen::PartialPivLU<Eigen::MatrixXd>& lu() const { return *lu_; }
    void release_lu() { lu_.reset(); }

   private:
    std::shared_ptr<Eigen::PartialPivLU<Eigen::MatrixXd>> lu_;
  };

  /// Four local weights starting at coefficient `first`; points outside the
  /// grid use linear extension of the boundary value/derivative.
  void local_basis(int k, double u, int deriv, int& first, double b[4]) const {
    const Axis& ax = axes_[k];
    const double lo = ax.x.front(), hi = ax.x.back();
    double ders[4][4];
    if (u >= lo && u <= hi) {
      const int span = ax.find_span(u);
      detail::ders_basis_cubic(ax.t.data(), span, u, deriv, ders);
      first = span - 3;
      for (int j = 0; j < 4; ++j) b[j] = ders[deriv][j];
      return;
    }
    const double ub = (u < lo) ? lo : hi;
    const int span = ax.find_span(ub);
    detail::ders_basis_cubic(ax.t.data(), span, ub, 1, ders);
    first = span - 3;
    for (int j = 0; j < 4; ++j)
      b[j] = (deriv == 0) ? ders[0][j] + (u - ub) * ders[1][j] : ders[1][j];
  }

  double contract(const int first[4], const double b[4][4]) const {
    const int d = dim();
    int stride[4];
    stride[d - 1] = 1;
    for (int k = d - 2; k >= 0; --k) stride[k] = stride[k + 1] * axes_[k + 1].ncoef();
    double acc = 0.0;
    int idx[4] = {0, 0, 0, 0};
    while (true) {
      std::size_t off = 0;
      double w = 1.0;
      for (int k = 0; k < d; ++k) {
        off += static_cast<std::size_t>(first[k] + idx[k]) * stride[k];
        w *= b[k][idx[k]];
      }
      acc += w * coef_[off];
      int k = d - 1;
      while (k >= 0 && ++idx[k] == 4) idx[k--] = 0;
      if (k < 0) break;
    }
    return acc;
  }

  std::vector<Axis> axes_;
  std::vector<double> coef_;
};

inline SplineField spline_fit(std::vector<std::vector<double>> grids, const std::vector<double>& values,
                              SplineEnds ends = SplineEnds::Natural) {
  return SplineField::fit(std::move(grids), values, ends);
}

inline double spline_eval(const SplineField& f, std::span<const double> pt) { return f.eval(pt); }

inline double spline_eval(const SplineField& f, std::span<const double> pt, std::span<const int> deriv) {
  return f.eval(pt, deriv);
}

}  // namespace attnk
