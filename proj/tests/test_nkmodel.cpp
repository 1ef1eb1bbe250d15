#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "attnk/nkmodel.hpp"

using namespace attnk;
using Catch::Approx;

namespace {

/// Independent oracle for the FIRE no-ELB case: stack the linear
/// perfect-foresight system over the whole horizon (3 unknowns per period:
/// pi, y, shadow) and solve it in one shot with a dense LU, instead of the
/// damped path fixed point used by the library.
std::vector<double> fire_linear_oracle_pi(const ModelParams& p, const ShockSpec& shock, int H) {
  std::vector<double> r_n, u;
  detail::impulse_paths(p, shock, H, r_n, u);
  const int n = 3 * H;  // ordering: pi_t, y_t, s_t per period
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  auto pi = [](int t) { return 3 * t; };
  auto yy = [](int t) { return 3 * t + 1; };
  auto ss = [](int t) { return 3 * t + 2; };
  for (int t = 0; t < H; ++t) {
    // supply: pi_t - beta pi_{t+1} - kappa y_t = u_t  (pi_H = 0)
    int r = 3 * t;
    A(r, pi(t)) = 1.0;
    if (t + 1 < H) A(r, pi(t + 1)) = -p.beta;
    A(r, yy(t)) = -p.kappa;
    b[r] = u[t];
    // demand: y_t - y_{t+1} + phi (s_t - pi_{t+1} - r_n) = 0  (no ELB: i = s)
    r = 3 * t + 1;
    A(r, yy(t)) = 1.0;
    if (t + 1 < H) {
      A(r, yy(t + 1)) = -1.0;
      A(r, pi(t + 1)) = -p.phi_elas;
    }
    A(r, ss(t)) = p.phi_elas;
    b[r] = p.phi_elas * r_n[t];
    // rule: s_t - rho_i s_{t-1} - (1-rho_i)(phi_pi pi_t + phi_y y_t) = 0
    r = 3 * t + 2;
    A(r, ss(t)) = 1.0;
    if (t > 0) A(r, ss(t - 1)) = -p.rho_i;
    A(r, pi(t)) = -(1.0 - p.rho_i) * p.phi_pi;
    A(r, yy(t)) = -(1.0 - p.rho_i) * p.phi_y;
  }
  Eigen::VectorXd x = A.fullPivLu().solve(b);
  std::vector<double> out(H);
  for (int t = 0; t < H; ++t) out[t] = x[pi(t)];
  return out;
}

/// Sign flips of a series, ignoring magnitudes below a numerical floor.
std::vector<int> sign_flip_indices(const std::vector<double>& e, double floor = 1e-10) {
  std::vector<int> flips;
  double last = 0.0;
  int last_t = -1;
  for (int t = 0; t < static_cast<int>(e.size()); ++t) {
    if (std::abs(e[t]) < floor) continue;
    if (last != 0.0 && e[t] * last < 0.0) flips.push_back(last_t);
    last = e[t];
    last_t = t;
  }
  return flips;
}

}  // namespace

TEST_CASE("phillips coefficients closed forms") {
  ModelParams p;
  SECTION("gamma = 0 collapses to the textbook curve") {
    auto c = phillips_coefficients(p, 0.0);
    CHECK(c.prior_loading == Approx(p.beta).margin(1e-15));
    CHECK(c.output_slope == Approx(p.kappa).margin(1e-15));
    CHECK(c.shock_loading == Approx(1.0).margin(1e-15));
  }
  SECTION("gamma = 1 kills the prior and scales by 1/(1-beta)") {
    auto c = phillips_coefficients(p, 1.0);
    CHECK(c.prior_loading == Approx(0.0).margin(1e-15));
    CHECK(c.output_slope == Approx(p.kappa / (1.0 - p.beta)).margin(1e-12));
    CHECK(c.shock_loading == Approx(1.0 / (1.0 - p.beta)).margin(1e-12));
  }
  SECTION("gamma = 0.3 arithmetic cross-check") {
    auto c = phillips_coefficients(p, 0.3);
    CHECK(1.0 - 0.9975 * 0.3 == Approx(0.700750).margin(1e-12));
    CHECK(c.output_slope == Approx(0.057 / 0.700750).margin(1e-12));
    CHECK(c.output_slope == Approx(0.081342).margin(5e-7));
  }
  SECTION("output slope strictly increasing in gamma") {
    double prev = -1.0;
    for (double g = 0.0; g <= 1.0; g += 0.1) {
      auto c = phillips_coefficients(p, g);
      CHECK(c.output_slope > prev);
      prev = c.output_slope;
    }
  }
  SECTION("beta*gamma >= 1 rejected") {
    ModelParams q;
    q.beta = 0.9975;
    CHECK_THROWS_AS(phillips_coefficients(q, 1.0 / q.beta), std::invalid_argument);
  }
}

TEST_CASE("taylor rule arithmetic and the ELB kink") {
  ModelParams p;
  SECTION("steady state maps to zero") {
    auto [s, i] = taylor_rate(p, 0.0, 0.0, 0.0);
    CHECK(s == 0.0);
    CHECK(i == 0.0);
  }
  SECTION("smoothing-rule arithmetic") {
    auto [s, i] = taylor_rate(p, 0.0, 1.0, 0.0);
    CHECK(s == Approx(0.3 * 2.0).margin(1e-15));  // (1-0.7)*2*1
    CHECK(i == Approx(0.6).margin(1e-15));
  }
  SECTION("deep deflation pins the rate at the bound") {
    auto [s, i] = taylor_rate(p, 0.0, -10.0, 0.0);
    CHECK(s < -p.elb_level);
    CHECK(i == -p.elb_level);
  }
  SECTION("elb_on = false leaves the shadow rate untouched") {
    ModelParams q;
    q.elb_on = false;
    auto [s, i] = taylor_rate(q, 0.0, -10.0, 0.0);
    CHECK(i == s);
  }
  SECTION("simple rule: i = 1.5 pi, no smoothing") {
    ModelParams q;
    q.rule = TaylorRuleKind::Simple;
    auto [s, i] = taylor_rate(q, 5.0, 0.4, 7.0);  // lagged shadow and ygap ignored
    CHECK(s == Approx(0.6).margin(1e-15));
    CHECK(i == Approx(0.6).margin(1e-15));
  }
}

TEST_CASE("perfect foresight irf basics") {
  ModelParams p;
  SECTION("zero shock gives the identically zero path") {
    ShockSpec shock{ShockType::NaturalRate, 0.0, -1};
    auto path = perfect_foresight_irf(p, ExpectationKind::Limited, shock);
    for (std::size_t t = 0; t < path.size(); ++t) {
      CHECK(path.pi[t] == 0.0);
      CHECK(path.ygap[t] == 0.0);
      CHECK(path.i[t] == 0.0);
      CHECK(path.elb_flag[t] == 0);
    }
  }
  SECTION("converged paths satisfy the structural equations pointwise") {
    ShockSpec shock{ShockType::NaturalRate, 3.0, -1};
    for (ExpectationKind kind : {ExpectationKind::Fire, ExpectationKind::Limited}) {
      auto path = perfect_foresight_irf(p, kind, shock);
      CHECK(path_equation_residual(path, p) < 1e-8);
      for (std::size_t t = 0; t < path.size(); ++t) CHECK(path.i[t] >= -p.elb_level);
    }
  }
  SECTION("cost-push shock converges and respects the equations") {
    ShockSpec shock{ShockType::CostPush, 4.0, -1};
    auto path = perfect_foresight_irf(p, ExpectationKind::Limited, shock);
    CHECK(path_equation_residual(path, p) < 1e-8);
  }
  SECTION("short horizon rejected") {
    ShockSpec shock{ShockType::NaturalRate, 1.0, -1};
    CHECK_THROWS_AS(perfect_foresight_irf(p, ExpectationKind::Fire, shock, 2), std::invalid_argument);
  }
}

TEST_CASE("fire irf matches a stacked linear rational-expectations solve") {
  ModelParams p;
  p.elb_on = false;  // linear oracle has no kink
  ShockSpec shock{ShockType::NaturalRate, 0.5, -1};
  const int H = 200;
  auto path = perfect_foresight_irf(p, ExpectationKind::Fire, shock, H);
  auto oracle = fire_linear_oracle_pi(p, shock, H);
  for (int t = 0; t < H; ++t) CHECK(path.pi[t] == Approx(oracle[t]).margin(1e-6));
}

TEST_CASE("inflation-attention trap: fire vs gamma = 0.3 at the -3 SD natural-rate shock") {
  ModelParams p;
  ShockSpec shock{ShockType::NaturalRate, 3.0, -1};
  auto fire = perfect_foresight_irf(p, ExpectationKind::Fire, shock);
  ModelParams p03 = p;
  p03.set_gamma(0.3);
  auto slow = perfect_foresight_irf(p03, ExpectationKind::Limited, shock);

  auto st_fire = elb_spell_stats(fire);
  auto st_slow = elb_spell_stats(slow);
  INFO("fire spell " << st_fire.longest << ", gamma=0.3 spell " << st_slow.longest);

  SECTION("fire escapes the bound after about five quarters") {
    REQUIRE(st_fire.spell_lengths.size() == 1);
    CHECK(st_fire.longest >= 4);
    CHECK(st_fire.longest <= 6);
  }
  SECTION("low attention is stuck at least twice as long") {
    CHECK(st_slow.longest >= 2 * st_fire.longest);
  }
  SECTION("inflation still depressed at t = 20 under low attention") {
    const double annualized = 4.0 * slow.pi[20];
    CHECK(annualized >= -0.35);
    CHECK(annualized <= -0.10);
  }
  SECTION("missing deflation: the low-attention trough is strictly shallower") {
    double trough_fire = 0.0, trough_slow = 0.0;
    for (std::size_t t = 0; t < fire.size(); ++t) trough_fire = std::min(trough_fire, fire.pi[t]);
    for (std::size_t t = 0; t < slow.size(); ++t) trough_slow = std::min(trough_slow, slow.pi[t]);
    CHECK(trough_slow > trough_fire);
    CHECK(trough_slow < 0.0);
  }
}

TEST_CASE("belief persistence 0.95 shortens the trap") {
  ModelParams p;
  p.set_gamma(0.3);
  ShockSpec shock{ShockType::NaturalRate, 3.0, -1};
  auto rw = perfect_foresight_irf(p, ExpectationKind::Limited, shock);
  ModelParams q = p;
  q.rho_belief = 0.95;
  auto ar = perfect_foresight_irf(q, ExpectationKind::Limited, shock);
  CHECK(elb_spell_stats(ar).longest < elb_spell_stats(rw).longest);
}

TEST_CASE("split expectations: only firms inattentive differs from both symmetric cases") {
  ModelParams sym;
  sym.set_gamma(0.3);
  ModelParams split = sym;
  split.gamma_firms = 0.3;
  split.gamma_households = 1.0;
  ShockSpec shock{ShockType::NaturalRate, 3.0, -1};
  auto path_sym = perfect_foresight_irf(sym, ExpectationKind::Limited, shock);
  auto path_split = perfect_foresight_irf(split, ExpectationKind::Limited, shock);
  CHECK(path_equation_residual(path_split, split) < 1e-8);
  // households updating fully tracks inflation; firms' beliefs still lag
  bool differs = false;
  for (std::size_t t = 0; t < path_sym.size(); ++t)
    if (std::abs(path_sym.pi[t] - path_split.pi[t]) > 1e-6) differs = true;
  CHECK(differs);
  for (std::size_t t = 0; t < path_split.size(); ++t)
    CHECK(path_split.pi_e_hh[t] == Approx(path_split.pi[t]).margin(1e-12));
}

TEST_CASE("forecast error irf") {
  ModelParams p;
  p.set_gamma(0.3);
  SECTION("zero shock gives identically zero errors") {
    ShockSpec shock{ShockType::NaturalRate, 0.0, -1};
    auto err = forecast_error_irf(perfect_foresight_irf(p, ExpectationKind::Limited, shock));
    for (double e : err) CHECK(e == 0.0);
  }
  SECTION("gamma = 1 beliefs track current inflation up to the persistence factor") {
    ModelParams q;
    q.set_gamma(1.0);
    q.rho_belief = 0.9;  // full updating with random-walk beliefs has a (near-)unit root
    ShockSpec shock{ShockType::NaturalRate, 1.0, -1};
    auto path = perfect_foresight_irf(q, ExpectationKind::Limited, shock);
    auto err = forecast_error_irf(path);
    for (std::size_t t = 0; t + 1 < path.size(); ++t)
      CHECK(err[t] == Approx(path.pi[t + 1] - q.rho_belief * path.pi[t]).margin(1e-12));
  }
  SECTION("sign flips exactly once, between quarters 3 and 8, for both shock signs") {
    for (int sign : {+1, -1}) {
      ShockSpec shock{ShockType::NaturalRate, 3.0, sign};
      auto path = perfect_foresight_irf(p, ExpectationKind::Limited, shock);
      auto err = forecast_error_irf(path);
      if (sign > 0) CHECK(err[0] > 0.0);  // underreaction: inflation rises faster than beliefs
      auto flips = sign_flip_indices(err, 1e-9);
      INFO("sign=" << sign << " flips=" << flips.size() << (flips.empty() ? -1 : flips[0]));
      REQUIRE(flips.size() == 1);
      CHECK(flips[0] >= 3);
      CHECK(flips[0] <= 8);
    }
  }
}

TEST_CASE("elb spell bookkeeping") {
  SECTION("no ELB periods") {
    Path path;
    path.pi = {0.1, 0.2, 0.3};
    path.elb_flag = {0, 0, 0};
    auto st = elb_spell_stats(path);
    CHECK(st.spell_lengths.empty());
    CHECK(st.frequency == 0.0);
    CHECK(st.longest == 0);
  }
  SECTION("flags 1,1,0,1 give spells {2,1} and frequency 0.75") {
    Path path;
    path.pi = {-0.5, -0.4, 0.1, -0.2};
    path.elb_flag = {1, 1, 0, 1};
    auto st = elb_spell_stats(path);
    REQUIRE(st.spell_lengths.size() == 2);
    CHECK(st.spell_lengths[0] == 2);
    CHECK(st.spell_lengths[1] == 1);
    CHECK(st.frequency == Approx(0.75).margin(1e-15));
    CHECK(st.longest == 2);
    CHECK(st.mean_pi_during == Approx((-0.5 - 0.4 - 0.2) / 3.0).margin(1e-15));
    CHECK(st.mean_pi_after == Approx(0.1).margin(1e-15));
  }
  SECTION("empty path") {
    auto st = elb_spell_stats(Path{});
    CHECK(st.frequency == 0.0);
    CHECK(st.spell_lengths.empty());
  }
}

TEST_CASE("stochastic simulation") {
  ModelParams p;
  p.set_gamma(0.3);
  SECTION("zero shock volatility keeps the steady state") {
    ModelParams q = p;
    q.sigma_r = q.sigma_u = 0.0;
    auto path = stochastic_simulate(q, 200, 7);
    for (std::size_t t = 0; t < path.size(); ++t) {
      CHECK(path.pi[t] == 0.0);
      CHECK(path.ygap[t] == 0.0);
    }
  }
  SECTION("same seed reproduces the path, different seed does not") {
    auto a = stochastic_simulate(p, 500, 42, 50);
    auto b = stochastic_simulate(p, 500, 42, 50);
    auto c = stochastic_simulate(p, 500, 43, 50);
    REQUIRE(a.size() == b.size());
    bool same = true, diff = false;
    for (std::size_t t = 0; t < a.size(); ++t) {
      same = same && a.pi[t] == b.pi[t] && a.i[t] == b.i[t];
      diff = diff || a.pi[t] != c.pi[t];
    }
    CHECK(same);
    CHECK(diff);
  }
  SECTION("burn-in shortens the recorded sample") {
    auto path = stochastic_simulate(p, 300, 1, 100);
    CHECK(path.size() == 200);
    CHECK_THROWS_AS(stochastic_simulate(p, 100, 1, 100), std::invalid_argument);
  }
  SECTION("rate respects the bound exactly and flags match") {
    auto path = stochastic_simulate(p, 5000, 3, 200);
    int bound = 0;
    for (std::size_t t = 0; t < path.size(); ++t) {
      CHECK(path.i[t] >= -p.elb_level);
      if (path.elb_flag[t]) {
        CHECK(path.i[t] == Approx(-p.elb_level).margin(1e-12));
        ++bound;
      }
    }
    CHECK(bound > 0);  // Table 3 calibration visits the ELB
  }
  SECTION("inflation volatility stable across seeds within 2%") {
    auto stddev = [](const std::vector<double>& v) {
      double m = 0.0;
      for (double x : v) m += x;
      m /= v.size();
      double s = 0.0;
      for (double x : v) s += (x - m) * (x - m);
      return std::sqrt(s / (v.size() - 1));
    };
    auto a = stochastic_simulate(p, 100000, 11, 1000);
    auto b = stochastic_simulate(p, 100000, 12, 1000);
    const double sa = stddev(a.pi), sb = stddev(b.pi);
    CHECK(std::abs(sa - sb) / sa < 0.02);
  }
}

TEST_CASE("proposition-style regression identity on a no-ELB simulation") {
  // pi_t = L_prior pi^e_{t|t-1} + L_y y_t + L_u u_t holds exactly when the
  // updating rule is substituted into the supply curve, so an OLS fit on
  // simulated data recovers the closed-form loadings to machine precision.
  ModelParams p;
  p.elb_on = false;
  for (double gamma : {0.05, 0.3, 0.7}) {
    p.set_gamma(gamma);
    auto path = stochastic_simulate(p, 3000, 21, 200);
    const int n = static_cast<int>(path.size());
    Eigen::MatrixXd X(n, 3);
    Eigen::VectorXd y(n);
    for (int t = 0; t < n; ++t) {
      X(t, 0) = path.pi_e_prior[t];
      X(t, 1) = path.ygap[t];
      X(t, 2) = path.u[t];
      y[t] = path.pi[t];
    }
    Eigen::Vector3d b = (X.transpose() * X).ldlt().solve(X.transpose() * y);
    auto c = phillips_coefficients(p, gamma);
    INFO("gamma = " << gamma);
    CHECK(b[0] == Approx(c.prior_loading).margin(1e-6));
    CHECK(b[1] == Approx(c.output_slope).margin(1e-6));
    CHECK(b[2] == Approx(c.shock_loading).margin(1e-6));
  }
}

TEST_CASE("model parameter validation") {
  ModelParams p;
  SECTION("defaults valid") { CHECK_NOTHROW(p.validate()); }
  SECTION("beta outside (0,1)") {
    p.beta = 1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
  SECTION("baseline rule needs phi_pi > 1") {
    p.phi_pi = 0.9;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
  SECTION("simple rule exempt from the phi_pi check") {
    p.rule = TaylorRuleKind::Simple;
    p.phi_pi = 0.9;
    CHECK_NOTHROW(p.validate());
  }
  SECTION("gamma outside [0,1]") {
    p.gamma_firms = 1.2;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
  SECTION("negative shock std") {
    p.sigma_u = -0.1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  }
}

TEST_CASE("irf csv writer annualizes rates") {
  ModelParams p;
  p.set_gamma(0.3);
  ShockSpec shock{ShockType::NaturalRate, 3.0, -1};
  auto path = perfect_foresight_irf(p, ExpectationKind::Limited, shock);
  const std::string file = (std::filesystem::temp_directory_path() / "attnk_irf_test.csv").string();
  save_irf_csv(path, file);
  std::ifstream in(file);
  std::string header;
  std::getline(in, header);
  CHECK(header == std::string(kIrfCsvHeader));
  std::string line;
  int rows = 0;
  double t0_pi = 0.0;
  while (std::getline(in, line)) {
    if (rows == 0) {
      const auto c1 = line.find(',');
      const auto c2 = line.find(',', c1 + 1);
      t0_pi = std::stod(line.substr(c2 + 1));
    }
    ++rows;
  }
  CHECK(rows == static_cast<int>(path.size()));
  CHECK(t0_pi == Approx(4.0 * path.pi[0]).margin(1e-9));
  std::filesystem::remove(file);
}
