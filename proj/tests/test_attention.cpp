#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "attnk/attention.hpp"

using namespace attnk;

TEST_CASE("stationary prior variance") {
  CHECK(stationary_prior_variance(0.0, 1.0) == Catch::Approx(1.0));
  CHECK(stationary_prior_variance(0.8, 0.36) == Catch::Approx(1.0));
  CHECK_THROWS_AS(stationary_prior_variance(1.0, 1.0), std::domain_error);
}

TEST_CASE("attention objective values") {
  BeliefParams p = BeliefParams::from_stakes(1.0, 0.0, 1.0, 1.0, 1.0);  // r=1, lambda=1
  CHECK(attention_objective(0.0, p, 1.0) == Catch::Approx(-1.0));      // -r rho^2 sigma_pi2
  // -0.5 - 0.5 log 2, verified by direct arithmetic
  CHECK(attention_objective(0.5, p, 1.0) == Catch::Approx(-0.5 - 0.5 * std::log(2.0)).margin(1e-9));
  CHECK(attention_objective(0.5, p, 1.0) == Catch::Approx(-0.846574).margin(1e-6));
  // costless information: no loss at full attention
  BeliefParams free_info = BeliefParams::from_stakes(1.0, 0.0, 1.0, 1.0, 0.0);
  CHECK(attention_objective(1.0, free_info, 1.0) == 0.0);
  CHECK(attention_objective(1.0, p, 1.0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("optimal attention closed form") {
  BeliefParams p{1.0, 0.0, 1.0, 0.0, std::nullopt, std::nullopt};
  CHECK(optimal_attention(p, 1.0) == 1.0);  // costless-information limit
  p.lambda_tilde = 2.0;
  CHECK(optimal_attention(p, 1.0) == 0.0);  // boundary of the max operator
  p.lambda_tilde = 1.0;
  CHECK(optimal_attention(p, 1.0) == Catch::Approx(0.5));
  p.rho = 0.0;
  CHECK(optimal_attention(p, 1.0) == 0.0);  // degenerate prior
}

TEST_CASE("closed form matches the grid-search oracle") {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> ul(0.0, 4.0), ur(0.1, 1.0), us(0.1, 4.0);
  for (int rep = 0; rep < 100; ++rep) {
    BeliefParams p{ur(gen), 0.0, 0.0, ul(gen), std::nullopt, std::nullopt};
    const double sigma_pi2 = us(gen);
    const double closed = optimal_attention(p, sigma_pi2);
    double best = 0.0, best_val = -std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 999; ++k) {
      const double g = 1e-3 * k;
      const double v = attention_objective(g, p, sigma_pi2);
      if (v > best_val) {
        best_val = v;
        best = g;
      }
    }
    CHECK(std::abs(closed - best) <= 2e-3);
  }
}

TEST_CASE("noise-attention mapping round trip") {
  CHECK(noise_from_attention(0.5, 1.0) == Catch::Approx(1.0));
  CHECK(noise_from_attention(1.0, 3.0) == 0.0);
  CHECK(std::isinf(noise_from_attention(0.0, 1.0)));
  const double eps2 = noise_from_attention(0.75, 2.0);
  CHECK(eps2 == Catch::Approx(2.0 / 3.0));
  CHECK(attention_from_noise(2.0, eps2) == Catch::Approx(0.75).margin(1e-12));
  CHECK(attention_from_noise(1.0, std::numeric_limits<double>::infinity()) == 0.0);
}

TEST_CASE("signal-to-noise invariance") {
  // Scaling both variances by k leaves gamma unchanged.
  const double rho = 0.9, sigma_nu2 = 0.5, sigma_eps2 = 0.8;
  const double base = attention_from_noise(stationary_prior_variance(rho, sigma_nu2), sigma_eps2);
  for (double k : {0.1, 1.0, 10.0, 137.0}) {
    const double g = attention_from_noise(stationary_prior_variance(rho, k * sigma_nu2), k * sigma_eps2);
    CHECK(std::abs(g - base) <= 1e-12);
  }
}

TEST_CASE("generalized invariance across perceived persistence") {
  // Holding sigma_nu2 fixed, (1-rho^2) sigma_eps2 constant pins down gamma.
  const double sigma_nu2 = 0.7, rho = 0.85, sigma_eps2 = 1.3;
  const double base = attention_from_noise(stationary_prior_variance(rho, sigma_nu2), sigma_eps2);
  for (double rho2 : {0.1, 0.5, 0.95}) {
    const double eps2 = (1.0 - rho * rho) * sigma_eps2 / (1.0 - rho2 * rho2);
    const double g = attention_from_noise(stationary_prior_variance(rho2, sigma_nu2), eps2);
    CHECK(std::abs(g - base) <= 1e-12);
  }
}

TEST_CASE("attention monotonicity") {
  BeliefParams p{0.8, 0.0, 0.0, 1.0, std::nullopt, std::nullopt};
  // weakly increasing in sigma_pi2
  double prev = -1.0;
  for (double s = 0.1; s < 5.0; s += 0.1) {
    const double g = optimal_attention(p, s);
    CHECK(g >= prev - 1e-15);
    prev = g;
  }
  // weakly increasing in rho
  prev = -1.0;
  for (double r = 0.0; r <= 1.0; r += 0.05) {
    BeliefParams q{r, 0.0, 0.0, 1.0, std::nullopt, std::nullopt};
    const double g = optimal_attention(q, 2.0);
    CHECK(g >= prev - 1e-15);
    prev = g;
  }
  // weakly decreasing in lambda_tilde
  prev = 2.0;
  for (double l = 0.0; l <= 4.0; l += 0.2) {
    BeliefParams q{0.8, 0.0, 0.0, l, std::nullopt, std::nullopt};
    const double g = optimal_attention(q, 2.0);
    CHECK(g <= prev + 1e-15);
    prev = g;
  }
}

TEST_CASE("forecast update rule") {
  BeliefParams rw{1.0, 0.0, 0.0, 0.0, std::nullopt, std::nullopt};
  CHECK(update_forecast(1.7, 9.9, rw, 0.0) == Catch::Approx(1.7));  // gamma=0, rho=1
  CHECK(update_forecast(1.7, 9.9, rw, 1.0) == Catch::Approx(9.9));  // gamma=1, rho=1
  BeliefParams p{0.9, 2.0, 0.0, 0.0, std::nullopt, std::nullopt};
  CHECK(update_forecast(3.0, 5.0, p, 0.4) == Catch::Approx(3.62));  // 0.2 + 2.7 + 0.72
}

TEST_CASE("update is affine with prior and observation weights summing to rho") {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    BeliefParams p{u(gen), 2.0 * u(gen) - 1.0, 0.0, 0.0, std::nullopt, std::nullopt};
    const double g = u(gen);
    const double d_prior = update_forecast(1.0, 0.0, p, g) - update_forecast(0.0, 0.0, p, g);
    const double d_obs = update_forecast(0.0, 1.0, p, g) - update_forecast(0.0, 0.0, p, g);
    CHECK(d_prior + d_obs == Catch::Approx(p.rho).margin(1e-14));
  }
}

TEST_CASE("belief parameter validation") {
  CHECK_THROWS_AS(BeliefParams::from_stakes(0.9, 0.0, 1.0, 0.0, 1.0), std::invalid_argument);   // stakes = 0
  CHECK_THROWS_AS(BeliefParams::from_stakes(0.9, 0.0, 1.0, 1.0, -1.0), std::invalid_argument);  // negative cost
  BeliefParams p = BeliefParams::from_stakes(0.9, 0.0, 1.0, 2.0, 1.0);
  CHECK(p.lambda_tilde == Catch::Approx(0.5).margin(1e-12));
}
