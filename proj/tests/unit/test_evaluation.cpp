#include <cmath>

#include "alphamerton/evaluation.hpp"
#include "doctest.h"

using namespace alphamerton;

namespace {

SimConfig config(double T, double dt, std::size_t n, std::uint64_t seed, std::size_t save = 10) {
  SimConfig c;
  c.horizon = T;
  c.dt = dt;
  c.n_paths = n;
  c.seed = seed;
  c.save_every = save;
  return c;
}

ConstantVolMarket single(double mu, double sigma, double r) {
  return {Vector::Constant(1, mu), Matrix::Constant(1, 1, sigma), r};
}

}  // namespace

TEST_CASE("discounted integral of a linear function is exact") {
  // int_0^T e^{-rho t}(a + b t) dt
  const double a = 0.3, b = -0.7, rho = 0.4, T = 6.0;
  const double e = std::exp(-rho * T);
  const double exact = a * (1 - e) / rho + b * ((1 - e) / (rho * rho) - T * e / rho);
  for (int n : {2, 3, 17, 600}) {
    std::vector<double> t(n), v(n);
    for (int i = 0; i < n; ++i) {
      t[i] = T * i / (n - 1);
      v[i] = a + b * t[i];
    }
    CHECK(discounted_integral(t, v, rho) == doctest::Approx(exact).epsilon(1e-13));
  }
  // Tiny rho h exercises the series branch.
  std::vector<double> t{0.0, 1e-6, 2e-6}, v{1.0, 1.0, 1.0};
  CHECK(discounted_integral(t, v, 0.5) ==
        doctest::Approx((1 - std::exp(-0.5 * 2e-6)) / 0.5).epsilon(1e-13));
  CHECK_THROWS_AS(discounted_integral({0.0}, {1.0}, 0.5), DimensionError);
}

TEST_CASE("utility with no risky exposure is deterministic") {
  const double rho = 0.2, r = 0.03, a0 = 3.0;
  const auto e = simulate_wealth(single(0.08, 0.2, r), Interpretation(0.5),
                                 Policy(rho, Vector::Zero(1)), a0, config(10.0, 0.05, 40, 1));
  const auto est = estimate_utility(e, Policy(rho, Vector::Zero(1)), rho, r - rho);
  const double exact = (std::log(rho) + std::log(a0)) / rho + (r - rho) / (rho * rho);
  CHECK(est.point_estimate == doctest::Approx(exact).epsilon(1e-6));
  CHECK(est.standard_error <= 1e-9);
  CHECK(est.discount_mass == doctest::Approx(std::exp(-2.0)));
  CHECK_FALSE(est.short_horizon);
  CHECK(est.n_paths == 40);
  const auto short_run = simulate_wealth(single(0.08, 0.2, r), Interpretation(0.5),
                                         Policy(rho, Vector::Zero(1)), a0, config(1.0, 0.05, 40, 1));
  const auto short_est = estimate_utility(short_run, Policy(rho, Vector::Zero(1)), rho, r - rho);
  CHECK(short_est.short_horizon);
  // The analytic tail makes the estimate independent of the horizon here.
  CHECK(short_est.point_estimate == doctest::Approx(exact).epsilon(1e-6));
}

TEST_CASE("Monte Carlo utility closes on the value function") {
  const double rho = 0.1;
  SUBCASE("single asset") {
    const auto m = single(0.08, 0.2, 0.03);
    for (double a : {0.0, 0.5, 1.0}) {
      const Interpretation alpha(a);
      const auto sol = solve_single_asset(0.08, 0.2, 0.03, rho, alpha);
      const auto e = simulate_wealth(m, alpha, sol.policy, 1.0, config(50.0, 0.05, 4000, 11));
      const double g = log_wealth_drift(ito_drift_diagonal_multiplicative(m.mu, m.gamma, alpha),
                                        m.covariance(), m.r, sol.policy);
      const auto est = estimate_utility(e, sol.policy, rho, g);
      CHECK(std::abs(est.point_estimate - sol.value.beta0) <= 3.0 * est.standard_error);
    }
  }
  SUBCASE("two correlated assets") {
    Matrix g(2, 2);
    g << 0.2, 0.0, 0.06, 0.25;
    const ConstantVolMarket m{Vector{{0.07, 0.09}}, g, 0.02};
    const auto table = compare_interpretations(m, {0.0, 1.0}, rho, config(50.0, 0.05, 4000, 12));
    for (const auto& row : table.rows) {
      CHECK(row.error.empty());
      CHECK(row.mc_pass);
      CHECK(row.hjb_pass);
    }
    CHECK(table.all_pass());
  }
}

TEST_CASE("standard error scales like one over root n") {
  const double rho = 0.1;
  const auto m = single(0.08, 0.2, 0.03);
  const auto sol = solve_single_asset(0.08, 0.2, 0.03, rho, Interpretation(0.0));
  const double g = log_wealth_drift(m.mu, m.covariance(), m.r, sol.policy);
  const auto small = estimate_utility(
      simulate_wealth(m, Interpretation(0.0), sol.policy, 1.0, config(20.0, 0.1, 2000, 5)),
      sol.policy, rho, g);
  const auto large = estimate_utility(
      simulate_wealth(m, Interpretation(0.0), sol.policy, 1.0, config(20.0, 0.1, 8000, 6)),
      sol.policy, rho, g);
  CHECK(small.standard_error / large.standard_error == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("log drift check") {
  const auto m = single(0.08, 0.2, 0.03);
  const double rho = 0.1;
  const Interpretation alpha(0.5);
  const auto sol = solve_single_asset(0.08, 0.2, 0.03, rho, alpha);
  const double lambda = 0.08 + 0.5 * 0.04 - 0.03;
  const double theta = sol.policy.weights()[0];
  const double drift = 0.03 + theta * lambda - rho - 0.5 * theta * theta * 0.04;
  const auto e = simulate_wealth(m, alpha, sol.policy, 1.0, config(2.0, 0.01, 5000, 8));
  const auto ok = log_drift_check(e, drift, theta * 0.2);
  CHECK(ok.pass);
  CHECK(std::abs(ok.z_mean) <= 3.0);
  const auto wrong = log_drift_check(e, drift + 0.5, theta * 0.2);
  CHECK_FALSE(wrong.mean_pass);
  const auto wrong_var = log_drift_check(e, drift, 2.0 * theta * 0.2);
  CHECK_FALSE(wrong_var.variance_pass);
  const auto few = simulate_wealth(m, alpha, sol.policy, 1.0, config(1.0, 0.1, 29, 8));
  CHECK_THROWS_AS(log_drift_check(few, drift, 0.1), ParameterError);
  const auto flat = simulate_wealth(m, alpha, Policy(rho, Vector::Zero(1)), 1.0,
                                    config(1.0, 0.1, 30, 8));
  CHECK(log_drift_check(flat, 0.03 - rho, 0.0).pass);
  CHECK_FALSE(log_drift_check(flat, 0.03 - rho, 0.1).pass);
}

TEST_CASE("perturbation study peaks at the optimum") {
  const double rho = 0.1;
  const auto m = single(0.08, 0.2, 0.03);
  const Interpretation alpha(0.5);
  const auto sol = solve_single_asset(0.08, 0.2, 0.03, rho, alpha);
  const std::vector<double> deltas{-0.2, -0.1, 0.0, 0.1, 0.2};
  const auto curve = perturbation_study(m, alpha, sol.policy, deltas,
                                        config(50.0, 0.1, 10000, 21, 5), rho);
  CHECK(curve.zero_is_max);
  CHECK(std::abs(curve.vertex) < 0.05);
  CHECK(curve.difference_se[2] == 0.0);
  // Under common random numbers the expected loss -delta^2 sigma^2 / (2 rho^2) is resolved.
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    const double expected = -0.5 * deltas[i] * deltas[i] * 0.04 / (rho * rho);
    const double got = curve.estimates[i].point_estimate - curve.estimates[2].point_estimate;
    CHECK(std::abs(got - expected) <= 3.0 * curve.difference_se[i] + 1e-12);
  }
  CHECK_THROWS_AS(perturbation_study(m, alpha, sol.policy, {0.1, 0.2}, config(1.0, 0.1, 10, 1), rho),
                  ParameterError);
}

TEST_CASE("compare_interpretations rows") {
  const double rho = 0.1;
  SUBCASE("weights shift by the alpha step") {
    const auto table = compare_interpretations(single(0.08, 0.2, 0.03), {0.0, 0.5, 1.0}, rho,
                                               config(30.0, 0.1, 500, 3));
    REQUIRE(table.rows.size() == 3);
    CHECK(table.rows[1].weights[0] - table.rows[0].weights[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(table.rows[2].weights[0] - table.rows[1].weights[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(table.rows[0].beta0 < table.rows[1].beta0);
    CHECK(table.rows[1].beta0 < table.rows[2].beta0);
  }
  SUBCASE("invalid alpha is reported per row") {
    const auto table = compare_interpretations(single(0.08, 0.2, 0.03), {0.5, 1.5}, rho,
                                               config(10.0, 0.1, 100, 3));
    CHECK(table.rows[0].error.empty());
    CHECK_FALSE(table.rows[1].error.empty());
    CHECK(std::isnan(table.rows[1].beta0));
    CHECK_FALSE(table.all_pass());
  }
  SUBCASE("Heston rows carry the Feller margin") {
    const HestonMarket h{0.08, 0.03, 2.0, 0.04, 0.2, -0.7, 0.04};
    const auto table = compare_interpretations(h, {0.0, 1.0}, rho, config(10.0, 2e-3, 200, 4, 100));
    for (const auto& row : table.rows) {
      REQUIRE(row.feller.has_value());
      CHECK(row.feller->margin ==
            doctest::Approx(feller_check(heston_ito_form(h, Interpretation(row.alpha)).cir).margin));
      CHECK(std::isnan(row.j_closed));
      CHECK(std::isfinite(row.mc.point_estimate));
    }
    CHECK(table.rows[1].feller->margin > table.rows[0].feller->margin);
  }
  SUBCASE("empty alpha list") {
    CHECK_THROWS_AS(compare_interpretations(single(0.08, 0.2, 0.03), {}, rho, config(1.0, 0.1, 10, 1)),
                    ParameterError);
  }
}

TEST_CASE("analytic tail makes the estimate insensitive to the horizon") {
  const double rho = 0.1;
  const auto m = single(0.08, 0.2, 0.03);
  const Interpretation alpha(0.5);
  const auto sol = solve_single_asset(0.08, 0.2, 0.03, rho, alpha);
  const double g = log_wealth_drift(ito_drift_diagonal_multiplicative(m.mu, m.gamma, alpha),
                                    m.covariance(), m.r, sol.policy);
  const auto at = [&](double T) {
    return estimate_utility(simulate_wealth(m, alpha, sol.policy, 1.0, config(T, 0.1, 4000, 40)),
                            sol.policy, rho, g);
  };
  const auto u20 = at(20.0), u40 = at(40.0);
  CHECK(std::abs(u40.point_estimate - u20.point_estimate) <
        2.0 * std::max(u20.standard_error, u40.standard_error));
  CHECK(u40.tail_correction != u20.tail_correction);
}

TEST_CASE("policy solved under the wrong interpretation loses utility") {
  // Market read under alpha = 1; the alpha = 0 policy holds one unit too little.
  const double rho = 0.1, sigma = 0.2;
  const auto m = single(0.08, sigma, 0.03);
  const auto matched = solve_single_asset(0.08, sigma, 0.03, rho, Interpretation(1.0));
  const auto curve = perturbation_study(m, Interpretation(1.0), matched.policy, {-1.0, 0.0},
                                        config(50.0, 0.1, 4000, 41, 5), rho);
  const double loss = curve.estimates[1].point_estimate - curve.estimates[0].point_estimate;
  CHECK(loss > 0.0);
  CHECK(std::abs(loss - 0.5 * sigma * sigma / (rho * rho)) <= 3.0 * curve.difference_se[0]);
}
