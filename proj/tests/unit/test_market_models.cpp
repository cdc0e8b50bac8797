#include <cmath>

#include "alphamerton/market_models.hpp"
#include "doctest.h"

using namespace alphamerton;

namespace {

HestonMarket reference_heston() {
  HestonMarket m;
  m.mu = 0.08;
  m.r = 0.03;
  m.kappa = 2.0;
  m.long_run_mean = 0.04;
  m.xi = 0.3;
  m.rho_corr = -0.7;
  m.v0 = 0.04;
  return m;
}

std::vector<double> v_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 60; ++i) g.push_back(std::pow(10.0, -3.0 + 3.0 * i / 60.0));
  return g;
}

}  // namespace

TEST_CASE("heston Ito form") {
  const auto m = reference_heston();
  SUBCASE("Ito input unchanged") {
    const auto ito = heston_ito_form(m, Interpretation::ito());
    CHECK(ito.mu_eff == m.mu);
    CHECK(ito.cir.kappa == m.kappa);
    CHECK(ito.cir.theta_alpha == m.long_run_mean);
    CHECK(ito.cir.xi == m.xi);
  }
  SUBCASE("Klimontovich fixtures") {
    const auto ito = heston_ito_form(m, Interpretation(1.0));
    CHECK(ito.mu_eff == doctest::Approx(-0.025).epsilon(1e-14));
    CHECK(ito.cir.theta_alpha == doctest::Approx(0.0625).epsilon(1e-14));
  }
  SUBCASE("theta_alpha increases with alpha") {
    double prev = -1.0;
    for (int i = 0; i <= 10; ++i) {
      const double t = heston_ito_form(m, Interpretation(i / 10.0)).cir.theta_alpha;
      CHECK(t > prev);
      prev = t;
    }
  }
  SUBCASE("agrees with the general dictionary on the (return, variance) system") {
    const auto field = return_factor_field(m.as_factor_market());
    for (double a : {0.0, 0.3, 0.5, 1.0}) {
      const auto ito_field = convert(field, Interpretation(a), Interpretation::ito());
      const auto ito = heston_ito_form(m, Interpretation(a));
      for (double v : v_grid()) {
        const Vector drift = ito_field.drift(Vector{{0.0, v}});
        CHECK(std::abs(drift[0] - ito.mu_eff) <= 1e-10);
        CHECK(std::abs(drift[1] - ito.cir.kappa * (ito.cir.theta_alpha - v)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("feller check") {
  auto f = feller_check({2.0, 0.0625, 0.3});
  CHECK(f.satisfied);
  CHECK(f.margin == doctest::Approx(0.16).epsilon(1e-14));
  f = feller_check({1.0, 0.005, 0.2});
  CHECK_FALSE(f.satisfied);
  CHECK(f.margin == doctest::Approx(-0.03).epsilon(1e-12));
  CHECK(feller_check({1.0, 0.01, 1e-9}).satisfied);

  // Passing at alpha implies passing at every larger alpha.
  HestonMarket m = reference_heston();
  m.kappa = 0.5;
  m.long_run_mean = 0.05;
  m.xi = 0.3;  // 2 k theta = 0.05 < 0.09 at alpha = 0
  bool seen_pass = false;
  for (int i = 0; i <= 20; ++i) {
    const bool ok = feller_check(heston_ito_form(m, Interpretation(i / 20.0)).cir).satisfied;
    if (seen_pass) CHECK(ok);
    seen_pass = seen_pass || ok;
  }
  CHECK(seen_pass);
}

TEST_CASE("effective drift of a factor market") {
  const auto heston = reference_heston().as_factor_market();
  SUBCASE("Heston correction is constant alpha rho xi / 2") {
    for (double a : {0.0, 0.5, 1.0})
      for (double v : v_grid())
        CHECK(effective_drift_factor(heston, Interpretation(a), v) ==
              doctest::Approx(0.08 + a * -0.7 * 0.3 / 2.0).epsilon(1e-13));
  }
  SUBCASE("zero correlation removes the correction") {
    auto m = heston;
    m.rho_corr = 0.0;
    for (double v : v_grid()) CHECK(effective_drift_factor(m, Interpretation(1.0), v) == 0.08);
  }
  SUBCASE("factor without diffusion") {
    auto m = heston;
    m.nu = {[](double) { return 0.0; }, [](double) { return 0.0; }};
    for (double v : v_grid()) CHECK(effective_drift_factor(m, Interpretation(1.0), v) == 0.08);
  }
  SUBCASE("outside the domain") {
    CHECK_THROWS_AS(effective_drift_factor(heston, Interpretation(0.5), -0.1), DomainError);
    CHECK_THROWS_AS(effective_drift_factor(heston, Interpretation(0.5), 0.0), DomainError);
  }
  SUBCASE("equals the general conversion after noise reduction") {
    // Exponential-volatility factor model without analytic derivatives.
    FactorMarket m;
    m.mu = {[](double x) { return 0.05 + 0.01 * x; }, {}};
    m.sigma = {[](double x) { return 0.2 * std::exp(0.3 * x); }, {}};
    m.b = {[](double x) { return -1.5 * x; }, {}};
    m.nu = {[](double x) { return 0.4 + 0.1 * std::sin(x); }, {}};
    m.rho_corr = -0.45;
    m.r = 0.02;
    const auto field = return_factor_field(m);
    for (double a : {0.0, 0.25, 0.5, 1.0}) {
      const auto ito = convert(field, Interpretation(a), Interpretation::ito());
      for (double x = -2.0; x <= 2.0; x += 0.1) {
        const Vector drift = ito.drift(Vector{{0.0, x}});
        CHECK(std::abs(drift[0] - effective_drift_factor(m, Interpretation(a), x)) <= 1e-10);
        CHECK(std::abs(drift[1] - factor_ito_drift(m, Interpretation(a), x)) <= 1e-10);
      }
    }
  }
}

TEST_CASE("validate") {
  CHECK(validate(reference_heston()).empty());
  auto bad = reference_heston();
  bad.rho_corr = 1.2;
  auto v = validate(bad);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "rho_corr out of [-1,1]");
  bad = reference_heston();
  bad.kappa = 0.0;
  bad.v0 = -1.0;
  CHECK(validate(bad).size() == 2);

  ConstantVolMarket cv{Vector{{0.05, 0.07}}, Matrix::Identity(2, 2) * 0.2, 0.01};
  CHECK(validate(cv).empty());
  cv.gamma.row(1).setZero();
  v = validate(cv);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "V not positive definite");
  cv.gamma = Matrix::Identity(3, 3);
  CHECK_FALSE(validate(cv).empty());

  FactorMarket fm = reference_heston().as_factor_market();
  CHECK(validate(fm).empty());
  fm.domain = {0.0, 2.0};
  fm.sigma = {[](double x) { return x < 1.0 ? 0.0 : x; }, {}};
  CHECK_FALSE(validate(fm).empty());
  fm.rho_corr = -1.5;
  CHECK(validate(fm).size() == 2);

  CHECK(validate(CirParams{2.0, 0.0625, 0.3}).empty());
  CHECK(validate(CirParams{2.0, 0.0, 0.3}).size() == 1);
}

TEST_CASE("validation grid stays inside the domain") {
  for (const OpenInterval dom : {OpenInterval{0.0, 1.0}, OpenInterval{0.0, INFINITY},
                                 OpenInterval{-INFINITY, 3.0}, OpenInterval{}}) {
    const auto g = validation_grid(dom);
    CHECK(g.size() == 1000);
    for (double x : g) CHECK(dom.contains(x));
  }
}
