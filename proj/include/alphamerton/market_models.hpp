#pragma once

#include <limits>
#include <string>
#include <vector>

#include "alphamerton/alpha_calculus.hpp"

namespace alphamerton {

/// n risky assets dS_i / S_i = mu_i dt + (Gamma o_alpha dB)_i plus a money market at rate r.
struct ConstantVolMarket {
  Vector mu;
  Matrix gamma;
  double r = 0.0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(mu.size()); }
  /// V = Gamma Gamma^T.
  Matrix covariance() const { return gamma * gamma.transpose(); }
};

/// Open interval (lower, upper); infinities allowed.
struct OpenInterval {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  bool contains(double x) const noexcept { return x > lower && x < upper; }
};

/// Factor-driven single asset
///
///   dS / S = mu(X) dt + sigma(X) o_alpha dW^S
///   dX     = b(X) dt  + nu(X) o_alpha dW^X,     d<W^S, W^X> = rho_corr dt.
struct FactorMarket {
  ScalarFunction mu;
  ScalarFunction sigma;
  ScalarFunction b;
  ScalarFunction nu;
  double rho_corr = 0.0;
  double r = 0.0;
  OpenInterval domain;
};

/// Heston: sigma(v) = sqrt(v), b(v) = kappa (long_run_mean - v), nu(v) = xi sqrt(v).
struct HestonMarket {
  double mu = 0.0;
  double r = 0.0;
  double kappa = 0.0;
  double long_run_mean = 0.0;
  double xi = 0.0;
  double rho_corr = 0.0;
  double v0 = 0.0;

  /// Coefficients as a generic factor market on (0, inf), analytic derivatives.
  FactorMarket as_factor_market() const;
};

/// Ito-form square-root process dv = kappa (theta_alpha - v) dt + xi sqrt(v) dW.
struct CirParams {
  double kappa = 0.0;
  double theta_alpha = 0.0;
  double xi = 0.0;
};

struct HestonItoForm {
  double mu_eff;
  CirParams cir;
};

/// mu_eff = mu + alpha rho xi / 2 and theta_alpha = theta + alpha xi^2 / (2 kappa).
HestonItoForm heston_ito_form(const HestonMarket& market, Interpretation alpha);

struct FellerResult {
  bool satisfied;
  double margin;  // 2 kappa theta_alpha - xi^2
};

FellerResult feller_check(const CirParams& cir);

/// mu(x) + alpha rho sigma'(x) nu(x). Throws DomainError outside market.domain.
double effective_drift_factor(const FactorMarket& market, Interpretation alpha, double x);

/// Ito-form drift of the factor: b(x) + alpha nu(x) nu'(x).
double factor_ito_drift(const FactorMarket& market, Interpretation alpha, double x);

/// Diagonal-multiplicative price field: drift mu_i S_i, diffusion diag(S) Gamma.
CoefficientField price_field(const ConstantVolMarket& market);

/// Two-dimensional (cumulative return, factor) field with the correlated noise
/// already reduced to independent drivers:
///   dR = mu(X) dt + sigma(X) dW^S,  dX = b(X) dt + nu(X) dW^X.
/// Converting it from alpha to Ito reproduces effective_drift_factor and
/// factor_ito_drift.
CoefficientField return_factor_field(const FactorMarket& market);

/// Points on which "for all x in the domain" conditions are checked (1000 points).
std::vector<double> validation_grid(const OpenInterval& domain);

// Each returns one human-readable entry per violated invariant; empty means valid.
std::vector<std::string> validate(const ConstantVolMarket& market);
std::vector<std::string> validate(const FactorMarket& market);
std::vector<std::string> validate(const HestonMarket& market);
std::vector<std::string> validate(const CirParams& cir);

}  // namespace alphamerton
