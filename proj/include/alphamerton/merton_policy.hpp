#pragma once

// Closed-form log-utility Merton policies under an alpha-interpreted market.
// Every setting reduces to the classical myopic rule applied to the Ito-form
// (effective) drift; consumption is always the fraction rho of wealth.

#include <functional>
#include <variant>

#include "alphamerton/alpha_calculus.hpp"
#include "alphamerton/market_models.hpp"

namespace alphamerton {

/// Consumption fraction (> 0) plus either constant risky weights or a factor-dependent rule.
class Policy {
 public:
  using Rule = std::function<double(double)>;

  Policy(double consumption_fraction, Vector weights);
  Policy(double consumption_fraction, Rule rule);

  double consumption_fraction() const noexcept { return consumption_fraction_; }
  bool is_constant() const noexcept { return std::holds_alternative<Vector>(weights_); }

  /// Constant weights; throws ParameterError for a state-dependent policy.
  const Vector& weights() const;
  /// Weight in the single risky asset at factor value x (constant policies ignore x).
  double weight_at(double x) const;
  std::size_t n_assets() const;

  Policy with_consumption_fraction(double c) const;
  /// Constant weights shifted by `delta`; throws for state-dependent rules.
  Policy with_weight_offset(const Vector& delta) const;

 private:
  double consumption_fraction_;
  std::variant<Vector, Rule> weights_;
};

/// J(a, t) = (beta0 + ln(a) / rho) exp(-rho t), the value of the discounted log-utility objective.
struct LogValueFunction {
  double beta0 = 0.0;
  double rho = 0.0;
  double r = 0.0;

  double operator()(double a, double t) const;
  double d_wealth(double a, double t) const;   // J_a
  double d2_wealth(double a, double t) const;  // J_aa
  double d_time(double a, double t) const;     // J_t = -rho J
};

struct MertonSolution {
  Policy policy;
  LogValueFunction value;
};

MertonSolution solve_single_asset(double mu, double sigma, double r, double rho_discount,
                                  Interpretation alpha);

/// Solves V theta = mu_ito - r 1 through the Cholesky factor of V. A condition
/// number of V at or above 1e12 raises SolverError.
MertonSolution solve_n_asset(const ConstantVolMarket& market, double rho_discount,
                             Interpretation alpha);

/// x -> (mu(x) - r) / sigma(x)^2 + alpha rho sigma'(x) nu(x) / sigma(x)^2.
Policy solve_factor(const FactorMarket& market, double rho_discount, Interpretation alpha);

/// v -> (mu_eff - r) / v. The rule throws DomainError for v <= 0.
Policy solve_heston(const HestonMarket& market, double rho_discount, Interpretation alpha);

/// Condition number threshold used by solve_n_asset.
inline constexpr double kMaxConditionNumber = 1e12;

/// Hamiltonian of the discounted HJB evaluated at controls (c = fraction * a, theta):
///
///   e^{-rho t} ln c + J_t + J_a a (r + theta^T lambda - c / a) + 1/2 J_aa a^2 theta^T V theta
///
/// with lambda = mu_ito - r 1 and analytic derivatives of `value`. Zero at the
/// optimal pair; strictly negative elsewhere.
double hjb_residual(const Vector& mu_ito, const Matrix& V, double r, double rho_discount,
                    const Policy& policy, const LogValueFunction& value, double a, double t);

/// Scalar convenience overload: sigma is the volatility, V = sigma^2.
double hjb_residual(double mu_ito, double sigma, double r, double rho_discount,
                    const Policy& policy, const LogValueFunction& value, double a, double t);

/// Drift of ln a under a constant policy: r + theta^T lambda - c - theta^T V theta / 2.
double log_wealth_drift(const Vector& mu_ito, const Matrix& V, double r, const Policy& policy);

/// Quadratic form lambda^T V^{-1} lambda, via Cholesky.
double excess_return_quadratic(const Vector& lambda, const Matrix& V);

}  // namespace alphamerton
