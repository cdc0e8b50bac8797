#include "alphamerton/merton_policy.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace alphamerton {

Policy::Policy(double consumption_fraction, Vector weights)
    : consumption_fraction_(consumption_fraction), weights_(std::move(weights)) {
  if (!(consumption_fraction_ > 0.0) || !std::isfinite(consumption_fraction_)) {
    throw ParameterError("consumption fraction must be finite and > 0");
  }
  if (!std::get<Vector>(weights_).allFinite()) {
    throw ParameterError("risky weights must be finite");
  }
}

Policy::Policy(double consumption_fraction, Rule rule)
    : consumption_fraction_(consumption_fraction), weights_(std::move(rule)) {
  if (!(consumption_fraction_ > 0.0) || !std::isfinite(consumption_fraction_)) {
    throw ParameterError("consumption fraction must be finite and > 0");
  }
  if (!std::get<Rule>(weights_)) throw ParameterError("empty weight rule");
}

const Vector& Policy::weights() const {
  if (!is_constant()) throw ParameterError("policy has a state-dependent weight rule");
  return std::get<Vector>(weights_);
}

double Policy::weight_at(double x) const {
  if (is_constant()) {
    const Vector& w = std::get<Vector>(weights_);
    if (w.size() != 1) throw DimensionError("weights", "weight_at needs a single-asset policy");
    return w[0];
  }
  return std::get<Rule>(weights_)(x);
}

std::size_t Policy::n_assets() const {
  return is_constant() ? static_cast<std::size_t>(std::get<Vector>(weights_).size()) : 1;
}

Policy Policy::with_consumption_fraction(double c) const {
  if (is_constant()) return Policy(c, std::get<Vector>(weights_));
  return Policy(c, std::get<Rule>(weights_));
}

Policy Policy::with_weight_offset(const Vector& delta) const {
  const Vector& w = weights();
  if (delta.size() != w.size()) {
    throw DimensionError("weights", "offset has " + std::to_string(delta.size()) +
                                        " entries, policy has " + std::to_string(w.size()));
  }
  return Policy(consumption_fraction_, Vector(w + delta));
}

double LogValueFunction::operator()(double a, double t) const {
  return (beta0 + std::log(a) / rho) * std::exp(-rho * t);
}

double LogValueFunction::d_wealth(double a, double t) const {
  return std::exp(-rho * t) / (rho * a);
}

double LogValueFunction::d2_wealth(double a, double t) const {
  return -std::exp(-rho * t) / (rho * a * a);
}

double LogValueFunction::d_time(double a, double t) const { return -rho * (*this)(a, t); }

namespace {

void require_discount(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw ParameterError("discount rate rho must be > 0");
  }
}

// (1/rho)(r/rho + ln rho - 1) + quad / (2 rho^2)
double beta0_from_quadratic(double r, double rho, double quad) {
  return (r / rho + std::log(rho) - 1.0) / rho + quad / (2.0 * rho * rho);
}

struct CholeskySolve {
  Eigen::LLT<Matrix> llt;
  double condition;
};

CholeskySolve factor_covariance(const Matrix& V) {
  if (V.rows() != V.cols()) throw DimensionError("covariance", "covariance must be square");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(V, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  const double condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(condition < kMaxConditionNumber)) {
    throw SolverError(condition, "covariance V is numerically singular (condition estimate " +
                                     std::to_string(condition) + ")");
  }
  CholeskySolve out{Eigen::LLT<Matrix>(V), condition};
  if (out.llt.info() != Eigen::Success) {
    throw SolverError(condition, "covariance V is not positive definite");
  }
  return out;
}

}  // namespace

double excess_return_quadratic(const Vector& lambda, const Matrix& V) {
  const auto f = factor_covariance(V);
  const Vector y = f.llt.matrixL().solve(lambda);
  return y.squaredNorm();
}

MertonSolution solve_single_asset(double mu, double sigma, double r, double rho_discount,
                                  Interpretation alpha) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("sigma must be > 0");
  require_discount(rho_discount);
  const double var = sigma * sigma;
  const double excess = mu + alpha.alpha() * var - r;
  const double weight = (mu - r) / var + alpha.alpha();
  return {Policy(rho_discount, Vector::Constant(1, weight)),
          {beta0_from_quadratic(r, rho_discount, excess * excess / var), rho_discount, r}};
}

MertonSolution solve_n_asset(const ConstantVolMarket& market, double rho_discount,
                             Interpretation alpha) {
  require_discount(rho_discount);
  const Matrix V = market.covariance();
  const Vector lambda = ito_drift_diagonal_multiplicative(market.mu, market.gamma, alpha) -
                        Vector::Constant(market.mu.size(), market.r);
  const auto f = factor_covariance(V);
  Vector theta = f.llt.solve(lambda);
  const double quad = lambda.dot(theta);
  return {Policy(rho_discount, std::move(theta)),
          {beta0_from_quadratic(market.r, rho_discount, quad), rho_discount, market.r}};
}

Policy solve_factor(const FactorMarket& market, double rho_discount, Interpretation alpha) {
  require_discount(rho_discount);
  const FactorMarket m = market;
  return Policy(rho_discount, [m, alpha](double x) {
    const double s = m.sigma(x);
    return (effective_drift_factor(m, alpha, x) - m.r) / (s * s);
  });
}

Policy solve_heston(const HestonMarket& market, double rho_discount, Interpretation alpha) {
  require_discount(rho_discount);
  const double excess = heston_ito_form(market, alpha).mu_eff - market.r;
  return Policy(rho_discount, [excess](double v) {
    if (!(v > 0.0)) throw DomainError("Heston policy evaluated at variance " + std::to_string(v));
    return excess / v;
  });
}

double hjb_residual(const Vector& mu_ito, const Matrix& V, double r, double rho_discount,
                    const Policy& policy, const LogValueFunction& value, double a, double t) {
  if (!(a > 0.0)) throw ParameterError("wealth must be > 0");
  require_discount(rho_discount);
  const Vector& theta = policy.weights();
  if (theta.size() != mu_ito.size() || V.rows() != theta.size() || V.cols() != theta.size()) {
    throw DimensionError("weights", "policy, drift and covariance dimensions disagree");
  }
  const double c = policy.consumption_fraction() * a;
  const Vector lambda = mu_ito - Vector::Constant(mu_ito.size(), r);
  return std::exp(-rho_discount * t) * std::log(c) + value.d_time(a, t) +
         value.d_wealth(a, t) * a * (r + theta.dot(lambda) - c / a) +
         0.5 * value.d2_wealth(a, t) * a * a * theta.dot(V * theta);
}

double hjb_residual(double mu_ito, double sigma, double r, double rho_discount,
                    const Policy& policy, const LogValueFunction& value, double a, double t) {
  return hjb_residual(Vector::Constant(1, mu_ito), Matrix::Constant(1, 1, sigma * sigma), r,
                      rho_discount, policy, value, a, t);
}

double log_wealth_drift(const Vector& mu_ito, const Matrix& V, double r, const Policy& policy) {
  const Vector& theta = policy.weights();
  const Vector lambda = mu_ito - Vector::Constant(mu_ito.size(), r);
  return r + theta.dot(lambda) - policy.consumption_fraction() - 0.5 * theta.dot(V * theta);
}

}  // namespace alphamerton
