#include "alphamerton/market_models.hpp"

#include <cmath>
#include <utility>

namespace alphamerton {

FactorMarket HestonMarket::as_factor_market() const {
  const double kappa_ = kappa;
  const double theta_ = long_run_mean;
  const double xi_ = xi;
  const double mu_ = mu;
  FactorMarket m;
  m.mu = {[mu_](double) { return mu_; }, [](double) { return 0.0; }};
  m.sigma = {[](double v) { return std::sqrt(v); }, [](double v) { return 0.5 / std::sqrt(v); }};
  m.b = {[kappa_, theta_](double v) { return kappa_ * (theta_ - v); },
         [kappa_](double) { return -kappa_; }};
  m.nu = {[xi_](double v) { return xi_ * std::sqrt(v); },
          [xi_](double v) { return 0.5 * xi_ / std::sqrt(v); }};
  m.rho_corr = rho_corr;
  m.r = r;
  m.domain = {0.0, std::numeric_limits<double>::infinity()};
  return m;
}

HestonItoForm heston_ito_form(const HestonMarket& market, Interpretation alpha) {
  const double a = alpha.alpha();
  return {market.mu + a * market.rho_corr * market.xi / 2.0,
          {market.kappa, market.long_run_mean + a * market.xi * market.xi / (2.0 * market.kappa),
           market.xi}};
}

FellerResult feller_check(const CirParams& cir) {
  const double margin = 2.0 * cir.kappa * cir.theta_alpha - cir.xi * cir.xi;
  return {margin >= 0.0, margin};
}

namespace {

void require_in_domain(const FactorMarket& market, double x) {
  if (!market.domain.contains(x)) {
    throw DomainError("factor value " + std::to_string(x) + " outside the market domain (" +
                      std::to_string(market.domain.lower) + ", " +
                      std::to_string(market.domain.upper) + ")");
  }
}

}  // namespace

double effective_drift_factor(const FactorMarket& market, Interpretation alpha, double x) {
  require_in_domain(market, x);
  return market.mu(x) + alpha.alpha() * market.rho_corr * market.sigma.deriv(x) * market.nu(x);
}

double factor_ito_drift(const FactorMarket& market, Interpretation alpha, double x) {
  require_in_domain(market, x);
  return market.b(x) + alpha.alpha() * market.nu(x) * market.nu.deriv(x);
}

CoefficientField price_field(const ConstantVolMarket& market) {
  const Vector mu = market.mu;
  const Matrix gamma = market.gamma;
  const auto n = static_cast<std::size_t>(mu.size());
  return CoefficientField(
      n, static_cast<std::size_t>(gamma.cols()),
      [mu](const Vector& s) -> Vector { return mu.cwiseProduct(s); },
      [gamma](const Vector& s) -> Matrix { return s.asDiagonal() * gamma; },
      [gamma](const Vector& s) -> DiffusionJacobian {
        // d(S_i Gamma_ik)/dS_j = delta_ij Gamma_ik
        DiffusionJacobian jac(static_cast<std::size_t>(s.size()),
                              Matrix::Zero(gamma.rows(), gamma.cols()));
        for (Eigen::Index j = 0; j < s.size(); ++j) {
          jac[static_cast<std::size_t>(j)].row(j) = gamma.row(j);
        }
        return jac;
      });
}

CoefficientField return_factor_field(const FactorMarket& market) {
  const FactorMarket m = market;
  CoefficientField raw(
      2, 2,
      [m](const Vector& x) -> Vector {
        require_in_domain(m, x[1]);
        return Vector{{m.mu(x[1]), m.b(x[1])}};
      },
      [m](const Vector& x) -> Matrix {
        require_in_domain(m, x[1]);
        Matrix s = Matrix::Zero(2, 2);
        s(0, 0) = m.sigma(x[1]);
        s(1, 1) = m.nu(x[1]);
        return s;
      },
      [m](const Vector& x) -> DiffusionJacobian {
        require_in_domain(m, x[1]);
        DiffusionJacobian jac(2, Matrix::Zero(2, 2));
        jac[1](0, 0) = m.sigma.deriv(x[1]);
        jac[1](1, 1) = m.nu.deriv(x[1]);
        return jac;
      });
  return reduce_correlated_noise(raw, CorrelationMatrix::two_factor(m.rho_corr));
}

std::vector<double> validation_grid(const OpenInterval& domain) {
  constexpr int kPoints = 1000;
  std::vector<double> grid;
  grid.reserve(kPoints);
  const bool lo_finite = std::isfinite(domain.lower);
  const bool hi_finite = std::isfinite(domain.upper);
  for (int i = 0; i < kPoints; ++i) {
    const double u = (i + 0.5) / kPoints;  // (0, 1)
    double x;
    if (lo_finite && hi_finite) {
      x = domain.lower + u * (domain.upper - domain.lower);
    } else if (lo_finite) {
      x = domain.lower + std::pow(10.0, -6.0 + 12.0 * u);
    } else if (hi_finite) {
      x = domain.upper - std::pow(10.0, -6.0 + 12.0 * u);
    } else {
      x = std::sinh(-12.0 + 24.0 * u);
    }
    grid.push_back(x);
  }
  return grid;
}

std::vector<std::string> validate(const ConstantVolMarket& market) {
  std::vector<std::string> out;
  if (market.mu.size() < 1) {
    out.emplace_back("mu must have at least one asset");
    return out;
  }
  if (market.gamma.rows() != market.mu.size() || market.gamma.cols() != market.mu.size()) {
    out.emplace_back("Gamma must be " + std::to_string(market.mu.size()) + "x" +
                     std::to_string(market.mu.size()));
    return out;
  }
  if (!market.mu.allFinite()) out.emplace_back("mu has non-finite entries");
  if (!market.gamma.allFinite()) {
    out.emplace_back("Gamma has non-finite entries");
    return out;
  }
  if (!std::isfinite(market.r)) out.emplace_back("r is not finite");
  Eigen::LLT<Matrix> llt(market.covariance());
  if (llt.info() != Eigen::Success ||
      !(Matrix(llt.matrixL()).diagonal().minCoeff() > 0.0)) {
    out.emplace_back("V not positive definite");
  }
  return out;
}

std::vector<std::string> validate(const FactorMarket& market) {
  std::vector<std::string> out;
  if (!market.mu.value || !market.sigma.value || !market.b.value || !market.nu.value) {
    out.emplace_back("factor market coefficients mu, sigma, b, nu must all be set");
    return out;
  }
  if (!(market.rho_corr >= -1.0 && market.rho_corr <= 1.0)) {
    out.emplace_back("rho_corr out of [-1,1]");
  }
  if (!std::isfinite(market.r)) out.emplace_back("r is not finite");
  if (!(market.domain.lower < market.domain.upper)) {
    out.emplace_back("domain must be a non-empty open interval");
    return out;
  }
  for (double x : validation_grid(market.domain)) {
    const double s = market.sigma(x);
    if (!std::isfinite(s) || s == 0.0) {
      out.emplace_back("sigma vanishes or is non-finite at x = " + std::to_string(x));
      break;
    }
  }
  return out;
}

std::vector<std::string> validate(const HestonMarket& market) {
  std::vector<std::string> out;
  auto positive = [&out](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) out.emplace_back(std::string(name) + " must be > 0");
  };
  if (!std::isfinite(market.mu)) out.emplace_back("mu is not finite");
  if (!std::isfinite(market.r)) out.emplace_back("r is not finite");
  positive(market.kappa, "kappa");
  positive(market.long_run_mean, "long_run_mean");
  positive(market.xi, "xi");
  positive(market.v0, "v0");
  if (!(market.rho_corr >= -1.0 && market.rho_corr <= 1.0)) {
    out.emplace_back("rho_corr out of [-1,1]");
  }
  return out;
}

std::vector<std::string> validate(const CirParams& cir) {
  std::vector<std::string> out;
  if (!(cir.kappa > 0.0)) out.emplace_back("kappa must be > 0");
  if (!(cir.theta_alpha > 0.0)) out.emplace_back("theta_alpha must be > 0");
  if (!(cir.xi > 0.0)) out.emplace_back("xi must be > 0");
  return out;
}

}  // namespace alphamerton
