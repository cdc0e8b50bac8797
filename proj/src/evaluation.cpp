#include "alphamerton/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace alphamerton {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// (1 - e^{-x}) / x
double exp_mean(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - x / 2.0;
  return -std::expm1(-x) / x;
}

// (1 - e^{-x}(1 + x)) / x^2, i.e. int_0^1 e^{-x u} u du
double exp_ramp(double x) {
  if (std::abs(x) < 0.1) {
    // sum_{k>=2} (-1)^k (k - 1) / k! x^{k-2}
    double term_factorial = 2.0;  // k!
    double power = 1.0;           // x^{k-2}
    double sum = 0.0;
    for (int k = 2; k <= 12; ++k) {
      if (k > 2) {
        term_factorial *= k;
        power *= x;
      }
      const double sign = (k % 2 == 0) ? 1.0 : -1.0;
      sum += sign * (k - 1) / term_factorial * power;
    }
    return sum;
  }
  return (1.0 - std::exp(-x) * (1.0 + x)) / (x * x);
}

struct MeanSe {
  double mean;
  double se;
  double variance;
};

MeanSe mean_and_se(const std::vector<double>& xs) {
  const auto n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = xs.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n), var};
}

void require_log_wealth(const PathEnsemble& ensemble) {
  if (ensemble.dim() < 1 || !ensemble.log_scale(0)) {
    throw ParameterError("ensemble coordinate 0 must hold log wealth");
  }
  if (ensemble.n_paths() == 0) throw ParameterError("ensemble has no paths");
}

}  // namespace

double discounted_integral(const std::vector<double>& times, const std::vector<double>& values,
                           double rho) {
  if (times.size() != values.size() || times.size() < 2) {
    throw DimensionError("time", "need matching time and value grids with >= 2 points");
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double h = times[i + 1] - times[i];
    const double x = rho * h;
    const double ramp = exp_ramp(x);
    total += std::exp(-rho * times[i]) * h *
             (values[i] * (exp_mean(x) - ramp) + values[i + 1] * ramp);
  }
  return total;
}

std::vector<double> path_utilities(const PathEnsemble& ensemble, const Policy& policy,
                                   double rho_discount, double log_drift) {
  require_log_wealth(ensemble);
  if (!(rho_discount > 0.0)) throw ParameterError("discount rate rho must be > 0");
  const double log_c = std::log(policy.consumption_fraction());
  const auto& times = ensemble.times();
  const double horizon = times.back();
  const double discount = std::exp(-rho_discount * horizon);
  std::vector<double> out(ensemble.n_paths());
  std::vector<double> values(ensemble.n_times());
  for (std::size_t p = 0; p < ensemble.n_paths(); ++p) {
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = log_c + ensemble.state(p, i, 0);
    const double tail = discount * (values.back() / rho_discount +
                                    log_drift / (rho_discount * rho_discount));
    out[p] = discounted_integral(times, values, rho_discount) + tail;
  }
  return out;
}

UtilityEstimate estimate_utility(const PathEnsemble& ensemble, const Policy& policy,
                                 double rho_discount, double log_drift) {
  const std::vector<double> u = path_utilities(ensemble, policy, rho_discount, log_drift);
  const MeanSe stats = mean_and_se(u);
  const double horizon = ensemble.times().back();
  const double discount = std::exp(-rho_discount * horizon);
  const double log_c = std::log(policy.consumption_fraction());
  double tail = 0.0;
  for (std::size_t p = 0; p < ensemble.n_paths(); ++p) {
    tail += discount * ((log_c + ensemble.state(p, ensemble.n_times() - 1, 0)) / rho_discount +
                        log_drift / (rho_discount * rho_discount));
  }
  UtilityEstimate est;
  est.point_estimate = stats.mean;
  est.standard_error = stats.se;
  est.n_paths = ensemble.n_paths();
  est.horizon = horizon;
  est.tail_correction = tail / static_cast<double>(ensemble.n_paths());
  est.discount_mass = discount;
  est.short_horizon = discount > 0.5;
  return est;
}

LogDriftReport log_drift_check(const PathEnsemble& ensemble, double expected_drift,
                               double expected_diffusion, std::size_t coord) {
  if (ensemble.n_paths() < 30) {
    throw ParameterError("log_drift_check needs at least 30 paths, got " +
                         std::to_string(ensemble.n_paths()));
  }
  if (coord >= ensemble.dim()) throw DimensionError("state", "coordinate out of range");
  const bool is_log = ensemble.log_scale(coord);
  std::vector<double> increments(ensemble.n_paths());
  for (std::size_t p = 0; p < ensemble.n_paths(); ++p) {
    const double start = ensemble.state(p, 0, coord);
    const double end = ensemble.state(p, ensemble.n_times() - 1, coord);
    increments[p] = is_log ? end - start : std::log(end) - std::log(start);
  }
  const MeanSe stats = mean_and_se(increments);
  const double horizon = ensemble.times().back();
  const auto n = static_cast<double>(ensemble.n_paths());

  LogDriftReport rep;
  rep.sample_mean = stats.mean;
  rep.sample_variance = stats.variance;
  rep.expected_mean = expected_drift * horizon;
  rep.expected_variance = expected_diffusion * expected_diffusion * horizon;

  // Summing many steps leaves rounding noise even on noise-free paths.
  const double rounding = 1e-9 * (1.0 + std::abs(rep.expected_mean));
  const double mean_band = kStandardErrorBand * stats.se + rounding;
  rep.z_mean = stats.se > 0.0 ? (stats.mean - rep.expected_mean) / stats.se
                              : (std::abs(stats.mean - rep.expected_mean) <= rounding ? 0.0
                                                                                      : kNaN);
  rep.mean_pass = std::abs(stats.mean - rep.expected_mean) <= mean_band;

  if (rep.expected_variance == 0.0) {
    rep.variance_pass = stats.variance <= 1e-20;
    rep.z_variance = rep.variance_pass ? 0.0 : kNaN;
  } else {
    const double var_se = std::sqrt(2.0 / (n - 1.0)) * rep.expected_variance;
    rep.z_variance = (stats.variance - rep.expected_variance) / var_se;
    rep.variance_pass = std::abs(rep.z_variance) <= kStandardErrorBand;
  }
  rep.pass = rep.mean_pass && rep.variance_pass;
  return rep;
}

PerturbationCurve perturbation_study(const ConstantVolMarket& market, Interpretation alpha,
                                     const Policy& base_policy, const std::vector<double>& deltas,
                                     const SimConfig& cfg, double rho_discount, double a0,
                                     std::optional<Vector> direction) {
  const auto zero = std::find(deltas.begin(), deltas.end(), 0.0);
  if (zero == deltas.end()) throw ParameterError("perturbation deltas must include 0");
  const auto zero_index = static_cast<std::size_t>(zero - deltas.begin());
  const Vector& base = base_policy.weights();
  Vector dir = direction.value_or(Vector::Unit(base.size(), 0));
  if (dir.size() != base.size()) throw DimensionError("weights", "direction size mismatch");

  const Vector mu_ito = ito_drift_diagonal_multiplicative(market.mu, market.gamma, alpha);
  const Matrix V = market.covariance();

  PerturbationCurve curve;
  curve.deltas = deltas;
  std::vector<std::vector<double>> utilities;
  for (double delta : deltas) {
    const Policy policy = base_policy.with_weight_offset(delta * dir);
    const PathEnsemble ens = simulate_wealth(market, alpha, policy, a0, cfg);
    const double g = log_wealth_drift(mu_ito, V, market.r, policy);
    utilities.push_back(path_utilities(ens, policy, rho_discount, g));
    curve.estimates.push_back(estimate_utility(ens, policy, rho_discount, g));
  }

  const std::vector<double>& u0 = utilities[zero_index];
  for (const auto& u : utilities) {
    std::vector<double> diff(u.size());
    for (std::size_t p = 0; p < u.size(); ++p) diff[p] = u[p] - u0[p];
    curve.difference_se.push_back(mean_and_se(diff).se);
  }

  const double best = curve.estimates[zero_index].point_estimate;
  curve.zero_is_max = std::all_of(curve.estimates.begin(), curve.estimates.end(),
                                  [&](const UtilityEstimate& e) { return e.point_estimate <= best; });

  if (deltas.size() >= 3) {
    Matrix design(static_cast<Eigen::Index>(deltas.size()), 3);
    Vector rhs(static_cast<Eigen::Index>(deltas.size()));
    for (std::size_t i = 0; i < deltas.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      design(row, 0) = 1.0;
      design(row, 1) = deltas[i];
      design(row, 2) = deltas[i] * deltas[i];
      rhs[row] = curve.estimates[i].point_estimate;
    }
    const Vector coef = design.colPivHouseholderQr().solve(rhs);
    curve.vertex = coef[2] != 0.0 ? -coef[1] / (2.0 * coef[2]) : kNaN;
  } else {
    curve.vertex = kNaN;
  }
  return curve;
}

bool ComparisonTable::all_pass() const {
  return !rows.empty() &&
         std::all_of(rows.begin(), rows.end(), [](const ComparisonRow& r) { return r.pass; });
}

namespace {

void flag_estimate(ComparisonRow& row, double scale, const CompareOptions& options) {
  if (row.mc.standard_error > options.wide_se_fraction * (1.0 + std::abs(scale))) {
    row.warnings.emplace_back("standard error too wide");
  }
  if (row.mc.short_horizon) row.warnings.emplace_back("horizon too short for the tail");
  if (row.failed_paths > 0) {
    row.warnings.emplace_back(std::to_string(row.failed_paths) + " paths excluded");
  }
}

ComparisonRow constant_vol_row(const ConstantVolMarket& market, Interpretation alpha, double rho,
                               const SimConfig& cfg, const CompareOptions& options) {
  ComparisonRow row;
  const MertonSolution sol = solve_n_asset(market, rho, alpha);
  const Vector mu_ito = ito_drift_diagonal_multiplicative(market.mu, market.gamma, alpha);
  const Matrix V = market.covariance();
  row.weights = sol.policy.weights();
  row.beta0 = sol.value.beta0;
  row.j_closed = sol.value(options.a0, 0.0);
  row.hjb_residual =
      hjb_residual(mu_ito, V, market.r, rho, sol.policy, sol.value, options.a0, 0.0);
  const PathEnsemble ens = simulate_wealth(market, alpha, sol.policy, options.a0, cfg);
  row.failed_paths = ens.failed_paths();
  row.mc = estimate_utility(ens, sol.policy, rho,
                            log_wealth_drift(mu_ito, V, market.r, sol.policy));
  row.mc_pass = std::abs(row.mc.point_estimate - row.j_closed) <=
                kStandardErrorBand * row.mc.standard_error;
  row.hjb_pass = std::abs(row.hjb_residual) <= kHjbRelativeTolerance * (1.0 + std::abs(row.beta0));
  row.pass = row.mc_pass && row.hjb_pass;
  flag_estimate(row, row.j_closed, options);
  return row;
}

ComparisonRow heston_row(const HestonMarket& market, Interpretation alpha, double rho,
                         const SimConfig& cfg, const CompareOptions& options) {
  ComparisonRow row;
  const HestonItoForm ito = heston_ito_form(market, alpha);
  const Policy policy = solve_heston(market, rho, alpha);
  row.weights = Vector::Constant(1, policy.weight_at(market.v0));
  row.beta0 = row.j_closed = row.hjb_residual = kNaN;
  row.feller = feller_check(ito.cir);
  // Stationary CIR law: E[1/v] = 2 kappa / (2 kappa theta_alpha - xi^2).
  double g = market.r - rho;
  if (row.feller->margin > 0.0) {
    const double excess = ito.mu_eff - market.r;
    g += 0.5 * excess * excess * 2.0 * ito.cir.kappa / row.feller->margin;
  } else {
    row.warnings.emplace_back("Feller condition fails; admissibility not guaranteed");
  }
  const PathEnsemble ens = simulate_wealth(market, alpha, policy, options.a0, cfg);
  row.failed_paths = ens.failed_paths();
  row.mc = estimate_utility(ens, policy, rho, g);
  if (rho * row.mc.horizon < 5.0) {
    row.warnings.emplace_back("rho T < 5; tail uses a stationary approximation");
  }
  row.mc_pass = std::isfinite(row.mc.point_estimate);
  row.hjb_pass = true;
  row.pass = row.mc_pass;
  flag_estimate(row, row.mc.point_estimate, options);
  return row;
}

ComparisonRow factor_row(const FactorMarket& market, Interpretation alpha, double rho,
                         const SimConfig& cfg, const CompareOptions& options) {
  ComparisonRow row;
  const Policy policy = solve_factor(market, rho, alpha);
  const double x0 = options.x0;
  row.weights = Vector::Constant(1, policy.weight_at(x0));
  row.beta0 = row.j_closed = row.hjb_residual = kNaN;
  const double s = market.sigma(x0);
  const double excess = effective_drift_factor(market, alpha, x0) - market.r;
  const double g = market.r - rho + 0.5 * excess * excess / (s * s);
  const PathEnsemble ens = simulate_wealth(market, alpha, policy, options.a0, x0, cfg);
  row.failed_paths = ens.failed_paths();
  row.mc = estimate_utility(ens, policy, rho, g);
  row.warnings.emplace_back("tail drift frozen at the initial factor value");
  row.mc_pass = std::isfinite(row.mc.point_estimate);
  row.hjb_pass = true;
  row.pass = row.mc_pass;
  flag_estimate(row, row.mc.point_estimate, options);
  return row;
}

}  // namespace

ComparisonTable compare_interpretations(const Market& market, const std::vector<double>& alphas,
                                        double rho_discount, const SimConfig& cfg,
                                        const CompareOptions& options) {
  if (alphas.empty()) throw ParameterError("at least one alpha is required");
  ComparisonTable table;
  for (double a : alphas) {
    ComparisonRow row;
    try {
      const Interpretation alpha(a);
      row = std::visit(
          [&](const auto& m) -> ComparisonRow {
            using M = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<M, ConstantVolMarket>) {
              return constant_vol_row(m, alpha, rho_discount, cfg, options);
            } else if constexpr (std::is_same_v<M, HestonMarket>) {
              return heston_row(m, alpha, rho_discount, cfg, options);
            } else {
              return factor_row(m, alpha, rho_discount, cfg, options);
            }
          },
          market);
    } catch (const SimulationError&) {
      throw;
    } catch (const Error& e) {
      row = ComparisonRow{};
      row.error = e.what();
      row.beta0 = row.j_closed = row.hjb_residual = kNaN;
    }
    row.alpha = a;
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace alphamerton
