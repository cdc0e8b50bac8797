#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "alphamerton/market_models.hpp"
#include "alphamerton/merton_policy.hpp"
#include "alphamerton/sde_sim.hpp"

namespace alphamerton {

/// Monte Carlo estimate of E int_0^inf e^{-rho s} ln c_s ds.
struct UtilityEstimate {
  double point_estimate = 0.0;
  double standard_error = 0.0;
  std::size_t n_paths = 0;
  double horizon = 0.0;
  /// Path-averaged analytic tail int_T^inf (never simulated).
  double tail_correction = 0.0;
  /// e^{-rho T}: discount mass carried by the tail.
  double discount_mass = 0.0;
  /// Set when e^{-rho T} > 0.5.
  bool short_horizon = false;
};

/// Exact integral of e^{-rho s} times the linear interpolant of `values` on `times`.
/// Used per path so that a linear-in-time log-wealth mean is integrated without bias.
double discounted_integral(const std::vector<double>& times, const std::vector<double>& values,
                           double rho);

/// Per path: int_0^T e^{-rho s}(ln c + ln a_s) ds plus the analytic tail
/// e^{-rho T}[(ln c + ln a_T)/rho + g/rho^2], where `log_drift` is g, the drift of ln a
/// beyond T. Coordinate 0 of `ensemble` must hold ln a.
UtilityEstimate estimate_utility(const PathEnsemble& ensemble, const Policy& policy,
                                 double rho_discount, double log_drift);

/// Per-path discounted utilities (same quantity whose mean estimate_utility reports).
std::vector<double> path_utilities(const PathEnsemble& ensemble, const Policy& policy,
                                   double rho_discount, double log_drift);

struct LogDriftReport {
  double sample_mean = 0.0;      // of ln x_T - ln x_0
  double sample_variance = 0.0;
  double expected_mean = 0.0;    // drift * T
  double expected_variance = 0.0;  // diffusion^2 * T
  double z_mean = 0.0;
  double z_variance = 0.0;
  bool mean_pass = false;
  bool variance_pass = false;
  bool pass = false;
};

/// Compares mean and variance of ln x_T - ln x_0 with drift * T and diffusion^2 * T
/// using 3-standard-error bands. Needs at least 30 paths.
LogDriftReport log_drift_check(const PathEnsemble& ensemble, double expected_drift,
                               double expected_diffusion, std::size_t coord = 0);

struct PerturbationCurve {
  std::vector<double> deltas;
  std::vector<UtilityEstimate> estimates;
  /// Standard errors of U(delta) - U(0) under common random numbers.
  std::vector<double> difference_se;
  bool zero_is_max = false;
  /// Vertex of the least-squares quadratic through (delta, estimate).
  double vertex = 0.0;
};

/// Utility of base_policy with every weight offset by delta * direction (default:
/// first asset), all offsets sharing the same seed.
PerturbationCurve perturbation_study(const ConstantVolMarket& market, Interpretation alpha,
                                     const Policy& base_policy, const std::vector<double>& deltas,
                                     const SimConfig& cfg, double rho_discount, double a0 = 1.0,
                                     std::optional<Vector> direction = std::nullopt);

using Market = std::variant<ConstantVolMarket, FactorMarket, HestonMarket>;

struct ComparisonRow {
  double alpha = 0.0;
  Vector weights;          // constant weights, or the rule evaluated at the initial factor
  double beta0 = 0.0;      // NaN when no closed-form value exists
  double j_closed = 0.0;   // J(a0, 0); NaN when no closed form
  UtilityEstimate mc;
  double hjb_residual = 0.0;  // NaN when no closed form
  std::optional<FellerResult> feller;
  std::size_t failed_paths = 0;
  bool mc_pass = false;
  bool hjb_pass = false;
  bool pass = false;
  std::vector<std::string> warnings;
  std::string error;  // non-empty when the row could not be computed
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;
  bool all_pass() const;
};

struct CompareOptions {
  double a0 = 1.0;
  /// Initial factor value for generic factor markets.
  double x0 = 1.0;
  /// SE above this fraction of (1 + |J_closed|) adds a "standard error too wide" warning.
  double wide_se_fraction = 0.01;
};

/// One fully verified row per alpha: solve, simulate, estimate, HJB residual.
ComparisonTable compare_interpretations(const Market& market, const std::vector<double>& alphas,
                                        double rho_discount, const SimConfig& cfg,
                                        const CompareOptions& options = {});

/// Relative HJB tolerance and the Monte Carlo band width, in standard errors.
inline constexpr double kHjbRelativeTolerance = 1e-10;
inline constexpr double kStandardErrorBand = 3.0;

}  // namespace alphamerton
