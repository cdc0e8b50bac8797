#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "alphamerton/alpha_calculus.hpp"
#include "alphamerton/market_models.hpp"
#include "alphamerton/merton_policy.hpp"
#include "alphamerton/rng.hpp"

namespace alphamerton {

enum class Scheme {
  ito_euler,    // Euler-Maruyama on the Ito form of the field
  alpha_point,  // predictor-corrector evaluating the diffusion at (1 - alpha) x + alpha x_hat
};

struct SimConfig {
  double horizon = 1.0;
  double dt = 1e-3;
  std::size_t n_paths = 1;
  std::uint64_t seed = 0;
  Scheme scheme = Scheme::ito_euler;
  /// Store every `save_every`-th step; the final step is always stored.
  std::size_t save_every = 1;
  /// Worker threads. Results do not depend on this value.
  unsigned threads = 1;

  /// round(horizon / dt); throws ParameterError if the rounding is off by more than dt / 2.
  std::size_t n_steps() const;
  /// Indices (in steps) of the stored time points, starting at 0.
  std::vector<std::size_t> saved_steps() const;
  void validate() const;
};

/// Raised by a single step when the new state is not finite. Simulations
/// catch it per path and exclude the path.
class PathFailure : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

/// Paths x stored times x state coordinates, row-major in that order.
class PathEnsemble {
 public:
  PathEnsemble(std::vector<double> times, std::size_t dim, SimConfig config,
               std::string market_id);

  std::size_t n_paths() const noexcept { return path_ids_.size(); }
  std::size_t n_times() const noexcept { return times_.size(); }
  std::size_t dim() const noexcept { return dim_; }
  const std::vector<double>& times() const noexcept { return times_; }
  const SimConfig& config() const noexcept { return config_; }
  const std::string& market_id() const noexcept { return market_id_; }

  double state(std::size_t path, std::size_t time_index, std::size_t coord) const {
    return data_[(path * times_.size() + time_index) * dim_ + coord];
  }
  /// Original path index (RNG stream id) of the stored path.
  std::uint64_t path_id(std::size_t path) const { return path_ids_[path]; }
  /// Values at the last stored time for one coordinate, in path order.
  std::vector<double> terminal(std::size_t coord) const;

  /// True when the coordinate holds a logarithm (e.g. ln wealth).
  bool log_scale(std::size_t coord) const { return log_scale_.at(coord); }
  void set_log_scale(std::size_t coord, bool value) { log_scale_.at(coord) = value; }
  const std::vector<std::string>& coordinate_names() const noexcept { return names_; }
  void set_coordinate_names(std::vector<std::string> names);

  std::size_t failed_paths() const noexcept { return failed_paths_; }
  /// Square-root schemes: steps whose raw proposal went negative, and total steps.
  std::uint64_t truncated_steps() const noexcept { return truncated_steps_; }
  std::uint64_t total_steps() const noexcept { return total_steps_; }

 private:
  friend class EnsembleBuilder;

  std::vector<double> times_;
  std::size_t dim_;
  SimConfig config_;
  std::string market_id_;
  std::vector<double> data_;
  std::vector<std::uint64_t> path_ids_;
  std::vector<bool> log_scale_;
  std::vector<std::string> names_;
  std::size_t failed_paths_ = 0;
  std::uint64_t truncated_steps_ = 0;
  std::uint64_t total_steps_ = 0;
};

/// Fraction of failed paths above which a simulation raises SimulationError.
inline constexpr double kMaxFailedPathFraction = 0.01;

/// n rows of C z sqrt(dt), z standard normal, drawn from `rng` row by row.
Matrix correlated_increments(const CorrelationMatrix& corr, double dt, std::size_t n,
                             PhiloxStream& rng);

/// x + b(x) dt + Sigma(x) dW; `field` must be in Ito form.
Vector euler_step(const CoefficientField& field, const Vector& x, const Vector& dW, double dt);

/// Predictor x_hat = x + b dt + Sigma(x) dW, then
/// x + b(x) dt + Sigma((1 - alpha) x + alpha x_hat) dW; `field` is read under alpha.
Vector alpha_point_step(const CoefficientField& field, Interpretation alpha, const Vector& x,
                        const Vector& dW, double dt);

/// One-dimensional SDE with a single driver, dX = drift(X) dt + diffusion(X) o dW.
struct ScalarSde {
  ScalarFunction drift;
  ScalarFunction diffusion;
};

double euler_step(const ScalarSde& sde, double x, double dW, double dt);
double alpha_point_step(const ScalarSde& sde, Interpretation alpha, double x, double dW,
                        double dt);

/// Simulates `field`, read under `alpha`, driven by independent Brownian motions.
/// Scheme::ito_euler converts to Ito form first; Scheme::alpha_point steps the
/// alpha form directly.
PathEnsemble simulate_sde(const CoefficientField& field, Interpretation alpha, const Vector& x0,
                          const SimConfig& cfg, std::string market_id = "field");

PathEnsemble simulate_sde(const ScalarSde& sde, Interpretation alpha, double x0,
                          const SimConfig& cfg, std::string market_id = "scalar");

// Wealth simulation in log coordinates:
//   d ln a = (r + theta^T lambda - c/a - theta^T V theta / 2) dt + theta^T Gamma dB.
// Coordinate 0 of the result is ln a; factor markets add the factor as coordinate 1.

/// Constant-volatility market read under `alpha`; `policy` must have constant weights.
PathEnsemble simulate_wealth(const ConstantVolMarket& market, Interpretation alpha,
                             const Policy& policy, double a0, const SimConfig& cfg);

/// Generic factor market. The policy is evaluated at the factor value at the
/// start of each step; the factor is advanced with Euler on its Ito form.
PathEnsemble simulate_wealth(const FactorMarket& market, Interpretation alpha,
                             const Policy& policy, double a0, double x0, const SimConfig& cfg);

/// Heston market; the variance uses full-truncation Euler with theta_alpha.
PathEnsemble simulate_wealth(const HestonMarket& market, Interpretation alpha,
                             const Policy& policy, double a0, const SimConfig& cfg);

/// Full-truncation Euler: v' = v + kappa (theta_alpha - v+) dt + xi sqrt(v+) dW.
/// Stored values are v+ = max(v, 0).
PathEnsemble simulate_cir(const CirParams& cir, double v0, const SimConfig& cfg);

}  // namespace alphamerton
