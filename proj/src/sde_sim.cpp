#include "alphamerton/sde_sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>
#include <utility>

namespace alphamerton {

std::size_t SimConfig::n_steps() const {
  if (!(dt > 0.0) || !(horizon > 0.0)) throw ParameterError("horizon and dt must be > 0");
  const double ratio = horizon / dt;
  const auto steps = static_cast<std::size_t>(std::llround(ratio));
  if (steps == 0 || std::abs(static_cast<double>(steps) * dt - horizon) > dt / 2.0) {
    throw ParameterError("horizon " + std::to_string(horizon) + " is not resolved by dt " +
                         std::to_string(dt));
  }
  return steps;
}

std::vector<std::size_t> SimConfig::saved_steps() const {
  const std::size_t steps = n_steps();
  const std::size_t stride = std::max<std::size_t>(save_every, 1);
  std::vector<std::size_t> out;
  out.reserve(steps / stride + 2);
  for (std::size_t s = 0; s <= steps; s += stride) out.push_back(s);
  if (out.back() != steps) out.push_back(steps);
  return out;
}

void SimConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("dt must be > 0");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ParameterError("horizon must be > 0");
  if (dt > horizon) throw ParameterError("dt must not exceed the horizon");
  if (n_paths < 1) throw ParameterError("n_paths must be >= 1");
  if (save_every < 1) throw ParameterError("save_every must be >= 1");
  if (threads < 1) throw ParameterError("threads must be >= 1");
  (void)n_steps();
}

PathEnsemble::PathEnsemble(std::vector<double> times, std::size_t dim, SimConfig config,
                           std::string market_id)
    : times_(std::move(times)),
      dim_(dim),
      config_(config),
      market_id_(std::move(market_id)),
      log_scale_(dim, false) {
  for (std::size_t k = 0; k < dim_; ++k) names_.push_back("state_" + std::to_string(k + 1));
}

std::vector<double> PathEnsemble::terminal(std::size_t coord) const {
  std::vector<double> out(n_paths());
  for (std::size_t p = 0; p < n_paths(); ++p) out[p] = state(p, n_times() - 1, coord);
  return out;
}

void PathEnsemble::set_coordinate_names(std::vector<std::string> names) {
  if (names.size() != dim_) throw DimensionError("state", "one name per coordinate required");
  names_ = std::move(names);
}

// Collects per-path output written by independent workers, then compacts it
// in path order so the result is independent of the worker count.
class EnsembleBuilder {
 public:
  struct PathSink {
    double* out;
    const std::vector<std::size_t>* saved;
    std::size_t dim;
    std::size_t next = 0;
    std::uint64_t truncated = 0;

    /// Stores `state` if `step` is a saved step.
    void record(std::size_t step, const double* state) {
      if (next < saved->size() && (*saved)[next] == step) {
        std::copy(state, state + dim, out + next * dim);
        ++next;
      }
    }
  };

  // fn(path_index, PhiloxStream&, PathSink&) returns normally on success and
  // throws (PathFailure, DomainError, ...) to flag the path.
  template <class PathFn>
  static PathEnsemble run(const SimConfig& cfg, std::size_t dim, std::string market_id,
                          PathFn&& fn) {
    cfg.validate();
    const std::vector<std::size_t> saved = cfg.saved_steps();
    std::vector<double> times;
    times.reserve(saved.size());
    for (std::size_t s : saved) times.push_back(static_cast<double>(s) * cfg.dt);

    const std::size_t per_path = saved.size() * dim;
    std::vector<double> buffer(cfg.n_paths * per_path);
    std::vector<char> ok(cfg.n_paths, 0);
    std::vector<std::uint64_t> truncated(cfg.n_paths, 0);

    auto work = [&](std::size_t begin, std::size_t end) {
      for (std::size_t p = begin; p < end; ++p) {
        PhiloxStream rng(cfg.seed, p);
        PathSink sink{buffer.data() + p * per_path, &saved, dim};
        try {
          fn(p, rng, sink);
          ok[p] = sink.next == saved.size();
        } catch (const Error&) {
          ok[p] = 0;
        }
        truncated[p] = sink.truncated;
      }
    };

    const std::size_t workers = std::min<std::size_t>(cfg.threads, cfg.n_paths);
    if (workers <= 1) {
      work(0, cfg.n_paths);
    } else {
      std::vector<std::thread> pool;
      pool.reserve(workers);
      const std::size_t chunk = (cfg.n_paths + workers - 1) / workers;
      for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(cfg.n_paths, begin + chunk);
        if (begin < end) pool.emplace_back(work, begin, end);
      }
      for (auto& t : pool) t.join();
    }

    PathEnsemble ens(std::move(times), dim, cfg, std::move(market_id));
    const auto kept = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
    ens.data_.reserve(kept * per_path);
    ens.path_ids_.reserve(kept);
    for (std::size_t p = 0; p < cfg.n_paths; ++p) {
      ens.truncated_steps_ += truncated[p];
      if (!ok[p]) continue;
      ens.path_ids_.push_back(p);
      ens.data_.insert(ens.data_.end(), buffer.begin() + static_cast<std::ptrdiff_t>(p * per_path),
                       buffer.begin() + static_cast<std::ptrdiff_t>((p + 1) * per_path));
    }
    ens.failed_paths_ = cfg.n_paths - kept;
    ens.total_steps_ = static_cast<std::uint64_t>(cfg.n_paths) * cfg.n_steps();
    if (static_cast<double>(ens.failed_paths_) >
        kMaxFailedPathFraction * static_cast<double>(cfg.n_paths)) {
      throw SimulationError(std::to_string(ens.failed_paths_) + " of " +
                            std::to_string(cfg.n_paths) +
                            " paths failed, above the 1% budget");
    }
    return ens;
  }
};

Matrix correlated_increments(const CorrelationMatrix& corr, double dt, std::size_t n,
                             PhiloxStream& rng) {
  if (!(dt > 0.0)) throw ParameterError("dt must be > 0");
  const auto m = static_cast<Eigen::Index>(corr.size());
  Matrix z(static_cast<Eigen::Index>(n), m);
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index k = 0; k < m; ++k) z(i, k) = rng.next_normal();
  }
  return std::sqrt(dt) * z * corr.factor().transpose();
}

namespace {

Vector checked(Vector x) {
  if (!x.allFinite()) throw PathFailure("non-finite state after step");
  return x;
}

double checked(double x) {
  if (!std::isfinite(x)) throw PathFailure("non-finite state after step");
  return x;
}

void require_noise_size(const CoefficientField& field, const Vector& dW) {
  if (static_cast<std::size_t>(dW.size()) != field.noise_dim()) {
    throw DimensionError("noise", "increment has " + std::to_string(dW.size()) +
                                      " entries, field has " +
                                      std::to_string(field.noise_dim()) + " drivers");
  }
}

}  // namespace

Vector euler_step(const CoefficientField& field, const Vector& x, const Vector& dW, double dt) {
  require_noise_size(field, dW);
  return checked(x + field.drift(x) * dt + field.diffusion(x) * dW);
}

Vector alpha_point_step(const CoefficientField& field, Interpretation alpha, const Vector& x,
                        const Vector& dW, double dt) {
  require_noise_size(field, dW);
  const Vector b = field.drift(x);
  const Matrix s = field.diffusion(x);
  if (alpha.alpha() == 0.0) return checked(x + b * dt + s * dW);
  const Vector predictor = x + b * dt + s * dW;
  const Vector midpoint = (1.0 - alpha.alpha()) * x + alpha.alpha() * predictor;
  return checked(x + b * dt + field.diffusion(midpoint) * dW);
}

double euler_step(const ScalarSde& sde, double x, double dW, double dt) {
  return checked(x + sde.drift(x) * dt + sde.diffusion(x) * dW);
}

double alpha_point_step(const ScalarSde& sde, Interpretation alpha, double x, double dW,
                        double dt) {
  const double b = sde.drift(x);
  const double s = sde.diffusion(x);
  if (alpha.alpha() == 0.0) return checked(x + b * dt + s * dW);
  const double predictor = x + b * dt + s * dW;
  const double midpoint = (1.0 - alpha.alpha()) * x + alpha.alpha() * predictor;
  return checked(x + b * dt + sde.diffusion(midpoint) * dW);
}

PathEnsemble simulate_sde(const CoefficientField& field, Interpretation alpha, const Vector& x0,
                          const SimConfig& cfg, std::string market_id) {
  if (static_cast<std::size_t>(x0.size()) != field.state_dim()) {
    throw DimensionError("state", "initial state dimension does not match the field");
  }
  const bool direct = cfg.scheme == Scheme::alpha_point;
  const CoefficientField stepped = direct ? field : convert(field, alpha, Interpretation::ito());
  const std::size_t steps = cfg.n_steps();
  const double sqrt_dt = std::sqrt(cfg.dt);
  const auto m = static_cast<Eigen::Index>(field.noise_dim());
  return EnsembleBuilder::run(
      cfg, field.state_dim(), std::move(market_id),
      [&](std::size_t, PhiloxStream& rng, EnsembleBuilder::PathSink& sink) {
        Vector x = x0;
        Vector dW(m);
        sink.record(0, x.data());
        for (std::size_t s = 1; s <= steps; ++s) {
          for (Eigen::Index k = 0; k < m; ++k) dW[k] = sqrt_dt * rng.next_normal();
          x = direct ? alpha_point_step(stepped, alpha, x, dW, cfg.dt)
                     : euler_step(stepped, x, dW, cfg.dt);
          sink.record(s, x.data());
        }
      });
}

PathEnsemble simulate_sde(const ScalarSde& sde, Interpretation alpha, double x0,
                          const SimConfig& cfg, std::string market_id) {
  const bool direct = cfg.scheme == Scheme::alpha_point;
  ScalarSde stepped = sde;
  if (!direct && alpha.alpha() != 0.0) {
    const double a = alpha.alpha();
    stepped.drift = {[sde, a](double x) { return sde.drift(x) + a * sde.diffusion(x) *
                                                                     sde.diffusion.deriv(x); },
                     {}};
  }
  const std::size_t steps = cfg.n_steps();
  const double sqrt_dt = std::sqrt(cfg.dt);
  return EnsembleBuilder::run(
      cfg, 1, std::move(market_id),
      [&](std::size_t, PhiloxStream& rng, EnsembleBuilder::PathSink& sink) {
        double x = x0;
        sink.record(0, &x);
        for (std::size_t s = 1; s <= steps; ++s) {
          const double dW = sqrt_dt * rng.next_normal();
          x = direct ? alpha_point_step(stepped, alpha, x, dW, cfg.dt)
                     : euler_step(stepped, x, dW, cfg.dt);
          sink.record(s, &x);
        }
      });
}

PathEnsemble simulate_wealth(const ConstantVolMarket& market, Interpretation alpha,
                             const Policy& policy, double a0, const SimConfig& cfg) {
  if (!(a0 > 0.0)) throw ParameterError("initial wealth must be > 0");
  const Vector& theta = policy.weights();
  if (theta.size() != market.mu.size()) {
    throw DimensionError("weights", "policy has " + std::to_string(theta.size()) +
                                        " weights, market has " +
                                        std::to_string(market.mu.size()) + " assets");
  }
  const Vector mu_ito = ito_drift_diagonal_multiplicative(market.mu, market.gamma, alpha);
  const double drift = log_wealth_drift(mu_ito, market.covariance(), market.r, policy);
  const Vector loading = market.gamma.transpose() * theta;  // theta^T Gamma
  const std::size_t steps = cfg.n_steps();
  const double sqrt_dt = std::sqrt(cfg.dt);
  const double log_a0 = std::log(a0);
  PathEnsemble ens = EnsembleBuilder::run(
      cfg, 1, "constant_vol", [&](std::size_t, PhiloxStream& rng, EnsembleBuilder::PathSink& sink) {
        double log_a = log_a0;
        sink.record(0, &log_a);
        for (std::size_t s = 1; s <= steps; ++s) {
          double noise = 0.0;
          for (Eigen::Index k = 0; k < loading.size(); ++k) noise += loading[k] * rng.next_normal();
          log_a = checked(log_a + drift * cfg.dt + noise * sqrt_dt);
          sink.record(s, &log_a);
        }
      });
  ens.set_log_scale(0, true);
  ens.set_coordinate_names({"log_wealth"});
  return ens;
}

PathEnsemble simulate_wealth(const FactorMarket& market, Interpretation alpha,
                             const Policy& policy, double a0, double x0, const SimConfig& cfg) {
  if (!(a0 > 0.0)) throw ParameterError("initial wealth must be > 0");
  if (!market.domain.contains(x0)) throw DomainError("initial factor value outside the domain");
  const double rho = market.rho_corr;
  const double rho_perp = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  const double c = policy.consumption_fraction();
  const std::size_t steps = cfg.n_steps();
  const double sqrt_dt = std::sqrt(cfg.dt);
  const double log_a0 = std::log(a0);
  PathEnsemble ens = EnsembleBuilder::run(
      cfg, 2, "factor", [&](std::size_t, PhiloxStream& rng, EnsembleBuilder::PathSink& sink) {
        double state[2] = {log_a0, x0};
        sink.record(0, state);
        for (std::size_t s = 1; s <= steps; ++s) {
          const double z1 = rng.next_normal();
          const double z2 = rng.next_normal();
          const double dws = sqrt_dt * z1;
          const double dwx = sqrt_dt * (rho * z1 + rho_perp * z2);
          const double x = state[1];
          const double pi = policy.weight_at(x);
          const double vol = market.sigma(x);
          const double excess = effective_drift_factor(market, alpha, x) - market.r;
          state[0] = checked(state[0] +
                             (market.r + pi * excess - c - 0.5 * pi * pi * vol * vol) * cfg.dt +
                             pi * vol * dws);
          state[1] = checked(x + factor_ito_drift(market, alpha, x) * cfg.dt + market.nu(x) * dwx);
          sink.record(s, state);
        }
      });
  ens.set_log_scale(0, true);
  ens.set_coordinate_names({"log_wealth", "factor"});
  return ens;
}

PathEnsemble simulate_wealth(const HestonMarket& market, Interpretation alpha,
                             const Policy& policy, double a0, const SimConfig& cfg) {
  if (!(a0 > 0.0)) throw ParameterError("initial wealth must be > 0");
  const HestonItoForm ito = heston_ito_form(market, alpha);
  const double rho = market.rho_corr;
  const double rho_perp = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  const double c = policy.consumption_fraction();
  const double excess = ito.mu_eff - market.r;
  const std::size_t steps = cfg.n_steps();
  const double sqrt_dt = std::sqrt(cfg.dt);
  const double log_a0 = std::log(a0);
  PathEnsemble ens = EnsembleBuilder::run(
      cfg, 2, "heston", [&](std::size_t, PhiloxStream& rng, EnsembleBuilder::PathSink& sink) {
        double v = market.v0;
        double state[2] = {log_a0, v};
        sink.record(0, state);
        for (std::size_t s = 1; s <= steps; ++s) {
          const double z1 = rng.next_normal();
          const double z2 = rng.next_normal();
          const double vp = std::max(v, 0.0);
          const double pi = policy.weight_at(vp);
          const double root = std::sqrt(vp);
          state[0] = checked(state[0] + (market.r + pi * excess - c - 0.5 * pi * pi * vp) * cfg.dt +
                             pi * root * sqrt_dt * z1);
          v += ito.cir.kappa * (ito.cir.theta_alpha - vp) * cfg.dt +
               ito.cir.xi * root * sqrt_dt * (rho * z1 + rho_perp * z2);
          if (v < 0.0) ++sink.truncated;
          state[1] = checked(std::max(v, 0.0));
          sink.record(s, state);
        }
      });
  ens.set_log_scale(0, true);
  ens.set_coordinate_names({"log_wealth", "variance"});
  return ens;
}

PathEnsemble simulate_cir(const CirParams& cir, double v0, const SimConfig& cfg) {
  if (!(v0 > 0.0)) throw ParameterError("initial variance must be > 0");
  if (!(cir.kappa > 0.0) || !(cir.theta_alpha > 0.0) || !(cir.xi >= 0.0)) {
    throw ParameterError("CIR parameters need kappa > 0, theta_alpha > 0, xi >= 0");
  }
  const std::size_t steps = cfg.n_steps();
  const double sqrt_dt = std::sqrt(cfg.dt);
  const double kdt = cir.kappa * cfg.dt;
  const double xs = cir.xi * sqrt_dt;
  PathEnsemble ens = EnsembleBuilder::run(
      cfg, 1, "cir", [&](std::size_t, PhiloxStream& rng, EnsembleBuilder::PathSink& sink) {
        double v = v0;
        sink.record(0, &v);
        for (std::size_t s = 1; s <= steps; ++s) {
          const double vp = std::max(v, 0.0);
          v += kdt * (cir.theta_alpha - vp) + xs * std::sqrt(vp) * rng.next_normal();
          if (v < 0.0) ++sink.truncated;
          const double out = std::max(v, 0.0);
          sink.record(s, &out);
        }
      });
  ens.set_coordinate_names({"variance"});
  return ens;
}

}  // namespace alphamerton
