#pragma once

// Conversion dictionary between alpha-interpreted SDEs
//
//   dX = b(X) dt + Sigma(X) o_alpha dB
//
// where alpha = 0 is Ito, 1/2 Stratonovich and 1 Klimontovich. Rewriting the
// same process under interpretation gamma shifts the drift by
// (alpha - gamma) * c(x) with c_i(x) = sum_{k,j} Sigma_jk(x) d_j Sigma_ik(x).

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "alphamerton/errors.hpp"

namespace alphamerton {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Stochastic-integral convention, alpha in [0, 1].
class Interpretation {
 public:
  explicit Interpretation(double alpha);

  static Interpretation ito() { return Interpretation(0.0); }
  static Interpretation stratonovich() { return Interpretation(0.5); }
  static Interpretation klimontovich() { return Interpretation(1.0); }

  double alpha() const noexcept { return alpha_; }

  friend bool operator==(Interpretation, Interpretation) = default;

 private:
  double alpha_;
};

/// Central-difference step used whenever a derivative is not supplied.
inline double fd_step(double x) {
  const double h = 1e-6 * (x < 0 ? -x : x);
  return h > 1e-6 ? h : 1e-6;
}

/// Scalar C^1 coefficient with optional analytic derivative.
struct ScalarFunction {
  std::function<double(double)> value;
  std::function<double(double)> derivative;  // empty -> central differences

  double operator()(double x) const { return value(x); }
  double deriv(double x) const;
};

/// Jacobian of the diffusion matrix: entry [j](i, k) = dSigma_ik / dx_j.
using DiffusionJacobian = std::vector<Matrix>;

/// Drift b: R^d -> R^d and diffusion Sigma: R^d -> R^{d x m}. Immutable.
class CoefficientField {
 public:
  using DriftFn = std::function<Vector(const Vector&)>;
  using DiffusionFn = std::function<Matrix(const Vector&)>;
  using JacobianFn = std::function<DiffusionJacobian(const Vector&)>;

  /// An empty `jacobian` selects central differences of `diffusion`.
  CoefficientField(std::size_t state_dim, std::size_t noise_dim, DriftFn drift,
                   DiffusionFn diffusion, JacobianFn jacobian = {});

  std::size_t state_dim() const noexcept { return state_dim_; }
  std::size_t noise_dim() const noexcept { return noise_dim_; }
  bool has_analytic_jacobian() const noexcept { return static_cast<bool>(jacobian_); }

  // All three evaluators check output shapes and throw DimensionError.
  Vector drift(const Vector& x) const;
  Matrix diffusion(const Vector& x) const;
  DiffusionJacobian diffusion_jacobian(const Vector& x) const;

  /// Same diffusion, new drift.
  CoefficientField with_drift(DriftFn drift) const;

 private:
  void check_point(const Vector& x) const;

  std::size_t state_dim_;
  std::size_t noise_dim_;
  DriftFn drift_;
  DiffusionFn diffusion_;
  JacobianFn jacobian_;
};

/// Central-difference Jacobian of `field.diffusion` with step fd_step(x_j).
DiffusionJacobian finite_difference_jacobian(const CoefficientField& field, const Vector& x);

/// c_i(x) = sum_{k,j} Sigma_jk(x) dSigma_ik/dx_j(x).
Vector correction_vector(const CoefficientField& field, const Vector& x);

/// Re-expresses `field` (read under `from`) in the `to` interpretation.
CoefficientField convert(const CoefficientField& field, Interpretation from, Interpretation to);

/// Ito drift of dS_i = S_i (mu_i dt + (Gamma o_alpha dB)_i): mu + alpha diag(Gamma Gamma^T).
Vector ito_drift_diagonal_multiplicative(const Vector& mu, const Matrix& gamma,
                                         Interpretation alpha);

/// Unit-diagonal correlation matrix R together with a lower-triangular C, C C^T = R.
///
/// Positive definite R is factored by Cholesky. Semidefinite R (e.g. rho = +-1)
/// falls back to a column-by-column Cholesky in which pivots below 1e-12 are
/// treated as zero and their column is zeroed. Throws ParameterError when R is
/// not symmetric, has a non-unit diagonal, or has a negative pivot.
class CorrelationMatrix {
 public:
  explicit CorrelationMatrix(Matrix R);

  /// [[1, rho], [rho, 1]].
  static CorrelationMatrix two_factor(double rho);
  static CorrelationMatrix identity(std::size_t m);

  const Matrix& matrix() const noexcept { return R_; }
  const Matrix& factor() const noexcept { return C_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(R_.rows()); }

 private:
  Matrix R_;
  Matrix C_;
};

/// G C, so that int G dW = int (G C) dB for W = C B.
Matrix reduce_correlated_noise(const Matrix& G, const CorrelationMatrix& corr);

/// Field-level version: diffusion x -> Sigma(x) C, Jacobian slices right-multiplied by C.
CoefficientField reduce_correlated_noise(const CoefficientField& field,
                                         const CorrelationMatrix& corr);

}  // namespace alphamerton
