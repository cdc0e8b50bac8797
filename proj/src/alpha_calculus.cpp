#include "alphamerton/alpha_calculus.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace alphamerton {

namespace {

constexpr double kPivotTolerance = 1e-12;

std::string shape(Eigen::Index r, Eigen::Index c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

Interpretation::Interpretation(double alpha) : alpha_(alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ParameterError("interpretation alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
}

double ScalarFunction::deriv(double x) const {
  if (derivative) return derivative(x);
  const double h = fd_step(x);
  return (value(x + h) - value(x - h)) / (2.0 * h);
}

CoefficientField::CoefficientField(std::size_t state_dim, std::size_t noise_dim, DriftFn drift,
                                   DiffusionFn diffusion, JacobianFn jacobian)
    : state_dim_(state_dim),
      noise_dim_(noise_dim),
      drift_(std::move(drift)),
      diffusion_(std::move(diffusion)),
      jacobian_(std::move(jacobian)) {
  if (state_dim_ == 0) throw DimensionError("state", "state dimension must be >= 1");
  if (noise_dim_ == 0) throw DimensionError("noise", "noise dimension must be >= 1");
  if (!drift_ || !diffusion_) throw ParameterError("coefficient field needs drift and diffusion");
}

void CoefficientField::check_point(const Vector& x) const {
  if (static_cast<std::size_t>(x.size()) != state_dim_) {
    throw DimensionError("state", "evaluation point has " + std::to_string(x.size()) +
                                      " coordinates, field state dimension is " +
                                      std::to_string(state_dim_));
  }
}

Vector CoefficientField::drift(const Vector& x) const {
  check_point(x);
  Vector b = drift_(x);
  if (static_cast<std::size_t>(b.size()) != state_dim_) {
    throw DimensionError("drift", "drift returned " + std::to_string(b.size()) +
                                      " entries, expected " + std::to_string(state_dim_));
  }
  return b;
}

Matrix CoefficientField::diffusion(const Vector& x) const {
  check_point(x);
  Matrix s = diffusion_(x);
  if (static_cast<std::size_t>(s.rows()) != state_dim_) {
    throw DimensionError("diffusion.rows", "diffusion is " + shape(s.rows(), s.cols()) +
                                               ", expected " + std::to_string(state_dim_) +
                                               " rows");
  }
  if (static_cast<std::size_t>(s.cols()) != noise_dim_) {
    throw DimensionError("diffusion.cols", "diffusion is " + shape(s.rows(), s.cols()) +
                                               ", expected " + std::to_string(noise_dim_) +
                                               " columns");
  }
  return s;
}

DiffusionJacobian CoefficientField::diffusion_jacobian(const Vector& x) const {
  if (!jacobian_) return finite_difference_jacobian(*this, x);
  check_point(x);
  DiffusionJacobian jac = jacobian_(x);
  if (jac.size() != state_dim_) {
    throw DimensionError("jacobian", "diffusion Jacobian has " + std::to_string(jac.size()) +
                                         " slices, expected " + std::to_string(state_dim_));
  }
  for (const auto& slice : jac) {
    if (static_cast<std::size_t>(slice.rows()) != state_dim_ ||
        static_cast<std::size_t>(slice.cols()) != noise_dim_) {
      throw DimensionError("jacobian", "diffusion Jacobian slice is " +
                                           shape(slice.rows(), slice.cols()) + ", expected " +
                                           shape(state_dim_, noise_dim_));
    }
  }
  return jac;
}

CoefficientField CoefficientField::with_drift(DriftFn drift) const {
  return CoefficientField(state_dim_, noise_dim_, std::move(drift), diffusion_, jacobian_);
}

DiffusionJacobian finite_difference_jacobian(const CoefficientField& field, const Vector& x) {
  DiffusionJacobian jac;
  jac.reserve(field.state_dim());
  for (std::size_t j = 0; j < field.state_dim(); ++j) {
    const double h = fd_step(x[j]);
    Vector xp = x;
    Vector xm = x;
    xp[j] += h;
    xm[j] -= h;
    jac.push_back((field.diffusion(xp) - field.diffusion(xm)) / (2.0 * h));
  }
  return jac;
}

Vector correction_vector(const CoefficientField& field, const Vector& x) {
  const Matrix sigma = field.diffusion(x);
  const DiffusionJacobian jac = field.diffusion_jacobian(x);
  const auto d = static_cast<Eigen::Index>(field.state_dim());
  Vector c = Vector::Zero(d);
  // c_i = sum_j sum_k Sigma_jk * dSigma_ik/dx_j
  for (Eigen::Index j = 0; j < d; ++j) {
    c.noalias() += jac[static_cast<std::size_t>(j)] * sigma.row(j).transpose();
  }
  return c;
}

CoefficientField convert(const CoefficientField& field, Interpretation from, Interpretation to) {
  const double shift = from.alpha() - to.alpha();
  if (shift == 0.0) return field;
  return field.with_drift([field, shift](const Vector& x) -> Vector {
    return field.drift(x) + shift * correction_vector(field, x);
  });
}

Vector ito_drift_diagonal_multiplicative(const Vector& mu, const Matrix& gamma,
                                         Interpretation alpha) {
  if (gamma.rows() != mu.size()) {
    throw DimensionError("gamma.rows", "Gamma has " + std::to_string(gamma.rows()) +
                                           " rows but mu has " + std::to_string(mu.size()) +
                                           " entries");
  }
  if (!mu.allFinite() || !gamma.allFinite()) {
    throw ParameterError("mu and Gamma must have finite entries");
  }
  return mu + alpha.alpha() * gamma.rowwise().squaredNorm();
}

CorrelationMatrix::CorrelationMatrix(Matrix R) : R_(std::move(R)) {
  if (R_.rows() != R_.cols() || R_.rows() == 0) {
    throw DimensionError("correlation", "correlation matrix must be square and non-empty, got " +
                                            shape(R_.rows(), R_.cols()));
  }
  if (!R_.allFinite()) throw ParameterError("correlation matrix has non-finite entries");
  const Eigen::Index m = R_.rows();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (R_(i, i) != 1.0) throw ParameterError("correlation matrix diagonal must be exactly 1");
    for (Eigen::Index j = 0; j < i; ++j) {
      if (R_(i, j) != R_(j, i)) throw ParameterError("correlation matrix must be symmetric");
    }
  }

  Eigen::LLT<Matrix> llt(R_);
  if (llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().diagonal().minCoeff() >
                                          std::sqrt(kPivotTolerance)) {
    C_ = llt.matrixL();
    return;
  }

  // Semidefinite fallback. For PSD R a vanishing pivot implies the rest of
  // its column vanishes too, so zeroing it keeps C C^T = R.
  C_ = Matrix::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const double pivot = R_(j, j) - C_.row(j).head(j).squaredNorm();
    if (pivot < -kPivotTolerance) {
      throw ParameterError("correlation matrix is not positive semidefinite");
    }
    if (pivot <= kPivotTolerance) continue;
    const double l = std::sqrt(pivot);
    C_(j, j) = l;
    for (Eigen::Index i = j + 1; i < m; ++i) {
      C_(i, j) = (R_(i, j) - C_.row(i).head(j).dot(C_.row(j).head(j))) / l;
    }
  }
  if ((C_ * C_.transpose() - R_).cwiseAbs().maxCoeff() > 1e-10) {
    throw ParameterError("correlation matrix is not positive semidefinite");
  }
}

CorrelationMatrix CorrelationMatrix::two_factor(double rho) {
  if (!(rho >= -1.0 && rho <= 1.0)) {
    throw ParameterError("correlation must lie in [-1, 1], got " + std::to_string(rho));
  }
  Matrix R(2, 2);
  R << 1.0, rho, rho, 1.0;
  return CorrelationMatrix(std::move(R));
}

CorrelationMatrix CorrelationMatrix::identity(std::size_t m) {
  return CorrelationMatrix(Matrix::Identity(static_cast<Eigen::Index>(m),
                                            static_cast<Eigen::Index>(m)));
}

Matrix reduce_correlated_noise(const Matrix& G, const CorrelationMatrix& corr) {
  if (static_cast<std::size_t>(G.cols()) != corr.size()) {
    throw DimensionError("noise", "loading has " + std::to_string(G.cols()) +
                                      " columns but correlation is " +
                                      std::to_string(corr.size()) + "-dimensional");
  }
  return G * corr.factor();
}

CoefficientField reduce_correlated_noise(const CoefficientField& field,
                                         const CorrelationMatrix& corr) {
  if (field.noise_dim() != corr.size()) {
    throw DimensionError("noise", "field has " + std::to_string(field.noise_dim()) +
                                      " noise components but correlation is " +
                                      std::to_string(corr.size()) + "-dimensional");
  }
  const Matrix C = corr.factor();
  auto diffusion = [field, C](const Vector& x) -> Matrix { return field.diffusion(x) * C; };
  auto jacobian = [field, C](const Vector& x) -> DiffusionJacobian {
    DiffusionJacobian jac = field.diffusion_jacobian(x);
    for (auto& slice : jac) slice = slice * C;
    return jac;
  };
  return CoefficientField(field.state_dim(), field.noise_dim(),
                          [field](const Vector& x) { return field.drift(x); },
                          std::move(diffusion), std::move(jacobian));
}

}  // namespace alphamerton
