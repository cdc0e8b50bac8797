#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "alphamerton/alpha_calculus.hpp"

namespace test_support {

using alphamerton::CoefficientField;
using alphamerton::DiffusionJacobian;
using alphamerton::Matrix;
using alphamerton::Vector;

// Sigma_ik(x) = A_ik + B_ik sin(w_ik . x), b_i(x) = D_i cos(x_i) + E_i.
struct RandomSmoothField {
  Matrix A, B, D;
  std::vector<Matrix> W;  // W[i*m+k] is w_ik as a column
  Eigen::Index d, m;

  RandomSmoothField(std::mt19937_64& gen, Eigen::Index d_, Eigen::Index m_) : d(d_), m(m_) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    A = Matrix::NullaryExpr(d, m, [&] { return u(gen); });
    B = Matrix::NullaryExpr(d, m, [&] { return 0.5 * u(gen); });
    D = Matrix::NullaryExpr(d, 2, [&] { return u(gen); });
    for (Eigen::Index i = 0; i < d * m; ++i) W.push_back(Matrix::NullaryExpr(d, 1, [&] { return u(gen); }));
  }

  Matrix sigma(const Vector& x) const {
    Matrix s(d, m);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index k = 0; k < m; ++k)
        s(i, k) = A(i, k) + B(i, k) * std::sin(W[static_cast<std::size_t>(i * m + k)].col(0).dot(x));
    return s;
  }

  CoefficientField field(bool analytic) const {
    auto self = *this;
    CoefficientField::JacobianFn jac;
    if (analytic) {
      jac = [self](const Vector& x) {
        DiffusionJacobian out(static_cast<std::size_t>(self.d), Matrix::Zero(self.d, self.m));
        for (Eigen::Index i = 0; i < self.d; ++i)
          for (Eigen::Index k = 0; k < self.m; ++k) {
            const Vector w = self.W[static_cast<std::size_t>(i * self.m + k)].col(0);
            for (Eigen::Index j = 0; j < self.d; ++j)
              out[static_cast<std::size_t>(j)](i, k) = self.B(i, k) * std::cos(w.dot(x)) * w[j];
          }
        return out;
      };
    }
    return CoefficientField(
        static_cast<std::size_t>(d), static_cast<std::size_t>(m),
        [self](const Vector& x) {
          Vector b(self.d);
          for (Eigen::Index i = 0; i < self.d; ++i) b[i] = self.D(i, 0) * std::cos(x[i]) + self.D(i, 1);
          return b;
        },
        [self](const Vector& x) { return self.sigma(x); }, jac);
  }
};

inline Vector random_point(std::mt19937_64& gen, Eigen::Index d) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  return Vector::NullaryExpr(d, [&] { return u(gen); });
}

}  // namespace test_support
