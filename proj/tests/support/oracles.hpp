#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace oracles {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Five-point stencil derivative of each entry of a matrix-valued function
/// along coordinate j. Different stencil and step than the library's.
inline std::vector<Mat> five_point_jacobian(const std::function<Mat(const Vec&)>& f, const Vec& x,
                                            double h = 1e-3) {
  std::vector<Mat> out;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    auto at = [&](double s) {
      Vec y = x;
      y[j] += s * h;
      return f(y);
    };
    out.push_back((-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h));
  }
  return out;
}

/// sum_{k,j} S_jk dS_ik/dx_j written as explicit loops over a supplied Jacobian.
inline Vec correction_loops(const Mat& sigma, const std::vector<Mat>& jac) {
  Vec c = Vec::Zero(sigma.rows());
  for (Eigen::Index i = 0; i < sigma.rows(); ++i)
    for (Eigen::Index k = 0; k < sigma.cols(); ++k)
      for (Eigen::Index j = 0; j < sigma.rows(); ++j)
        c[i] += sigma(j, k) * jac[static_cast<std::size_t>(j)](i, k);
  return c;
}

/// Dense triple-loop matrix product.
inline Mat matmul(const Mat& a, const Mat& b) {
  Mat c = Mat::Zero(a.rows(), b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j)
      for (Eigen::Index k = 0; k < a.cols(); ++k) c(i, j) += a(i, k) * b(k, j);
  return c;
}

/// Derivative-free Nelder-Mead maximizer with restarts.
inline Vec nelder_mead_maximize(const std::function<double(const Vec&)>& f, Vec start,
                                double initial_step = 0.5, int restarts = 8) {
  const Eigen::Index n = start.size();
  auto neg = [&](const Vec& x) { return -f(x); };
  Vec best = std::move(start);
  double step = initial_step;
  for (int attempt = 0; attempt < restarts; ++attempt) {
    std::vector<Vec> simplex{best};
    for (Eigen::Index i = 0; i < n; ++i) {
      Vec v = best;
      v[i] += step;
      simplex.push_back(v);
    }
    std::vector<double> vals;
    for (const auto& v : simplex) vals.push_back(neg(v));
    for (int iter = 0; iter < 20000; ++iter) {
      std::vector<std::size_t> idx(simplex.size());
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
      std::vector<Vec> s2;
      std::vector<double> v2;
      for (auto i : idx) {
        s2.push_back(simplex[i]);
        v2.push_back(vals[i]);
      }
      simplex = std::move(s2);
      vals = std::move(v2);
      double diameter = 0.0;
      for (std::size_t i = 1; i < simplex.size(); ++i)
        diameter = std::max(diameter, (simplex[i] - simplex[0]).cwiseAbs().maxCoeff());
      if (diameter < 1e-11) break;
      Vec centroid = Vec::Zero(n);
      for (std::size_t i = 0; i + 1 < simplex.size(); ++i) centroid += simplex[i];
      centroid /= static_cast<double>(n);
      const Vec& worst = simplex.back();
      const Vec reflected = centroid + (centroid - worst);
      const double fr = neg(reflected);
      if (fr < vals[0]) {
        const Vec expanded = centroid + 2.0 * (centroid - worst);
        const double fe = neg(expanded);
        if (fe < fr) {
          simplex.back() = expanded;
          vals.back() = fe;
        } else {
          simplex.back() = reflected;
          vals.back() = fr;
        }
      } else if (fr < vals[vals.size() - 2]) {
        simplex.back() = reflected;
        vals.back() = fr;
      } else {
        const Vec contracted = centroid + 0.5 * (worst - centroid);
        const double fc = neg(contracted);
        if (fc < vals.back()) {
          simplex.back() = contracted;
          vals.back() = fc;
        } else {
          for (std::size_t i = 1; i < simplex.size(); ++i) {
            simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0]);
            vals[i] = neg(simplex[i]);
          }
        }
      }
    }
    std::size_t arg = static_cast<std::size_t>(
        std::min_element(vals.begin(), vals.end()) - vals.begin());
    best = simplex[arg];
    step = std::max(step * 0.1, 1e-4);
  }
  return best;
}

/// Random loading matrix with a comfortably positive definite Gamma Gamma^T.
inline Mat random_loading(std::mt19937_64& gen, Eigen::Index n) {
  std::normal_distribution<double> z(0.0, 0.08);
  std::uniform_real_distribution<double> diag(0.15, 0.4);
  Mat g(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) g(i, j) = (i == j) ? diag(gen) : z(gen);
  return g;
}

}  // namespace oracles
