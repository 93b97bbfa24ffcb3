#pragma once

// Dense solvers written from scratch for checking the library fits.

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Mat = std::vector<std::vector<double>>;
using Vec = std::vector<double>;

// Gaussian elimination with partial pivoting.
inline Vec solve(Mat a, Vec b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    }
    if (std::fabs(a[piv][c]) < 1e-300) throw std::runtime_error("singular");
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  Vec x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= a[i][k] * x[k];
    x[i] = s / a[i][i];
  }
  return x;
}

struct Fit {
  Vec coef;
  double intercept = 0.0;
};

// Minimises (1/2n)||y - Xb - b0||^2 + (alpha/2)||b||^2 via the centred
// normal equations (X'X/n + alpha I) b = X'y/n.
inline Fit ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha) {
  const auto n = static_cast<std::size_t>(X.rows());
  const auto p = static_cast<std::size_t>(X.cols());
  Vec xm(p, 0.0);
  double ym = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ym += y(static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < p; ++j) xm[j] += X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  ym /= static_cast<double>(n);
  for (auto& v : xm) v /= static_cast<double>(n);
  Mat a(p, Vec(p, 0.0));
  Vec b(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const double xj = X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - xm[j];
      b[j] += xj * (y(static_cast<Eigen::Index>(i)) - ym) / static_cast<double>(n);
      for (std::size_t k = 0; k < p; ++k) {
        a[j][k] += xj * (X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) - xm[k]) / static_cast<double>(n);
      }
    }
  }
  for (std::size_t j = 0; j < p; ++j) a[j][j] += alpha;
  Fit f;
  f.coef = solve(a, b);
  f.intercept = ym;
  for (std::size_t j = 0; j < p; ++j) f.intercept -= xm[j] * f.coef[j];
  return f;
}

inline Fit ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) { return ridge(X, y, 0.0); }

// Minimum-norm least squares via complete orthogonal decomposition.
inline Eigen::VectorXd min_norm_ls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  const Eigen::RowVectorXd xm = X.colwise().mean();
  const Eigen::MatrixXd Xc = X.rowwise() - xm;
  const Eigen::VectorXd yc = y.array() - y.mean();
  return Xc.completeOrthogonalDecomposition().solve(yc);
}

// For X with centred columns and X'X = n I the lasso solution is the
// soft-thresholded OLS coefficient.
inline Vec orthonormal_lasso(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double alpha) {
  const double n = static_cast<double>(X.rows());
  const Eigen::VectorXd yc = y.array() - y.mean();
  Vec out;
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double z = X.col(j).dot(yc) / n;
    const double mag = std::fabs(z) - alpha;
    out.push_back(mag > 0.0 ? std::copysign(mag, z) : 0.0);
  }
  return out;
}

// n x p design with centred orthogonal columns scaled so X'X = n I.
template <class Rng>
Eigen::MatrixXd orthonormal_design(int n, int p, Rng& rng) {
  Eigen::MatrixXd a(n, p + 1);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    for (int j = 1; j <= p; ++j) a(i, j) = z(rng);
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p + 1);
  return q.rightCols(p) * std::sqrt(static_cast<double>(n));
}

}  // namespace oracle
