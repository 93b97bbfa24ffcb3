#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "ridecast/error.hpp"
#include "ridecast/regression.hpp"

namespace ridecast {

namespace {

struct Centered {
  Matrix gram;   // Xc'Xc / n
  Vector xy;     // Xc'yc / n
  Vector x_mean;
  double y_mean = 0.0;
};

Centered center(const Matrix& X, const Vector& y) {
  if (X.rows() != y.size()) {
    throw Error(ErrorCode::InvalidArgument, fmt::format("X has {} rows but y has {}", X.rows(), y.size()));
  }
  if (X.rows() == 0) throw Error(ErrorCode::TooFewRows, "no rows to fit");
  const double n = static_cast<double>(X.rows());
  Centered c;
  c.x_mean = X.colwise().mean().transpose();
  c.y_mean = y.mean();
  const Matrix Xc = X.rowwise() - c.x_mean.transpose();
  const Vector yc = y.array() - c.y_mean;
  c.gram = (Xc.transpose() * Xc) / n;
  c.xy = (Xc.transpose() * yc) / n;
  return c;
}

LinearFit solve_normal(const Centered& c, double alpha, bool allow_jitter) {
  const Eigen::Index p = c.gram.rows();
  LinearFit fit;
  if (p == 0) {
    fit.coef = Vector::Zero(0);
    fit.intercept = c.y_mean;
    return fit;
  }
  Matrix A = c.gram;
  A.diagonal().array() += alpha;
  Eigen::LDLT<Matrix> ldlt(A);
  const double scale = std::max(1.0, A.diagonal().cwiseAbs().maxCoeff());
  auto usable = [&](const Eigen::LDLT<Matrix>& f) {
    return f.info() == Eigen::Success && f.rcond() > 1e-13 && f.vectorD().minCoeff() > -1e-12 * scale;
  };
  if (!usable(ldlt)) {
    if (!allow_jitter) throw Error(ErrorCode::SingularSystem, "normal equations are singular");
    A.diagonal().array() += 1e-10 * scale;
    ldlt.compute(A);
    if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 1e-16)) {
      throw Error(ErrorCode::SingularSystem, "normal equations remain singular after jitter");
    }
  }
  fit.coef = ldlt.solve(c.xy);
  if (!fit.coef.allFinite()) throw Error(ErrorCode::SingularSystem, "non-finite solution");
  fit.intercept = c.y_mean - c.x_mean.dot(fit.coef);
  return fit;
}


}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Mean: return "mean";
    case ModelKind::Median: return "median";
    case ModelKind::Ols: return "ols";
    case ModelKind::Ridge: return "ridge";
    case ModelKind::Lasso: return "lasso";
    case ModelKind::ElasticNet: return "elasticnet";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view text) {
  for (auto k : {ModelKind::Mean, ModelKind::Median, ModelKind::Ols, ModelKind::Ridge, ModelKind::Lasso,
                 ModelKind::ElasticNet}) {
    if (to_string(k) == text) return k;
  }
  throw Error(ErrorCode::InvalidArgument, fmt::format("unknown model kind '{}'", text));
}

double soft_threshold(double z, double gamma) {
  if (z > gamma) return z - gamma;
  if (z < -gamma) return z + gamma;
  return 0.0;
}

double elasticnet_objective(const Matrix& X, const Vector& y, const Vector& coef, double intercept, double alpha,
                            double l1_ratio) {
  const Vector r = y - X * coef - Vector::Constant(y.size(), intercept);
  return r.squaredNorm() / (2.0 * static_cast<double>(y.size())) +
         alpha * (l1_ratio * coef.lpNorm<1>() + 0.5 * (1.0 - l1_ratio) * coef.squaredNorm());
}

LinearFit fit_ols(const Matrix& X, const Vector& y) { return solve_normal(center(X, y), 0.0, true); }

LinearFit fit_ridge(const Matrix& X, const Vector& y, double alpha) {
  if (!(alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be >= 0");
  return solve_normal(center(X, y), alpha, true);
}

LinearFit fit_elasticnet(const Matrix& X, const Vector& y, double alpha, double l1_ratio, const CdOptions& options,
                         const Vector* warm_start) {
  if (!(alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be >= 0");
  if (!(l1_ratio >= 0.0 && l1_ratio <= 1.0)) throw Error(ErrorCode::InvalidArgument, "l1_ratio must be in [0, 1]");
  const Centered c = center(X, y);
  const Eigen::Index p = X.cols();
  LinearFit fit;
  fit.coef = Vector::Zero(p);
  if (warm_start) {
    if (warm_start->size() != p) throw Error(ErrorCode::InvalidArgument, "warm start has wrong length");
    fit.coef = *warm_start;
  }
  const double l1_pen = alpha * l1_ratio;
  const double l2_pen = alpha * (1.0 - l1_ratio);
  Vector Gb = c.gram * fit.coef;
  Matrix Xc;
  Vector yc;
  if (options.record_objective) {
    Xc = X.rowwise() - c.x_mean.transpose();
    yc = y.array() - c.y_mean;
  }
  auto record = [&] {
    if (options.record_objective) fit.objective_trace.push_back(elasticnet_objective(Xc, yc, fit.coef, 0.0, alpha, l1_ratio));
  };
  record();
  auto sweep = [&](std::span<const Eigen::Index> coords) {
    double max_delta = 0.0;
    for (Eigen::Index j : coords) {
      const double gjj = c.gram(j, j);
      const double old = fit.coef[j];
      const double denom = gjj + l2_pen;
      double updated = 0.0;
      if (denom > 0.0) {
        const double rho = c.xy[j] - (Gb[j] - gjj * old);
        updated = soft_threshold(rho, l1_pen) / denom;
      }
      const double delta = updated - old;
      if (delta != 0.0) {
        Gb += c.gram.col(j) * delta;
        fit.coef[j] = updated;
        max_delta = std::max(max_delta, std::fabs(delta));
      }
    }
    ++fit.sweeps;
    record();
    return max_delta;
  };

  // Full sweeps decide convergence; between them, cycle over the nonzero
  // coefficients only until they settle.
  std::vector<Eigen::Index> all(static_cast<std::size_t>(p)), active;
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  fit.converged = p == 0;
  while (!fit.converged && fit.sweeps < options.max_iter) {
    if (sweep(all) < options.tol) {
      fit.converged = true;
      break;
    }
    active.clear();
    for (Eigen::Index j = 0; j < p; ++j) {
      if (fit.coef[j] != 0.0) active.push_back(j);
    }
    if (active.size() == all.size()) continue;
    while (fit.sweeps < options.max_iter && sweep(active) >= options.tol) {
    }
  }
  fit.intercept = c.y_mean - c.x_mean.dot(fit.coef);
  return fit;
}

LinearFit fit_lasso(const Matrix& X, const Vector& y, double alpha, const CdOptions& options, const Vector* warm_start) {
  return fit_elasticnet(X, y, alpha, 1.0, options, warm_start);
}

LinearFit fit_penalized(const Matrix& X, const Vector& y, const Penalty& penalty, const CdOptions& options,
                        const Vector* warm_start) {
  switch (penalty.kind) {
    case ModelKind::Mean:
    case ModelKind::Median: {
      if (y.size() == 0) throw Error(ErrorCode::TooFewRows, "no rows to fit");
      LinearFit fit;
      fit.coef = Vector::Zero(X.cols());
      std::vector<double> v(y.data(), y.data() + y.size());
      fit.intercept = penalty.kind == ModelKind::Mean ? y.mean() : median_of(std::move(v));
      return fit;
    }
    case ModelKind::Ols: return fit_ols(X, y);
    case ModelKind::Ridge: return fit_ridge(X, y, penalty.alpha);
    case ModelKind::Lasso: return fit_lasso(X, y, penalty.alpha, options, warm_start);
    case ModelKind::ElasticNet: return fit_elasticnet(X, y, penalty.alpha, penalty.l1_ratio, options, warm_start);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown model kind");
}

std::optional<std::size_t> TrainedLinearModel::feature_index(std::string_view name) const {
  const auto it = std::find(features.begin(), features.end(), name);
  if (it == features.end()) return std::nullopt;
  return static_cast<std::size_t>(it - features.begin());
}

double TrainedLinearModel::predict(std::span<const std::optional<double>> row) const {
  const Vector z = preprocessor.transform(row);
  double out = intercept;
  for (Eigen::Index j = 0; j < z.size(); ++j) out += coefficients[static_cast<std::size_t>(j)] * z[j];
  return out;
}

std::vector<double> TrainedLinearModel::predict(const Dataset& dataset) const {
  const Dataset view = dataset.schema == features ? dataset : dataset.select(features);
  std::vector<double> out;
  out.reserve(view.rows.size());
  for (const auto& r : view.rows) out.push_back(predict(r.features));
  return out;
}

TrainedLinearModel train_model(const Dataset& train, const Penalty& penalty, const CdOptions& options) {
  TrainedLinearModel model;
  model.schema_version = std::string(kSchemaVersion);
  model.config = train.config;
  model.features = train.schema;
  model.penalty = penalty;
  model.preprocessor = fit_preprocessor(train.rows);
  const Matrix X = model.preprocessor.transform(train.rows);
  const auto targets = train.targets();
  const Vector y = Eigen::Map<const Vector>(targets.data(), static_cast<Eigen::Index>(targets.size()));
  const LinearFit fit = fit_penalized(X, y, penalty, options);
  model.coefficients.assign(fit.coef.data(), fit.coef.data() + fit.coef.size());
  model.intercept = fit.intercept;
  model.converged = fit.converged;
  return model;
}

double mae(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) throw Error(ErrorCode::InvalidArgument, "length mismatch");
  if (predicted.empty()) throw Error(ErrorCode::EmptySeries, "mae of empty series");
  double s = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) s += std::fabs(predicted[i] - actual[i]);
  return s / static_cast<double>(actual.size());
}

double r2(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.size() != actual.size()) throw Error(ErrorCode::InvalidArgument, "length mismatch");
  if (actual.size() < 2) throw Error(ErrorCode::TooFewRows, "r2 needs at least 2 observations");
  const double mu = std::accumulate(actual.begin(), actual.end(), 0.0) / static_cast<double>(actual.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    ss_tot += (actual[i] - mu) * (actual[i] - mu);
  }
  if (ss_tot == 0.0) throw Error(ErrorCode::ZeroVariance, "actual values are constant");
  return 1.0 - ss_res / ss_tot;
}

Baselines baselines(std::span<const double> y) {
  if (y.empty()) throw Error(ErrorCode::EmptySeries, "baselines need data");
  Baselines b;
  b.mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  b.median = median_of(std::vector<double>(y.begin(), y.end()));
  return b;
}

}  // namespace ridecast
