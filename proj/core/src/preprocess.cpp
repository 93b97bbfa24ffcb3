#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ridecast/error.hpp"
#include "ridecast/regression.hpp"

namespace ridecast {

double median_of(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptySeries, "median of empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

Preprocessor fit_preprocessor(std::span<const FeatureRow> rows) {
  if (rows.size() < 2) throw Error(ErrorCode::TooFewRows, fmt::format("need 2 rows to fit, got {}", rows.size()));
  const std::size_t p = rows.front().features.size();
  Preprocessor pre;
  pre.median.assign(p, 0.0);
  pre.mean.assign(p, 0.0);
  pre.scale.assign(p, 0.0);
  const double n = static_cast<double>(rows.size());
  for (std::size_t j = 0; j < p; ++j) {
    std::vector<double> present;
    for (const auto& r : rows) {
      if (r.features.size() != p) throw Error(ErrorCode::SchemaMismatch, "ragged feature rows");
      if (r.features[j]) present.push_back(*r.features[j]);
    }
    pre.median[j] = present.empty() ? 0.0 : median_of(present);
    double sum = 0.0;
    for (const auto& r : rows) sum += r.features[j].value_or(pre.median[j]);
    const double mu = sum / n;
    double ss = 0.0;
    for (const auto& r : rows) {
      const double d = r.features[j].value_or(pre.median[j]) - mu;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / n);
    pre.mean[j] = mu;
    pre.scale[j] = sd > 1e-12 * std::max(1.0, std::fabs(mu)) ? sd : 0.0;
  }
  pre.fitted = true;
  return pre;
}

std::vector<double> Preprocessor::impute(std::span<const std::optional<double>> row) const {
  if (row.size() != width()) {
    throw Error(ErrorCode::SchemaMismatch, fmt::format("row has {} values, preprocessor expects {}", row.size(), width()));
  }
  std::vector<double> out(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) out[j] = row[j].value_or(median[j]);
  return out;
}

Vector Preprocessor::transform(std::span<const std::optional<double>> row) const {
  const auto filled = impute(row);
  Vector z(static_cast<Eigen::Index>(filled.size()));
  for (std::size_t j = 0; j < filled.size(); ++j) {
    z[static_cast<Eigen::Index>(j)] = scale[j] > 0.0 ? (filled[j] - mean[j]) / scale[j] : 0.0;
  }
  return z;
}

Matrix Preprocessor::transform(std::span<const FeatureRow> rows) const {
  Matrix X(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width()));
  for (std::size_t i = 0; i < rows.size(); ++i) X.row(static_cast<Eigen::Index>(i)) = transform(rows[i].features).transpose();
  return X;
}

}  // namespace ridecast
