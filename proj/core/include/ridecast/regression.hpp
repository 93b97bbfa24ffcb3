#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "ridecast/dataset.hpp"

namespace ridecast {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Median imputation followed by z-scoring, fitted on training rows only.
struct Preprocessor {
  std::vector<double> median;
  std::vector<double> mean;   // after imputation
  std::vector<double> scale;  // population sd; 0 marks a constant column
  bool fitted = false;

  std::size_t width() const { return median.size(); }
  std::vector<double> impute(std::span<const std::optional<double>> row) const;
  Vector transform(std::span<const std::optional<double>> row) const;
  Matrix transform(std::span<const FeatureRow> rows) const;

  bool operator==(const Preprocessor&) const = default;
};

Preprocessor fit_preprocessor(std::span<const FeatureRow> rows);

enum class ModelKind { Mean, Median, Ols, Ridge, Lasso, ElasticNet };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct Penalty {
  ModelKind kind = ModelKind::Lasso;
  double alpha = 0.0;
  double l1_ratio = 1.0;

  bool operator==(const Penalty&) const = default;
};

struct CdOptions {
  double tol = 1e-6;     // max absolute coefficient change per sweep
  int max_iter = 10'000; // sweeps
  bool record_objective = false;
};

struct LinearFit {
  Vector coef;
  double intercept = 0.0;
  bool converged = true;
  int sweeps = 0;
  std::vector<double> objective_trace;  // one entry per sweep when recorded
};

double soft_threshold(double z, double gamma);

/// (1/2n)||y - X b - b0||^2 + alpha * (l1 ||b||_1 + (1 - l1)/2 ||b||^2)
double elasticnet_objective(const Matrix& X, const Vector& y, const Vector& coef, double intercept,
                            double alpha, double l1_ratio);

/// Normal equations on centred data; retries with 1e-10 ridge jitter when
/// the Gram matrix is numerically singular. Throws SingularSystem.
LinearFit fit_ols(const Matrix& X, const Vector& y);
LinearFit fit_ridge(const Matrix& X, const Vector& y, double alpha);
/// Cyclic coordinate descent with soft-thresholding. Never throws on
/// non-convergence; check LinearFit::converged.
LinearFit fit_elasticnet(const Matrix& X, const Vector& y, double alpha, double l1_ratio,
                         const CdOptions& options = {}, const Vector* warm_start = nullptr);
LinearFit fit_lasso(const Matrix& X, const Vector& y, double alpha, const CdOptions& options = {},
                    const Vector* warm_start = nullptr);

LinearFit fit_penalized(const Matrix& X, const Vector& y, const Penalty& penalty,
                        const CdOptions& options = {}, const Vector* warm_start = nullptr);

struct TrainedLinearModel {
  std::string schema_version;
  FeatureConfig config = FeatureConfig::TopologyOnly;
  std::vector<std::string> features;
  Preprocessor preprocessor;
  Penalty penalty;
  std::vector<double> coefficients;  // standardized space
  double intercept = 0.0;
  bool converged = true;

  double predict(std::span<const std::optional<double>> row) const;
  double predict(const FeatureRow& row) const { return predict(row.features); }
  /// Selects the model's columns by name; throws SchemaMismatch if absent.
  std::vector<double> predict(const Dataset& dataset) const;
  std::optional<std::size_t> feature_index(std::string_view name) const;

  bool operator==(const TrainedLinearModel&) const = default;
};

TrainedLinearModel train_model(const Dataset& train, const Penalty& penalty, const CdOptions& options = {});

double mae(std::span<const double> predicted, std::span<const double> actual);
/// 1 - SS_res / SS_tot. Throws ZeroVariance when actuals are constant.
double r2(std::span<const double> predicted, std::span<const double> actual);

struct Baselines {
  double mean = 0.0;
  double median = 0.0;
};
Baselines baselines(std::span<const double> y);
double median_of(std::vector<double> values);

nlohmann::json to_json(const TrainedLinearModel& model);
TrainedLinearModel model_from_json(const nlohmann::json& j);
void write_model(const TrainedLinearModel& model, const std::filesystem::path& path);
TrainedLinearModel read_model(const std::filesystem::path& path);

}  // namespace ridecast
