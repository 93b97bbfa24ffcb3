#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ridecast/dataset.hpp"
#include "ridecast/regression.hpp"

namespace ridecast {

inline constexpr int kOuterFolds = 5;
inline constexpr int kInnerFolds = 3;
inline constexpr int kAlphaGridSize = 50;
inline constexpr double kOverfitGap = -2.0;

struct FoldPlan {
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<int> stratum;                   // distance quintile per row
  std::vector<std::vector<std::size_t>> folds;  // test rows per fold, ascending
  std::vector<int> fold_of;
  /// Inner plans index into train_indices(f), not the full dataset.
  std::vector<FoldPlan> inner;

  std::size_t size() const { return fold_of.size(); }
  std::vector<std::size_t> train_indices(int fold) const;
  const std::vector<std::size_t>& test_indices(int fold) const { return folds.at(static_cast<std::size_t>(fold)); }
};

/// Rank by distance, label quintiles, shuffle within each quintile and deal
/// round-robin. inner_k = 0 skips the nested plans.
FoldPlan stratified_folds(std::span<const double> distances, int k, std::uint64_t seed, int inner_k = kInnerFolds);
FoldPlan stratified_folds(const Dataset& dataset, int k, std::uint64_t seed, int inner_k = kInnerFolds);

std::vector<double> log_grid(double lo, double hi, int count);
std::vector<double> alpha_grid(ModelKind kind);

struct ModelSpec {
  std::string name;
  ModelKind kind = ModelKind::Lasso;
  FeatureConfig config = FeatureConfig::TopologyOnly;
  std::vector<std::string> features;  // empty means the whole config schema
  std::vector<double> alphas;         // empty for kinds without a penalty
  std::vector<double> l1_ratios;

  std::vector<std::string> columns() const;
};

ModelSpec make_spec(ModelKind kind, FeatureConfig config);
/// Baselines, OLS on distance + ascent, and Ridge/Lasso/ElasticNet for each
/// configuration up to max_config.
std::vector<ModelSpec> default_model_specs(FeatureConfig max_config);

struct FoldResult {
  int fold = 0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double alpha = 0.0;
  double l1_ratio = 1.0;
  double train_mae = 0.0;
  double test_mae = 0.0;
  std::optional<double> test_r2;
  double gap = 0.0;  // train - test
  bool converged = true;
  std::optional<std::string> error;
};

struct ModelCV {
  ModelSpec spec;
  std::vector<FoldResult> folds;
  double test_mae_mean = 0.0;
  double test_mae_sd = 0.0;
  double test_r2_mean = 0.0;
  double test_r2_sd = 0.0;
  double train_mae_mean = 0.0;
  double gap_mean = 0.0;
  double cv_stability = 0.0;  // sd / mean of fold test MAE
  bool overfit = false;
  std::size_t failed_folds = 0;
  std::vector<double> oof_predictions;  // NaN where the fold failed
};

struct CVReport {
  std::uint64_t seed = 0;
  int k = 0;
  std::size_t rows = 0;
  std::vector<ModelCV> models;

  const ModelCV* best() const;  // lowest mean test MAE with no failed folds
  std::string table() const;
};

using FoldObserver = std::function<void(int fold, std::span<const std::size_t> train_rows, const Preprocessor&)>;

struct CvOptions {
  CdOptions cd;
  FoldObserver on_outer_fit;  // called after each outer preprocessor fit
};

struct Selection {
  double alpha = 0.0;
  double l1_ratio = 1.0;
  double mae = 0.0;
};

/// Grid search by mean validation MAE over the plan's folds; ties go to the
/// larger alpha. Rows of `data` are addressed by the plan.
Selection select_hyperparameters(const Dataset& data, const ModelSpec& spec, const FoldPlan& plan,
                                 const CdOptions& cd = {});

ModelCV nested_cv(const Dataset& dataset, const ModelSpec& spec, const FoldPlan& plan, const CvOptions& options = {});
CVReport run_cv(const Dataset& dataset, std::span<const ModelSpec> specs, const FoldPlan& plan,
                const CvOptions& options = {});

/// Hyperparameters chosen by CV over `plan`, then refit on every row.
TrainedLinearModel fit_final(const Dataset& dataset, const ModelSpec& spec, const FoldPlan& plan,
                             const CdOptions& cd = {});

nlohmann::json to_json(const CVReport& report);

struct CurvePoint {
  std::size_t size = 0;
  int repeats = 0;
  double train_mae = 0.0;
  double validation_mae = 0.0;
  double validation_sd = 0.0;
};

std::vector<CurvePoint> learning_curve(const Dataset& dataset, const ModelSpec& spec,
                                       std::span<const std::size_t> sizes, std::uint64_t seed, int repeats = 5,
                                       const CdOptions& cd = {});
std::string learning_curve_csv(std::span<const CurvePoint> curve);

struct TierError {
  std::string tier;
  std::size_t n = 0;
  double mae = 0.0;
  double mape = 0.0;  // percent
};

/// One row per distinct label, sorted by label.
std::vector<TierError> error_breakdown(std::span<const double> predicted, std::span<const double> actual,
                                       std::span<const std::string> tiers);
/// "<distance tier>/<elevation tier>" labels from tercile cut points.
std::vector<std::string> difficulty_tiers(std::span<const double> distance, std::span<const double> gain_per_km);
std::vector<TierError> error_breakdown(std::span<const double> predicted, const Dataset& rows);
std::string breakdown_csv(std::span<const TierError> table);

}  // namespace ridecast
