#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ridecast/csv.hpp"
#include "ridecast/error.hpp"
#include "ridecast/explain.hpp"

namespace ridecast {

Attribution shap_linear(const TrainedLinearModel& model, std::span<const std::optional<double>> row,
                        std::optional<std::span<const double>> background) {
  const std::size_t p = model.features.size();
  if (row.size() != p) {
    throw Error(ErrorCode::SchemaMismatch, fmt::format("row has {} values, model expects {}", row.size(), p));
  }
  std::vector<std::optional<double>> bg_row(p);
  if (background) {
    if (background->size() != p) throw Error(ErrorCode::SchemaMismatch, "background does not match the model schema");
    for (std::size_t j = 0; j < p; ++j) bg_row[j] = (*background)[j];
  } else {
    for (std::size_t j = 0; j < p; ++j) bg_row[j] = model.preprocessor.mean[j];
  }
  const Vector z = model.preprocessor.transform(row);
  const Vector zb = model.preprocessor.transform(bg_row);

  Attribution a;
  a.features = model.features;
  a.phi.resize(p);
  a.base_value = model.intercept;
  a.prediction = model.intercept;
  for (std::size_t j = 0; j < p; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    a.phi[j] = model.coefficients[j] * (z[jj] - zb[jj]);
    a.base_value += model.coefficients[j] * zb[jj];
    a.prediction += model.coefficients[j] * z[jj];
  }
  return a;
}

std::vector<Importance> global_importance(const TrainedLinearModel& model, const Dataset& dataset) {
  if (dataset.rows.empty()) throw Error(ErrorCode::EmptySeries, "importance needs at least one row");
  const Dataset view = dataset.schema == model.features ? dataset : dataset.select(model.features);
  std::vector<double> total(model.features.size(), 0.0);
  for (const auto& r : view.rows) {
    const Attribution a = shap_linear(model, r.features);
    for (std::size_t j = 0; j < total.size(); ++j) total[j] += std::fabs(a.phi[j]);
  }
  std::vector<Importance> out;
  for (std::size_t j = 0; j < total.size(); ++j) {
    out.push_back({model.features[j], total[j] / static_cast<double>(view.rows.size()), 0});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.mean_abs_shap > b.mean_abs_shap; });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i + 1);
  return out;
}

std::string importance_csv(std::span<const Importance> ranking) {
  std::string out = "feature,mean_abs_shap,rank\n";
  for (const auto& r : ranking) out += fmt::format("{},{},{}\n", r.feature, csv::format_double(r.mean_abs_shap), r.rank);
  return out;
}

nlohmann::json to_json(const Attribution& attribution) {
  nlohmann::json phi = nlohmann::json::object();
  for (std::size_t j = 0; j < attribution.features.size(); ++j) phi[attribution.features[j]] = attribution.phi[j];
  return {{"base_value", attribution.base_value}, {"prediction", attribution.prediction}, {"shap", std::move(phi)}};
}

}  // namespace ridecast
