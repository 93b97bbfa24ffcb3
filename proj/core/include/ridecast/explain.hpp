#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ridecast/regression.hpp"

namespace ridecast {

struct Attribution {
  double base_value = 0.0;  // minutes, prediction at the background
  std::vector<std::string> features;
  std::vector<double> phi;  // minutes
  double prediction = 0.0;
};

/// Exact linear SHAP. `background` is in raw feature units; the model's
/// training means are used when it is omitted.
Attribution shap_linear(const TrainedLinearModel& model, std::span<const std::optional<double>> row,
                        std::optional<std::span<const double>> background = std::nullopt);

struct Importance {
  std::string feature;
  double mean_abs_shap = 0.0;
  int rank = 0;
};

/// Descending by mean |phi|; ties keep schema order.
std::vector<Importance> global_importance(const TrainedLinearModel& model, const Dataset& dataset);

std::string importance_csv(std::span<const Importance> ranking);
nlohmann::json to_json(const Attribution& attribution);

}  // namespace ridecast
