#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ridecast/csv.hpp"
#include "ridecast/error.hpp"
#include "ridecast/regression.hpp"

namespace ridecast {

nlohmann::json to_json(const TrainedLinearModel& model) {
  nlohmann::json j;
  j["schema_version"] = model.schema_version;
  j["config"] = std::string(to_string(model.config));
  j["features"] = model.features;
  j["penalty"] = {{"kind", std::string(to_string(model.penalty.kind))},
                  {"alpha", model.penalty.alpha},
                  {"l1_ratio", model.penalty.l1_ratio}};
  j["preprocessor"] = {{"median", model.preprocessor.median},
                       {"mean", model.preprocessor.mean},
                       {"scale", model.preprocessor.scale}};
  j["coefficients"] = model.coefficients;
  j["intercept"] = model.intercept;
  j["converged"] = model.converged;
  return j;
}

TrainedLinearModel model_from_json(const nlohmann::json& j) {
  try {
    TrainedLinearModel m;
    m.schema_version = j.at("schema_version").get<std::string>();
    if (m.schema_version != kSchemaVersion) {
      throw Error(ErrorCode::SchemaMismatch,
                  fmt::format("model schema '{}' does not match '{}'", m.schema_version, kSchemaVersion));
    }
    m.config = parse_feature_config(j.at("config").get<std::string>());
    m.features = j.at("features").get<std::vector<std::string>>();
    const auto& pen = j.at("penalty");
    m.penalty.kind = parse_model_kind(pen.at("kind").get<std::string>());
    m.penalty.alpha = pen.at("alpha").get<double>();
    m.penalty.l1_ratio = pen.at("l1_ratio").get<double>();
    const auto& pre = j.at("preprocessor");
    m.preprocessor.median = pre.at("median").get<std::vector<double>>();
    m.preprocessor.mean = pre.at("mean").get<std::vector<double>>();
    m.preprocessor.scale = pre.at("scale").get<std::vector<double>>();
    m.preprocessor.fitted = true;
    m.coefficients = j.at("coefficients").get<std::vector<double>>();
    m.intercept = j.at("intercept").get<double>();
    m.converged = j.value("converged", true);
    const std::size_t p = m.features.size();
    if (m.coefficients.size() != p || m.preprocessor.median.size() != p || m.preprocessor.mean.size() != p ||
        m.preprocessor.scale.size() != p) {
      throw Error(ErrorCode::SchemaMismatch, "model arrays disagree with feature count");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedFile, fmt::format("bad model file: {}", e.what()));
  }
}

void write_model(const TrainedLinearModel& model, const std::filesystem::path& path) {
  csv::write_file_atomic(path, to_json(model).dump(2) + "\n");
}

TrainedLinearModel read_model(const std::filesystem::path& path) {
  const std::string text = csv::read_text(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedFile, fmt::format("{}: {}", path.string(), e.what()));
  }
  return model_from_json(j);
}

}  // namespace ridecast
