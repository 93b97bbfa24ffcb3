#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ridecast/checkpoint.hpp"
#include "ridecast/error.hpp"
#include "ridecast/schema.hpp"
#include "ridecast/synthetic.hpp"

namespace ridecast::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kIngestion = 2,
  kTraining = 3,
  kPrediction = 4,
};

struct RunConfig {
  std::filesystem::path activities;
  std::optional<std::filesystem::path> wellness;
  std::optional<std::filesystem::path> zone_config;
  std::filesystem::path store = "features.csv";
  std::filesystem::path model = "model.json";
  std::optional<FeatureConfig> config;
  std::uint64_t seed = 42;
  std::vector<double> fractions = default_fractions();
  std::filesystem::path out = "out";
  FitnessOverrides overrides;
  std::optional<std::string> sweep;  // field:start:stop:step
  int learning_curve_repeats = 3;
  bool prefer_wellness = false;  // imported ctl/atl replace computed ones

  std::size_t synth_rides = 96;
  double synth_noise = 5.0;
  ClimbPlacement synth_placement = ClimbPlacement::Mixed;
};

/// Values from a JSON run-config file; keys mirror the long flag names.
RunConfig load_run_config(const std::filesystem::path& path);

int cmd_extract(const RunConfig& cfg, std::ostream& out);
int cmd_train(const RunConfig& cfg, std::ostream& out);
int cmd_predict(const RunConfig& cfg, const std::filesystem::path& gpx, std::ostream& out);
int cmd_checkpoint(const RunConfig& cfg, const std::filesystem::path& gpx, std::ostream& out);
int cmd_whatif(const RunConfig& cfg, const std::filesystem::path& gpx, std::ostream& out);
int cmd_report(const RunConfig& cfg, std::ostream& out);
int cmd_synth(const RunConfig& cfg, std::ostream& out);

/// Exit code for an error raised while running a command whose own failure
/// code is `fallback`.
int exit_code_for(ErrorCode code, int fallback);

}  // namespace ridecast::cli
