#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/cfg/helpers.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "commands.hpp"

namespace {

struct Flags {
  std::optional<std::string> run_config;
  std::optional<std::string> activities, wellness, zones, store, model, config, out, fractions, sweep, placement;
  std::optional<std::uint64_t> seed;
  std::optional<double> ctl, atl, tsb, ramp, noise;
  std::optional<std::size_t> rides;
  std::optional<int> repeats;
  bool prefer_wellness = false;
  std::string gpx;
};

std::vector<double> parse_fractions(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

ridecast::cli::RunConfig resolve(const Flags& f) {
  using namespace ridecast;
  cli::RunConfig cfg = f.run_config ? cli::load_run_config(*f.run_config) : cli::RunConfig{};
  if (f.activities) cfg.activities = *f.activities;
  if (f.wellness) cfg.wellness = *f.wellness;
  if (f.zones) cfg.zone_config = *f.zones;
  if (f.store) cfg.store = *f.store;
  if (f.model) cfg.model = *f.model;
  if (f.config) cfg.config = parse_feature_config(*f.config);
  if (f.out) cfg.out = *f.out;
  if (f.fractions) cfg.fractions = parse_fractions(*f.fractions);
  if (f.sweep) cfg.sweep = *f.sweep;
  if (f.seed) cfg.seed = *f.seed;
  if (f.ctl) cfg.overrides.ctl = *f.ctl;
  if (f.atl) cfg.overrides.atl = *f.atl;
  if (f.tsb) cfg.overrides.tsb = *f.tsb;
  if (f.ramp) cfg.overrides.ramp_rate = *f.ramp;
  if (f.rides) cfg.synth_rides = *f.rides;
  if (f.noise) cfg.synth_noise = *f.noise;
  if (f.placement) cfg.synth_placement = parse_climb_placement(*f.placement);
  if (f.repeats) cfg.learning_curve_repeats = *f.repeats;
  if (f.prefer_wellness) cfg.prefer_wellness = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("ridecast");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  if (const char* level = std::getenv("RIDECAST_LOG")) spdlog::cfg::helpers::load_levels(level);

  CLI::App app{"ridecast: ride duration prediction from route topology and training load"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--run-config", f.run_config, "JSON run configuration; flags override its values");
  app.add_option("--store", f.store, "Feature store CSV");
  app.add_option("--model", f.model, "Model JSON");
  app.add_option("--config", f.config, "Feature configuration")->check(CLI::IsMember({"topo", "topo-fit", "topo-fit-zones"}));
  app.add_option("--seed", f.seed, "Random seed");
  app.add_option("--out", f.out, "Output directory");
  app.add_option("--zones", f.zones, "Zone configuration JSON (ftp, max_hr, bounds)");

  auto* extract = app.add_subcommand("extract", "Build the feature store from an activities directory");
  extract->add_option("--activities", f.activities, "Activities directory")->required();
  extract->add_option("--wellness", f.wellness, "Wellness CSV (default: <activities>/wellness.csv)");
  extract->add_flag("--prefer-wellness", f.prefer_wellness, "Use imported ctl/atl instead of computed values");

  app.add_subcommand("train", "Nested CV over all model specs; write the best model");

  auto* predict = app.add_subcommand("predict", "Predict moving time for a GPX route");
  predict->add_option("gpx", f.gpx, "Route GPX")->required();
  predict->add_option("--wellness", f.wellness, "Wellness CSV providing current ctl/atl");
  predict->add_option("--activities", f.activities, "Activities directory (zone-feature models)");

  auto* checkpoint = app.add_subcommand("checkpoint", "Predictions from route prefixes");
  checkpoint->add_option("gpx", f.gpx, "Route GPX")->required();
  checkpoint->add_option("--fractions", f.fractions, "Comma-separated fractions in (0,1]");

  auto* whatif = app.add_subcommand("whatif", "Prediction under hypothetical fitness");
  whatif->add_option("gpx", f.gpx, "Route GPX")->required();
  whatif->add_option("--sweep", f.sweep, "field:start:stop:step, e.g. ctl:20:70:5");

  for (auto* sub : {predict, whatif}) {
    sub->add_option("--ctl", f.ctl, "Chronic training load");
    sub->add_option("--atl", f.atl, "Acute training load");
    sub->add_option("--tsb", f.tsb, "Training stress balance (default ctl - atl)");
    sub->add_option("--ramp", f.ramp, "Weekly CTL ramp rate (default 0)");
  }

  auto* report = app.add_subcommand("report", "Plot-ready CSVs for a trained model");
  report->add_option("--repeats", f.repeats, "Learning-curve repeats per size");

  auto* synth = app.add_subcommand("synth", "Write a synthetic activities directory");
  synth->add_option("--rides", f.rides, "Number of rides");
  synth->add_option("--noise", f.noise, "Noise sd in minutes");
  synth->add_option("--placement", f.placement, "Climb placement")
      ->check(CLI::IsMember({"front", "back", "uniform", "mixed"}));

  using namespace ridecast::cli;
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  RunConfig cfg;
  try {
    cfg = resolve(f);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kUsage;
  }
  auto& out = std::cout;
  const std::string name = app.get_subcommands().front()->get_name();
  if (name == "extract") return cmd_extract(cfg, out);
  if (name == "train") return cmd_train(cfg, out);
  if (name == "predict") return cmd_predict(cfg, f.gpx, out);
  if (name == "checkpoint") return cmd_checkpoint(cfg, f.gpx, out);
  if (name == "whatif") return cmd_whatif(cfg, f.gpx, out);
  if (name == "report") return cmd_report(cfg, out);
  if (name == "synth") return cmd_synth(cfg, out);
  return kUsage;
}
