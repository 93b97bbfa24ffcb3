#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "ridecast/csv.hpp"
#include "ridecast/dataset.hpp"
#include "ridecast/explain.hpp"
#include "ridecast/ingest.hpp"
#include "ridecast/topology.hpp"
#include "ridecast/validation.hpp"

namespace ridecast::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::size_t kMinTrainRows = 10;

void write_text(const fs::path& path, std::string_view text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  csv::write_file_atomic(path, text);
}

ZoneConfig zones_for(const RunConfig& cfg) {
  return cfg.zone_config ? read_zone_config(*cfg.zone_config) : ZoneConfig{};
}

bool needs_state(FeatureConfig c) { return c != FeatureConfig::TopologyOnly; }

// Loads from daily_tss.csv / zones.csv when present; otherwise derived from
// power and heart-rate streams.
std::vector<DailyLoad> load_history(const fs::path& dir, std::span<const ActivityRecord> records,
                                    const ZoneConfig& zones) {
  const bool has_tss = fs::exists(dir / "daily_tss.csv");
  const bool has_zones = fs::exists(dir / "zones.csv");
  std::vector<DailyLoad> history;
  if (has_tss) history = read_daily_tss_csv(dir / "daily_tss.csv");
  if (has_zones) history = merge_loads(history, read_zone_seconds_csv(dir / "zones.csv"));
  if (has_tss && has_zones) return normalize_history(history);

  std::vector<DailyLoad> derived;
  for (const auto& r : records) {
    if (!r.streams.has_power() && r.streams.heart_rate.empty()) continue;
    DailyLoad d;
    d.date = r.start_day();
    if (!has_tss && r.streams.has_power()) d.tss = compute_tss(r.streams.power, zones.ftp);
    if (!has_zones) {
      const auto zs = zone_seconds(r.streams.power, r.streams.heart_rate, zones);
      d.power_zone_seconds = zs.power;
      d.hr_zone_seconds = zs.hr;
    }
    derived = merge_loads(derived, std::span<const DailyLoad>(&d, 1));
  }
  return normalize_history(merge_loads(history, derived));
}

std::vector<ActivityRecord> load_records(const fs::path& dir) {
  auto records = read_activities_csv(dir / "activities.csv");
  for (auto& r : records) {
    const auto streams = dir / "streams" / (r.id + ".csv");
    if (fs::exists(streams)) r.streams = read_streams_csv(streams);
  }
  return records;
}

std::map<std::string, double> wellness_state(const fs::path& path) {
  const auto records = read_wellness_csv(path);
  const WellnessRecord* last = nullptr;
  for (const auto& r : records) {
    if (r.ctl && r.atl && (!last || r.date > last->date)) last = &r;
  }
  if (!last) throw Error(ErrorCode::SchemaMismatch, fmt::format("{} has no day with both ctl and atl", path.string()));
  double ramp = 0.0;
  for (const auto& r : records) {
    if (r.ctl && r.date == last->date - kRampDays) ramp = *last->ctl - *r.ctl;
  }
  return {{"ctl", *last->ctl},
          {"atl", *last->atl},
          {"tsb", last->tsb.value_or(*last->ctl - *last->atl)},
          {"ramp_rate", ramp}};
}

// Compares computed fitness columns against imported wellness values from
// the previous day; with `replace`, the imported values are used instead.
void reconcile_wellness(Dataset& ds, const fs::path& path, bool replace) {
  std::map<Day, WellnessRecord> by_day;
  for (const auto& w : read_wellness_csv(path)) by_day[w.date] = w;
  const auto c_ctl = ds.column("ctl"), c_atl = ds.column("atl"), c_tsb = ds.column("tsb"),
             c_ramp = ds.column("ramp_rate");
  double worst = 0.0;
  std::size_t compared = 0;
  for (auto& row : ds.rows) {
    const auto it = by_day.find(row.date - 1);
    if (it == by_day.end() || !it->second.ctl || !it->second.atl) continue;
    const auto& w = it->second;
    ++compared;
    worst = std::max(worst, std::fabs(row.features[c_ctl].value_or(0.0) - *w.ctl));
    if (!replace) continue;
    row.features[c_ctl] = *w.ctl;
    row.features[c_atl] = *w.atl;
    row.features[c_tsb] = w.tsb.value_or(*w.ctl - *w.atl);
    const auto week = by_day.find(row.date - 1 - kRampDays);
    row.features[c_ramp] = week != by_day.end() && week->second.ctl ? *w.ctl - *week->second.ctl : 0.0;
  }
  if (compared == 0) {
    spdlog::warn("wellness file has no ctl/atl for the days before any ride");
  } else {
    spdlog::info("wellness cross-check over {} rows: max |ctl difference| {:.2f}{}", compared, worst,
                 replace ? " (imported values used)" : "");
  }
}

ModelSpec spec_for(const TrainedLinearModel& model) {
  ModelSpec spec = make_spec(model.penalty.kind, model.config);
  if (model.features != schema_for(model.config)) spec.features = model.features;
  return spec;
}

std::vector<double> parse_sweep(std::string_view text, std::string& field) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(':', start);
    parts.emplace_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (parts.size() != 4) throw Error(ErrorCode::InvalidArgument, "sweep must look like field:start:stop:step");
  field = parts[0];
  const double lo = std::stod(parts[1]), hi = std::stod(parts[2]), step = std::stod(parts[3]);
  if (!(step > 0.0) || hi < lo) throw Error(ErrorCode::InvalidArgument, "sweep range is empty");
  std::vector<double> values;
  for (int i = 0; lo + i * step <= hi + 1e-9 * step; ++i) values.push_back(lo + i * step);
  return values;
}

RouteProfile route_from(const fs::path& gpx) { return resample_profile(read_gpx(gpx)); }

template <class F>
int guarded(int fallback, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return exit_code_for(e.code(), fallback);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return fallback;
  }
}

}  // namespace

int exit_code_for(ErrorCode code, int fallback) {
  switch (code) {
    case ErrorCode::MalformedFile:
    case ErrorCode::EmptyTrack:
    case ErrorCode::InsufficientData:
    case ErrorCode::ZeroLengthTrack:
    case ErrorCode::RouteTooShort:
    case ErrorCode::DuplicateDay:
    case ErrorCode::UnknownZone:
    case ErrorCode::NonPositiveFtp:
    case ErrorCode::MissingProfile:
    case ErrorCode::MissingLoadHistory:
    case ErrorCode::IoError: return kIngestion;
    case ErrorCode::TooFewRows:
    case ErrorCode::SingularSystem:
    case ErrorCode::ZeroVariance:
    case ErrorCode::SizeExceedsData: return kTraining;
    case ErrorCode::SchemaMismatch: return kPrediction;
    case ErrorCode::InvalidFraction:
    case ErrorCode::InvalidArgument: return kUsage;
    default: return fallback;
  }
}

RunConfig load_run_config(const fs::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(csv::read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedFile, fmt::format("{}: {}", path.string(), e.what()));
  }
  RunConfig cfg;
  try {
    if (j.contains("activities")) cfg.activities = j["activities"].get<std::string>();
    if (j.contains("wellness")) cfg.wellness = j["wellness"].get<std::string>();
    if (j.contains("zones")) cfg.zone_config = j["zones"].get<std::string>();
    if (j.contains("store")) cfg.store = j["store"].get<std::string>();
    if (j.contains("model")) cfg.model = j["model"].get<std::string>();
    if (j.contains("config")) cfg.config = parse_feature_config(j["config"].get<std::string>());
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("fractions")) cfg.fractions = j["fractions"].get<std::vector<double>>();
    if (j.contains("out")) cfg.out = j["out"].get<std::string>();
    if (j.contains("ctl")) cfg.overrides.ctl = j["ctl"].get<double>();
    if (j.contains("atl")) cfg.overrides.atl = j["atl"].get<double>();
    if (j.contains("tsb")) cfg.overrides.tsb = j["tsb"].get<double>();
    if (j.contains("ramp")) cfg.overrides.ramp_rate = j["ramp"].get<double>();
    if (j.contains("sweep")) cfg.sweep = j["sweep"].get<std::string>();
    if (j.contains("repeats")) cfg.learning_curve_repeats = j["repeats"].get<int>();
    if (j.contains("prefer_wellness")) cfg.prefer_wellness = j["prefer_wellness"].get<bool>();
    if (j.contains("rides")) cfg.synth_rides = j["rides"].get<std::size_t>();
    if (j.contains("noise")) cfg.synth_noise = j["noise"].get<double>();
    if (j.contains("placement")) cfg.synth_placement = parse_climb_placement(j["placement"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedFile, fmt::format("{}: {}", path.string(), e.what()));
  }
  return cfg;
}

int cmd_extract(const RunConfig& cfg, std::ostream& out) {
  return guarded(kIngestion, [&] {
    const FeatureConfig config = cfg.config.value_or(FeatureConfig::TopologyOnly);
    if (!fs::is_directory(cfg.activities)) {
      throw Error(ErrorCode::IoError, fmt::format("activities directory '{}' not found", cfg.activities.string()));
    }
    Dataset ds;
    ds.config = config;
    ds.schema = schema_for(config);
    std::string log;
    if (!fs::exists(cfg.activities / "activities.csv")) {
      spdlog::warn("no activities.csv in {}; writing an empty store", cfg.activities.string());
      write_store(ds, cfg.store);
      write_text(fs::path(cfg.store).replace_extension(".extract.log"), "retained 0\nexcluded 0\n");
      fmt::print(out, "retained 0, excluded 0 -> {}\n", cfg.store.string());
      return int{kOk};
    }
    const ZoneConfig zones = zones_for(cfg);
    const auto records = load_records(cfg.activities);
    const auto screen = screen_activities(records, zones.ftp);

    std::map<std::string, RouteProfile> profiles;
    std::vector<std::string> failures;
    std::vector<ActivityRecord> usable;
    std::vector<Exclusion> excluded = screen.excluded;
    for (const auto& r : screen.retained) {
      const auto gpx = cfg.activities / "routes" / (r.id + ".gpx");
      try {
        if (fs::exists(gpx)) {
          profiles.emplace(r.id, route_from(gpx));
        } else if (r.streams.has_gps()) {
          profiles.emplace(r.id, resample_profile(r.streams.track()));
        } else {
          excluded.push_back({r.id, "no route geometry"});
          continue;
        }
        usable.push_back(r);
      } catch (const Error& e) {
        failures.push_back(fmt::format("{}: {}", fs::exists(gpx) ? gpx.string() : r.id, e.what()));
      }
    }
    if (!failures.empty()) {
      for (const auto& f : failures) spdlog::error("{}", f);
      return int{kIngestion};
    }

    const auto history = load_history(cfg.activities, records, zones);
    ds = assemble(usable, profiles, history, config);
    const fs::path wellness = cfg.wellness.value_or(cfg.activities / "wellness.csv");
    if (needs_state(config) && fs::exists(wellness)) {
      reconcile_wellness(ds, wellness, cfg.prefer_wellness);
    } else if (cfg.prefer_wellness) {
      throw Error(ErrorCode::IoError, fmt::format("--prefer-wellness needs {}", wellness.string()));
    }
    write_store(ds, cfg.store);

    log += fmt::format("retained {}\nexcluded {}\n", ds.rows.size(), excluded.size());
    for (const auto& e : excluded) log += fmt::format("excluded {}: {}\n", e.id, e.reason);
    write_text(fs::path(cfg.store).replace_extension(".extract.log"), log);
    for (const auto& e : excluded) spdlog::info("excluded {}: {}", e.id, e.reason);
    fmt::print(out, "retained {}, excluded {} -> {}\n", ds.rows.size(), excluded.size(), cfg.store.string());
    return int{kOk};
  });
}

int cmd_train(const RunConfig& cfg, std::ostream& out) {
  return guarded(kTraining, [&] {
    Dataset ds = read_store(cfg.store);
    if (cfg.config) ds = ds.restrict_to(*cfg.config);
    if (ds.rows.size() < kMinTrainRows) {
      spdlog::error("store has {} rows; training needs at least {}", ds.rows.size(), kMinTrainRows);
      return int{kTraining};
    }
    const auto specs = default_model_specs(ds.config);
    const FoldPlan plan = stratified_folds(ds, kOuterFolds, cfg.seed);
    spdlog::info("nested CV over {} model specs, {} rows", specs.size(), ds.rows.size());
    const CVReport report = run_cv(ds, specs, plan);
    const ModelCV* best = report.best();
    if (!best) {
      spdlog::error("every model failed at least one fold");
      return int{kTraining};
    }
    const TrainedLinearModel model = fit_final(ds, best->spec, plan);
    write_model(model, cfg.model);
    write_text(cfg.out / "cv_report.json", to_json(report).dump(2) + "\n");
    write_text(cfg.out / "cv_report.txt", report.table());
    fmt::print(out, "{}\nbest: {} (alpha {}) -> {}\n", report.table(), best->spec.name,
               csv::format_double(model.penalty.alpha), cfg.model.string());
    if (!model.converged) spdlog::warn("final model did not converge within the sweep limit");
    return int{kOk};
  });
}

int cmd_predict(const RunConfig& cfg, const fs::path& gpx, std::ostream& out) {
  return guarded(kPrediction, [&] {
    const TrainedLinearModel model = read_model(cfg.model);
    const RouteProfile profile = route_from(gpx);
    const TopologyFeatures topo = extract_topology(profile);

    std::map<std::string, double> state;
    if (model.config == FeatureConfig::TopologyFitnessZones) {
      if (cfg.activities.empty()) {
        throw Error(ErrorCode::SchemaMismatch, "zone-feature models need --activities for training history");
      }
      const auto history = load_history(cfg.activities, load_records(cfg.activities), zones_for(cfg));
      if (history.empty()) throw Error(ErrorCode::MissingLoadHistory, "no training history found");
      for (auto& [k, v] : build_state_features(history, history.back().date + 1)) state[k] = v;
    }
    if (needs_state(model.config)) {
      if (cfg.overrides.ctl || cfg.overrides.atl) {
        for (auto& [k, v] : cfg.overrides.resolve()) state[k] = v;
      } else if (cfg.wellness) {
        for (auto& [k, v] : wellness_state(*cfg.wellness)) state[k] = v;
      } else if (model.config == FeatureConfig::TopologyFitness) {
        throw Error(ErrorCode::SchemaMismatch, "fitness model needs --wellness or --ctl/--atl");
      }
    }
    const auto row = feature_row(model, topo, state);
    const Attribution attr = shap_linear(model, row);

    fmt::print(out, "route: {:.2f} km, {:.0f} m ascent, {} climbs\n", topo.total_distance, topo.total_ascent,
               topo.num_climbs);
    fmt::print(out, "predicted moving time: {:.1f} min\n", attr.prediction);
    fmt::print(out, "base value: {:.2f} min\n", attr.base_value);
    std::vector<std::size_t> order(attr.phi.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return std::fabs(attr.phi[a]) > std::fabs(attr.phi[b]); });
    for (auto i : order) {
      if (attr.phi[i] != 0.0) fmt::print(out, "  {:<32} {:+8.2f}\n", attr.features[i], attr.phi[i]);
    }
    nlohmann::json j = to_json(attr);
    j["gpx"] = gpx.string();
    j["model"] = cfg.model.string();
    write_text(cfg.out / "prediction.json", j.dump(2) + "\n");
    return int{kOk};
  });
}

int cmd_checkpoint(const RunConfig& cfg, const fs::path& gpx, std::ostream& out) {
  return guarded(kPrediction, [&] {
    const TrainedLinearModel model = read_model(cfg.model);
    const auto rows = progressive_predictions(route_from(gpx), model, cfg.fractions);
    const std::string table = checkpoint_csv(rows);
    write_text(cfg.out / "checkpoints.csv", table);
    fmt::print(out, "{:>8} {:>9} {:>9} {:>7} {:>14} {:>12}\n", "fraction", "dist_km", "ascent_m", "climbs",
               "predicted_min", "change_rate");
    for (const auto& r : rows) {
      fmt::print(out, "{:>8.2f} {:>9.2f} {:>9.0f} {:>7} {:>14.1f} {:>12}\n", r.fraction, r.distance_km, r.ascent_m,
                 r.climbs, r.predicted_min, r.change_rate ? fmt::format("{:.2f}", *r.change_rate) : "-");
    }
    return int{kOk};
  });
}

int cmd_whatif(const RunConfig& cfg, const fs::path& gpx, std::ostream& out) {
  return guarded(kPrediction, [&] {
    const TrainedLinearModel model = read_model(cfg.model);
    const RouteProfile profile = route_from(gpx);
    const double minutes = whatif(profile, model, cfg.overrides);
    const auto resolved = cfg.overrides.resolve();
    fmt::print(out, "what-if prediction: {:.1f} min (ctl {}, atl {}, tsb {}, ramp_rate {})\n", minutes,
               resolved.at("ctl"), resolved.at("atl"), resolved.at("tsb"), resolved.at("ramp_rate"));
    if (cfg.sweep) {
      std::string field;
      const auto values = parse_sweep(*cfg.sweep, field);
      const auto points = whatif_sweep(profile, model, cfg.overrides, field, values);
      write_text(cfg.out / "whatif_sweep.csv", sweep_csv(field, points));
      double lo = points.front().predicted_min, hi = lo;
      for (const auto& p : points) {
        lo = std::min(lo, p.predicted_min);
        hi = std::max(hi, p.predicted_min);
      }
      fmt::print(out, "sweep {} over {} values: {:.1f} .. {:.1f} min (range {:.1f})\n", field, points.size(), lo, hi,
                 hi - lo);
    }
    fmt::print(out, "note: {}\n", kWhatIfCaveat);
    return int{kOk};
  });
}

int cmd_report(const RunConfig& cfg, std::ostream& out) {
  return guarded(kTraining, [&] {
    const TrainedLinearModel model = read_model(cfg.model);
    const Dataset store = read_store(cfg.store);
    const ModelSpec spec = spec_for(model);
    const Dataset ds = store.restrict_to(model.config);
    const FoldPlan plan = stratified_folds(ds, kOuterFolds, cfg.seed);
    const ModelCV cv = nested_cv(ds, spec, plan);

    std::string pva = "activity_id,date,actual_min,predicted_min,residual_min\n";
    for (std::size_t i = 0; i < ds.rows.size(); ++i) {
      const auto& r = ds.rows[i];
      const double p = cv.oof_predictions[i];
      pva += fmt::format("{},{},{},{},{}\n", csv::escape(r.activity_id), format_date(r.date),
                         csv::format_double(r.target), csv::format_double(p), csv::format_double(p - r.target));
    }
    write_text(cfg.out / "predicted_vs_actual.csv", pva);

    write_text(cfg.out / "error_breakdown.csv", breakdown_csv(error_breakdown(cv.oof_predictions, ds)));

    std::vector<std::size_t> sizes;
    for (std::size_t s = 20; s < ds.rows.size(); s += 15) sizes.push_back(s);
    sizes.push_back(ds.rows.size());
    const auto curve = learning_curve(ds, spec, sizes, cfg.seed, cfg.learning_curve_repeats);
    write_text(cfg.out / "learning_curve.csv", learning_curve_csv(curve));

    write_text(cfg.out / "importance.csv", importance_csv(global_importance(model, ds)));

    CVReport report;
    report.seed = plan.seed;
    report.k = plan.k;
    report.rows = ds.rows.size();
    report.models.push_back(cv);
    write_text(cfg.out / "cv_report.json", to_json(report).dump(2) + "\n");
    fmt::print(out, "{}report written to {}\n", report.table(), cfg.out.string());
    return int{kOk};
  });
}

int cmd_synth(const RunConfig& cfg, std::ostream& out) {
  return guarded(kUsage, [&] {
    GeneratorSpec spec;
    spec.seed = cfg.seed;
    spec.n_activities = cfg.synth_rides;
    spec.noise_sd_min = cfg.synth_noise;
    spec.placement = cfg.synth_placement;
    spec.history_days = std::max(spec.history_days, static_cast<int>(spec.n_activities) + 30);
    const auto corpus = generate_corpus(spec);
    write_corpus(corpus, cfg.out);
    fmt::print(out, "wrote {} synthetic rides to {}\n", corpus.activities.size(), cfg.out.string());
    return int{kOk};
  });
}

}  // namespace ridecast::cli
