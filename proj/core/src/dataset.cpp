#include "ridecast/dataset.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ridecast/csv.hpp"
#include "ridecast/error.hpp"
#include "ridecast/topology.hpp"

namespace ridecast {

std::size_t Dataset::column(std::string_view name) const {
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i] == name) return i;
  }
  throw Error(ErrorCode::SchemaMismatch, fmt::format("no column '{}' in schema", name));
}

std::vector<double> Dataset::targets() const {
  std::vector<double> y;
  y.reserve(rows.size());
  for (const auto& r : rows) y.push_back(r.target);
  return y;
}

void Dataset::validate() const {
  for (const auto& r : rows) {
    if (r.features.size() != schema.size()) {
      throw Error(ErrorCode::SchemaMismatch,
                  fmt::format("row '{}' has {} features, schema has {}", r.activity_id, r.features.size(), schema.size()));
    }
    if (!(r.target > 0.0)) throw Error(ErrorCode::InvalidArgument, fmt::format("row '{}' has non-positive target", r.activity_id));
  }
}

Dataset Dataset::select(std::span<const std::string> names) const {
  std::vector<std::size_t> cols;
  for (const auto& n : names) cols.push_back(column(n));
  Dataset out;
  out.config = config;
  out.schema.assign(names.begin(), names.end());
  out.rows.reserve(rows.size());
  for (const auto& r : rows) {
    FeatureRow nr = r;
    nr.features.clear();
    for (auto c : cols) nr.features.push_back(r.features[c]);
    out.rows.push_back(std::move(nr));
  }
  return out;
}

Dataset Dataset::restrict_to(FeatureConfig narrower) const {
  if (static_cast<int>(narrower) > static_cast<int>(config)) {
    throw Error(ErrorCode::SchemaMismatch,
                fmt::format("cannot widen a '{}' dataset to '{}'", to_string(config), to_string(narrower)));
  }
  const auto names = schema_for(narrower);
  Dataset out = select(names);
  out.config = narrower;
  return out;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.config = config;
  out.schema = schema;
  out.rows.reserve(indices.size());
  for (auto i : indices) out.rows.push_back(rows.at(i));
  return out;
}

Dataset assemble(std::span<const ActivityRecord> activities, const std::map<std::string, RouteProfile>& profiles,
                 std::span<const DailyLoad> history, FeatureConfig config, const StateFeatureBuilder& builder) {
  Dataset ds;
  ds.config = config;
  ds.schema = schema_for(config);
  const bool needs_state = config != FeatureConfig::TopologyOnly;
  const auto sorted_history = normalize_history(history);
  const auto& topo_names = model_topology_features();

  for (const auto& act : activities) {
    const auto it = profiles.find(act.id);
    if (it == profiles.end()) throw Error(ErrorCode::MissingProfile, fmt::format("no route profile for '{}'", act.id));
    if (!(act.moving_time > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, fmt::format("activity '{}' has no moving time", act.id));
    }
    FeatureRow row;
    row.activity_id = act.id;
    row.date = act.start_day();
    row.target = act.moving_time / 60.0;
    row.features.reserve(ds.schema.size());

    const auto topo = extract_topology(it->second);
    const auto topo_map = topo.to_map();
    for (const auto& name : topo_names) {
      const auto found = std::find_if(topo_map.begin(), topo_map.end(), [&](const auto& kv) { return kv.first == name; });
      row.features.push_back(found->second);
    }
    if (needs_state) {
      if (sorted_history.empty() || sorted_history.front().date > row.date) {
        throw Error(ErrorCode::MissingLoadHistory,
                    fmt::format("no training history before {} for '{}'", format_date(row.date), act.id));
      }
      const auto state = builder(sorted_history, row.date);
      const std::size_t wanted = ds.schema.size() - topo_names.size();
      for (std::size_t k = 0; k < wanted; ++k) {
        if (state[k].first != ds.schema[topo_names.size() + k]) {
          throw Error(ErrorCode::SchemaMismatch, fmt::format("state feature '{}' out of order", state[k].first));
        }
        row.features.push_back(state[k].second);
      }
    }
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

LeakageReport leakage_audit(const Dataset& dataset, std::span<const DailyLoad> history,
                            const StateFeatureBuilder& builder) {
  LeakageReport report;
  const std::size_t first_state = model_topology_features().size();
  if (dataset.config == FeatureConfig::TopologyOnly) return report;

  for (const auto& row : dataset.rows) {
    ++report.rows_checked;
    std::vector<DailyLoad> injected;
    for (Day d : {row.date, row.date + 3}) {
      DailyLoad probe;
      probe.date = d;
      probe.tss = 250.0;
      probe.power_zone_seconds.fill(3600.0);
      probe.hr_zone_seconds.fill(3600.0);
      injected.push_back(probe);
    }
    const auto combined = merge_loads(history, injected);
    const auto state = builder(combined, row.date);
    for (std::size_t k = first_state; k < dataset.schema.size(); ++k) {
      const auto& name = dataset.schema[k];
      const auto found = std::find_if(state.begin(), state.end(), [&](const auto& kv) { return kv.first == name; });
      if (found == state.end()) continue;
      const double stored = row.features[k].value_or(std::nan(""));
      if (stored != found->second) {
        report.violations.push_back({row.activity_id, name, stored, found->second});
      }
    }
  }
  return report;
}

std::filesystem::path store_sidecar_path(const std::filesystem::path& store) {
  auto p = store;
  p.replace_extension(".schema.json");
  return p;
}

namespace {
const std::vector<std::string> kLeadingColumns = {"activity_id", "date", "target_min", "race"};
}

void write_store(const Dataset& dataset, const std::filesystem::path& path) {
  dataset.validate();
  std::vector<std::string> header = kLeadingColumns;
  header.insert(header.end(), dataset.schema.begin(), dataset.schema.end());

  std::string text = csv::join_row(header);
  for (const auto& r : dataset.rows) {
    std::vector<std::string> cells;
    cells.reserve(header.size());
    cells.push_back(r.activity_id);
    cells.push_back(format_date(r.date));
    cells.push_back(csv::format_double(r.target));
    cells.push_back(r.race ? (*r.race ? "1" : "0") : "");
    for (const auto& v : r.features) cells.push_back(v ? csv::format_double(*v) : "NA");
    text += csv::join_row(cells);
  }

  const nlohmann::ordered_json sidecar = {
      {"schema_version", kSchemaVersion},
      {"config", to_string(dataset.config)},
      {"rows", dataset.rows.size()},
      {"missing_marker", "NA"},
      {"columns", header},
      {"features", dataset.schema},
  };
  csv::write_file_atomic(store_sidecar_path(path), sidecar.dump(2) + "\n");
  csv::write_file_atomic(path, text);
}

Dataset read_store(const std::filesystem::path& path) {
  nlohmann::json sidecar;
  try {
    sidecar = nlohmann::json::parse(csv::read_text(store_sidecar_path(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedFile, fmt::format("store sidecar: {}", e.what()));
  }
  const auto version = sidecar.value("schema_version", std::string{});
  if (version != kSchemaVersion) {
    throw Error(ErrorCode::SchemaMismatch, fmt::format("store schema '{}' != '{}'", version, kSchemaVersion));
  }
  Dataset ds;
  ds.config = parse_feature_config(sidecar.value("config", std::string{}));
  ds.schema = schema_for(ds.config);
  if (sidecar.value("features", std::vector<std::string>{}) != ds.schema) {
    throw Error(ErrorCode::SchemaMismatch, "sidecar feature order differs from the canonical schema");
  }

  const auto table = csv::read_file(path);
  std::vector<std::string> expected = kLeadingColumns;
  expected.insert(expected.end(), ds.schema.begin(), ds.schema.end());
  if (table.header != expected) {
    for (const auto& h : table.header) {
      if (std::find(expected.begin(), expected.end(), h) == expected.end()) {
        throw Error(ErrorCode::SchemaMismatch, fmt::format("unknown store column '{}'", h));
      }
    }
    throw Error(ErrorCode::SchemaMismatch, "store columns differ from the canonical schema");
  }
  const std::size_t lead = kLeadingColumns.size();
  for (const auto& cells : table.rows) {
    FeatureRow r;
    r.activity_id = cells[0];
    r.date = parse_date(cells[1]);
    r.target = csv::parse_double(cells[2]).value_or(0.0);
    if (cells[3] == "1") {
      r.race = true;
    } else if (cells[3] == "0") {
      r.race = false;
    }
    for (std::size_t c = lead; c < cells.size(); ++c) r.features.push_back(csv::parse_double(cells[c]));
    ds.rows.push_back(std::move(r));
  }
  ds.validate();
  return ds;
}

}  // namespace ridecast
