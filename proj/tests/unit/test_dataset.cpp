#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "fixtures.hpp"
#include "ridecast/csv.hpp"
#include "ridecast/dataset.hpp"
#include "ridecast/topology.hpp"
#include "ridecast/error.hpp"

using namespace ridecast;

namespace {

ActivityRecord ride(std::string id, Day day, double minutes) {
  ActivityRecord r;
  r.id = std::move(id);
  r.start_time = static_cast<std::int64_t>(day) * 86400 + 8 * 3600;
  r.moving_time = minutes * 60.0;
  r.elapsed_time = r.moving_time;
  r.distance = 20000.0;
  return r;
}

struct Fixture {
  std::vector<ActivityRecord> activities;
  std::map<std::string, RouteProfile> profiles;
  std::vector<DailyLoad> history;
};

Fixture make_fixture() {
  std::mt19937_64 rng(21);
  Fixture f;
  f.history = fixture::random_history(rng, 19000, 150);
  const auto route = fixture::random_profile(rng, 2500);
  f.activities = {ride("a", 19060, 80.0), ride("b", 19120, 75.0), ride("c", 19140, 90.0)};
  for (const auto& a : f.activities) f.profiles[a.id] = route;
  return f;
}

std::filesystem::path scratch(const char* name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("schema sizes") {
    CHECK(model_topology_features().size() == 27);
    CHECK(schema_for(FeatureConfig::TopologyOnly).size() == 27);
    CHECK(schema_for(FeatureConfig::TopologyFitness).size() == 31);
    CHECK(schema_for(FeatureConfig::TopologyFitnessZones).size() == 79);
    CHECK(zone_features().size() == 48);
    CHECK(parse_feature_config("topo-fit") == FeatureConfig::TopologyFitness);
    CHECK_THROWS_AS(parse_feature_config("x"), Error);
    for (const auto& n : model_topology_features()) {
      const auto& all = topology_feature_names();
      CHECK(std::find(all.begin(), all.end(), n) != all.end());
    }
  }

  TEST_CASE("assemble widths and separation") {
    const auto f = make_fixture();
    const auto topo = assemble(f.activities, f.profiles, f.history, FeatureConfig::TopologyOnly);
    CHECK(topo.rows.size() == 3);
    CHECK(topo.rows[0].features.size() == 27);
    CHECK(topo.rows[0].target == 80.0);
    const auto fit = assemble(f.activities, f.profiles, f.history, FeatureConfig::TopologyFitness);
    CHECK(fit.rows[0].features.size() == 31);
    const auto zones = assemble(f.activities, f.profiles, f.history, FeatureConfig::TopologyFitnessZones);
    CHECK(zones.rows[0].features.size() == 79);

    for (std::size_t k = 0; k < 27; ++k) CHECK(fit.rows[0].features[k] == fit.rows[1].features[k]);
    CHECK(fit.rows[0].features[fit.column("ctl")] != fit.rows[1].features[fit.column("ctl")]);
    CHECK(zones.restrict_to(FeatureConfig::TopologyFitness) == fit);
    CHECK_THROWS_AS(topo.restrict_to(FeatureConfig::TopologyFitness), Error);
  }

  TEST_CASE("assemble errors") {
    auto f = make_fixture();
    f.profiles.erase("b");
    CHECK_THROWS_AS(assemble(f.activities, f.profiles, f.history, FeatureConfig::TopologyOnly), Error);
    auto g = make_fixture();
    try {
      assemble(g.activities, g.profiles, {}, FeatureConfig::TopologyFitness);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::MissingLoadHistory);
    }
  }

  TEST_CASE("leakage audit") {
    const auto f = make_fixture();
    const auto ds = assemble(f.activities, f.profiles, f.history, FeatureConfig::TopologyFitnessZones);
    CHECK(leakage_audit(ds, f.history).clean());
    CHECK(leakage_audit(ds, f.history).rows_checked == 3);

    const StateFeatureBuilder leaky = [](std::span<const DailyLoad> h, Day t) {
      return build_state_features(h, t, WindowBoundary::Inclusive);
    };
    const auto bad = assemble(f.activities, f.profiles, f.history, FeatureConfig::TopologyFitnessZones, leaky);
    CHECK_FALSE(leakage_audit(bad, f.history, leaky).clean());

    Dataset empty;
    empty.config = FeatureConfig::TopologyFitness;
    empty.schema = schema_for(empty.config);
    CHECK(leakage_audit(empty, f.history).rows_checked == 0);
    CHECK(leakage_audit(empty, f.history).clean());
  }

  TEST_CASE("store round trip") {
    const auto dir = scratch("ridecast_store");
    const auto f = make_fixture();
    auto ds = assemble(f.activities, f.profiles, f.history, FeatureConfig::TopologyFitness);
    ds.rows[1].features[ds.column("gradient_cv")] = std::nullopt;
    ds.rows[2].race = true;
    write_store(ds, dir / "features.csv");
    const auto back = read_store(dir / "features.csv");
    CHECK(back == ds);
    CHECK_FALSE(back.rows[1].features[ds.column("gradient_cv")].has_value());

    const auto text = csv::read_text(dir / "features.csv");
    write_store(back, dir / "again.csv");
    CHECK(csv::read_text(dir / "again.csv") == text);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("store with an unknown column") {
    const auto dir = scratch("ridecast_store_bad");
    const auto f = make_fixture();
    const auto ds = assemble(f.activities, f.profiles, f.history, FeatureConfig::TopologyOnly);
    write_store(ds, dir / "features.csv");
    auto table = csv::read_file(dir / "features.csv");
    table.header.back() = "mystery";
    std::string text = csv::join_row(table.header);
    for (const auto& r : table.rows) text += csv::join_row(r);
    csv::write_file_atomic(dir / "features.csv", text);
    try {
      read_store(dir / "features.csv");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SchemaMismatch);
    }
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("csv helpers") {
    const auto t = csv::parse("a,b\n\"x,1\",\"say \"\"hi\"\"\"\n");
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0][0] == "x,1");
    CHECK(t.rows[0][1] == "say \"hi\"");
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 123456.789}) CHECK(csv::parse_double(csv::format_double(v)) == v);
    CHECK_FALSE(csv::parse_double("NA").has_value());
    CHECK_FALSE(csv::parse_double("").has_value());
  }
}
