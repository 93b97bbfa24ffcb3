#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "ridecast/checkpoint.hpp"
#include "ridecast/error.hpp"
#include "ridecast/synthetic.hpp"

using namespace ridecast;

namespace {

TrainedLinearModel distance_model(double min_per_km, double intercept) {
  TrainedLinearModel m;
  m.config = FeatureConfig::TopologyOnly;
  m.features = {"total_distance"};
  m.preprocessor = {{0.0}, {0.0}, {1.0}, true};
  m.coefficients = {min_per_km};
  m.intercept = intercept;
  return m;
}

TrainedLinearModel fitness_model() {
  TrainedLinearModel m;
  m.config = FeatureConfig::TopologyFitness;
  m.features = {"total_distance", "total_ascent", "ctl", "atl", "tsb", "ramp_rate"};
  m.preprocessor = {{20, 300, 50, 55, -5, 1}, {22, 310, 48, 50, -2, 0.5}, {10, 200, 8, 12, 9, 2}, true};
  m.coefficients = {25.0, 8.0, -2.0, 0.5, 1.5, 0.2};
  m.intercept = 100.0;
  return m;
}

}  // namespace

TEST_SUITE("checkpoint") {
  TEST_CASE("truncate") {
    const auto p = fixture::from_gradients(std::vector<double>(10000, 0.0));
    CHECK(truncate_route(p, 1.0) == p);
    const auto half = truncate_route(p, 0.5);
    CHECK(half.total_distance() == doctest::Approx(50000.0));
    CHECK(half.size() == 5001);
    CHECK(truncate_route(p, 0.3).total_distance() == doctest::Approx(30000.0));
    for (double bad : {0.0, -0.1, 1.5, std::nan("")}) {
      try {
        truncate_route(p, bad);
        FAIL("expected an error");
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidFraction);
      }
    }
    CHECK_THROWS_AS(truncate_route(p, 1e-6), Error);
  }

  TEST_CASE("flat route scales linearly") {
    const auto p = fixture::from_gradients(std::vector<double>(2000, 0.0));
    const auto m = distance_model(3.0, 0.0);
    const auto cps = progressive_predictions(p, m, default_fractions());
    REQUIRE(cps.size() == 4);
    for (const auto& c : cps) {
      CHECK(c.predicted_min == doctest::Approx(60.0 * c.fraction));
      CHECK(c.climbs == 0);
    }
    CHECK_FALSE(cps[0].change_rate.has_value());
    CHECK(*cps[1].change_rate == doctest::Approx(0.6));
  }

  TEST_CASE("fraction 1.0 equals the full prediction") {
    std::mt19937_64 rng(4);
    const auto p = fixture::random_profile(rng, 3000);
    const auto m = distance_model(2.0, 30.0);
    const std::vector<double> one{1.0};
    const auto cps = progressive_predictions(p, m, one);
    REQUIRE(cps.size() == 1);
    CHECK(cps[0].predicted_min == m.predict(feature_row(m, extract_topology(p))));
    CHECK(checkpoint_csv(cps).rfind("fraction,dist_km,ascent_m,climbs,predicted_min,change_rate\n", 0) == 0);
    const std::vector<double> backwards{0.5, 0.25};
    CHECK_THROWS_AS(progressive_predictions(p, m, backwards), Error);
    CHECK_THROWS_AS(progressive_predictions(p, fitness_model(), one), Error);
  }

  TEST_CASE("back loaded route accelerates") {
    GeneratorSpec spec;
    spec.placement = ClimbPlacement::Back;
    std::mt19937_64 rng(12);
    const auto p = generate_route(spec, rng);
    TrainedLinearModel m = distance_model(2.4, 36.0);
    m.features.push_back("total_ascent");
    m.preprocessor = {{0.0, 0.0}, {0.0, 0.0}, {1.0, 1.0}, true};
    m.coefficients.push_back(0.06);
    const auto cps = progressive_predictions(p, m, default_fractions());
    CHECK(*cps[3].change_rate > *cps[1].change_rate);
    for (std::size_t i = 1; i < cps.size(); ++i) {
      CHECK(cps[i].distance_km >= cps[i - 1].distance_km);
      CHECK(cps[i].ascent_m >= cps[i - 1].ascent_m);
    }
  }

  TEST_CASE("what-if") {
    const auto p = fixture::from_gradients(std::vector<double>(2000, 1.0));
    const auto m = fitness_model();
    FitnessOverrides at_mean{48.0, 50.0, -2.0, 0.5};
    const auto topo = extract_topology(p);
    const double pred = whatif(p, m, at_mean);
    const double topo_part = m.intercept + m.coefficients[0] * (topo.total_distance - 22.0) / 10.0 +
                             m.coefficients[1] * (topo.total_ascent - 310.0) / 200.0;
    CHECK(pred == doctest::Approx(topo_part).epsilon(1e-12));

    FitnessOverrides shifted = at_mean;
    shifted.tsb = 7.0;
    CHECK(whatif(p, m, shifted) - pred == doctest::Approx(1.5 * 9.0 / 9.0));

    FitnessOverrides implied{60.0, 40.0, std::nullopt, std::nullopt};
    CHECK(implied.resolve().at("tsb") == 20.0);
    CHECK(implied.resolve().at("ramp_rate") == 0.0);
    CHECK_THROWS_AS(FitnessOverrides{}.resolve(), Error);
    CHECK_THROWS_AS(whatif(p, distance_model(1, 1), at_mean), Error);

    const std::vector<double> grid{30, 40, 50, 60};
    const auto sweep = whatif_sweep(p, m, implied, "ctl", grid);
    REQUIRE(sweep.size() == 4);
    CHECK(sweep[1].predicted_min - sweep[0].predicted_min == doctest::Approx(sweep[3].predicted_min - sweep[2].predicted_min));
    CHECK_THROWS_AS(whatif_sweep(p, m, implied, "weight", grid), Error);
    CHECK(sweep_csv("ctl", sweep).rfind("ctl,predicted_min\n", 0) == 0);
    CHECK(kWhatIfCaveat.find("causal") != std::string_view::npos);
  }
}
