#include <doctest.h>

#include <map>
#include <random>

#include <nlohmann/json.hpp>
#include <set>

#include "ridecast/error.hpp"
#include "ridecast/validation.hpp"

using namespace ridecast;

namespace {

Dataset linear_data(std::size_t n, double noise, std::uint64_t seed = 17) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::lognormal_distribution<double> dist(3.1, 0.5);
  Dataset ds;
  ds.schema = {"total_distance", "x2", "x3", "elevation_gain_per_km"};
  for (std::size_t i = 0; i < n; ++i) {
    FeatureRow r;
    r.activity_id = "r" + std::to_string(i);
    const double d = dist(rng), a = z(rng), b = z(rng), e = 10.0 + 5.0 * std::fabs(z(rng));
    r.features = {d, a, b, e};
    r.target = 40.0 + 2.5 * d + 4.0 * a + 0.8 * e + noise * z(rng);
    ds.rows.push_back(r);
  }
  return ds;
}

ModelSpec spec_for(const Dataset& ds, ModelKind kind) {
  ModelSpec s;
  s.name = std::string(to_string(kind));
  s.kind = kind;
  s.features = ds.schema;
  if (kind == ModelKind::Ridge || kind == ModelKind::Lasso || kind == ModelKind::ElasticNet) s.alphas = alpha_grid(kind);
  if (kind == ModelKind::ElasticNet) s.l1_ratios = {0.1, 0.5, 0.9};
  return s;
}

}  // namespace

TEST_SUITE("validation") {
  TEST_CASE("fold sizes and quintile balance") {
    const auto ds = linear_data(96, 1.0);
    const auto plan = stratified_folds(ds, 5, 42);
    std::multiset<std::size_t> sizes;
    std::set<std::size_t> seen;
    for (int f = 0; f < 5; ++f) {
      sizes.insert(plan.test_indices(f).size());
      for (auto i : plan.test_indices(f)) {
        CHECK(seen.insert(i).second);
        CHECK(plan.fold_of[i] == f);
      }
      CHECK(plan.train_indices(f).size() + plan.test_indices(f).size() == 96);
      std::map<int, int> per_q;
      for (auto i : plan.test_indices(f)) ++per_q[plan.stratum[i]];
      for (int q = 0; q < 5; ++q) CHECK(per_q[q] >= 3);
    }
    CHECK(seen.size() == 96);
    CHECK(sizes == std::multiset<std::size_t>{19, 19, 19, 19, 20});
    REQUIRE(plan.inner.size() == 5);
    CHECK(plan.inner[0].size() == plan.train_indices(0).size());
    CHECK(plan.inner[0].k == 3);
  }

  TEST_CASE("plans are deterministic per seed") {
    const auto ds = linear_data(60, 1.0);
    const auto a = stratified_folds(ds, 5, 9);
    const auto b = stratified_folds(ds, 5, 9);
    const auto c = stratified_folds(ds, 5, 10);
    CHECK(a.folds == b.folds);
    CHECK(a.inner[2].folds == b.inner[2].folds);
    CHECK(a.folds != c.folds);
  }

  TEST_CASE("grids") {
    const auto g = log_grid(1e-4, 1e2, 50);
    CHECK(g.size() == 50);
    CHECK(g.front() == doctest::Approx(1e-4));
    CHECK(g.back() == doctest::Approx(1e2));
    CHECK(g[1] / g[0] == doctest::Approx(g[49] / g[48]));
    CHECK(alpha_grid(ModelKind::Ridge).front() == doctest::Approx(1e-3));
    CHECK(alpha_grid(ModelKind::Ols).empty());
    CHECK(make_spec(ModelKind::Lasso, FeatureConfig::TopologyFitness).name == "lasso:topo-fit");
    CHECK(default_model_specs(FeatureConfig::TopologyFitness).size() == 9);
  }

  TEST_CASE("noiseless recovery") {
    const auto ds = linear_data(96, 0.0);
    const auto plan = stratified_folds(ds, 5, 42);
    const auto cv = nested_cv(ds, spec_for(ds, ModelKind::Lasso), plan);
    CHECK(cv.failed_folds == 0);
    CHECK(cv.test_r2_mean > 0.999);
    for (double p : cv.oof_predictions) CHECK(std::isfinite(p));
  }

  TEST_CASE("mean baseline has no skill") {
    const auto ds = linear_data(96, 2.0);
    const auto cv = nested_cv(ds, spec_for(ds, ModelKind::Mean), stratified_folds(ds, 5, 1));
    CHECK(cv.test_r2_mean <= 0.0);
    CHECK(cv.test_r2_mean > -0.3);
  }

  TEST_CASE("outer preprocessing only sees training rows") {
    const auto ds = linear_data(96, 3.0);
    const auto plan = stratified_folds(ds, 5, 42);
    int calls = 0;
    CvOptions opts;
    opts.on_outer_fit = [&](int f, std::span<const std::size_t> train, const Preprocessor& pp) {
      ++calls;
      const auto expected = plan.train_indices(f);
      CHECK(std::vector<std::size_t>(train.begin(), train.end()) == expected);
      std::vector<FeatureRow> rows;
      for (auto i : expected) rows.push_back(ds.rows[i]);
      CHECK(fit_preprocessor(rows) == pp);
      for (auto t : plan.test_indices(f)) CHECK(std::find(train.begin(), train.end(), t) == train.end());
    };
    nested_cv(ds, spec_for(ds, ModelKind::Ridge), plan, opts);
    CHECK(calls == 5);
  }

  TEST_CASE("selection prefers larger alpha on ties") {
    Dataset ds;
    ds.schema = {"total_distance"};
    for (int i = 0; i < 30; ++i) {
      FeatureRow r;
      r.features = {static_cast<double>(i % 7)};
      r.target = 10.0;
      ds.rows.push_back(r);
    }
    ModelSpec s;
    s.kind = ModelKind::Lasso;
    s.features = ds.schema;
    s.alphas = {0.01, 0.1, 1.0};
    const auto sel = select_hyperparameters(ds, s, stratified_folds(ds, 3, 5, 0));
    CHECK(sel.alpha == 1.0);
    CHECK(sel.mae == doctest::Approx(0.0));
  }

  TEST_CASE("report json is reproducible") {
    const auto ds = linear_data(60, 2.0);
    const std::vector<ModelSpec> specs{spec_for(ds, ModelKind::Mean), spec_for(ds, ModelKind::Lasso)};
    const auto a = run_cv(ds, specs, stratified_folds(ds, 5, 3));
    const auto b = run_cv(ds, specs, stratified_folds(ds, 5, 3));
    CHECK(to_json(a).dump() == to_json(b).dump());
    REQUIRE(a.best() != nullptr);
    CHECK(a.best()->spec.kind == ModelKind::Lasso);
    CHECK(a.table().find("lasso") != std::string::npos);
  }

  TEST_CASE("final fit uses all rows") {
    const auto ds = linear_data(60, 1.0);
    const auto m = fit_final(ds, spec_for(ds, ModelKind::Lasso), stratified_folds(ds, 5, 3));
    CHECK(m.features == ds.schema);
    CHECK(m.penalty.alpha > 0.0);
    CHECK(mae(m.predict(ds), ds.targets()) < 2.0);
  }

  TEST_CASE("learning curve") {
    const auto ds = linear_data(96, 0.0);
    const auto spec = spec_for(ds, ModelKind::Ridge);
    const std::vector<std::size_t> sizes{30, 60, 96};
    const auto curve = learning_curve(ds, spec, sizes, 5, 2);
    REQUIRE(curve.size() == 3);
    CHECK(curve[2].repeats == 1);
    CHECK(curve[0].repeats == 2);
    for (const auto& p : curve) CHECK(p.train_mae < 0.5);
    CHECK(learning_curve_csv(curve).rfind("size,repeats,train_mae,validation_mae,validation_sd\n", 0) == 0);

    const auto plan = stratified_folds(ds, 5, 0);
    (void)plan;
    CHECK_THROWS_AS(learning_curve(ds, spec, std::vector<std::size_t>{5}, 1), Error);
    CHECK_THROWS_AS(learning_curve(ds, spec, std::vector<std::size_t>{40, 30}, 1), Error);
    try {
      learning_curve(ds, spec, std::vector<std::size_t>{200}, 1);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SizeExceedsData);
    }
  }

  TEST_CASE("error breakdown") {
    const std::vector<double> actual{10, 20, 30, 40};
    CHECK(error_breakdown(actual, actual, std::vector<std::string>{"a", "a", "b", "b"})[1].mae == 0.0);
    const std::vector<double> pred{12, 18, 38, 48};
    const auto t = error_breakdown(pred, actual, std::vector<std::string>{"a", "a", "b", "b"});
    REQUIRE(t.size() == 2);
    CHECK(t[0].mae == 2.0);
    CHECK(t[1].mae == 8.0);
    const auto one = error_breakdown(pred, actual, std::vector<std::string>(4, "all"));
    CHECK(one[0].mae == mae(pred, actual));
    CHECK(breakdown_csv(t).rfind("tier,n,mae,mape\n", 0) == 0);

    const std::vector<double> d{1, 2, 3, 4, 5, 6}, e{6, 5, 4, 3, 2, 1};
    const auto tiers = difficulty_tiers(d, e);
    CHECK(tiers.front() == "short/hilly");
    CHECK(tiers.back() == "long/flat");
  }
}
