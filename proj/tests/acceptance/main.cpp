// Runs every acceptance criterion and prints one PASS/FAIL line for each.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "climb_oracle.hpp"
#include "feature_oracles.hpp"
#include "fixtures.hpp"
#include "linear_oracle.hpp"
#include "load_oracle.hpp"
#include "ridecast/checkpoint.hpp"
#include "ridecast/csv.hpp"
#include "ridecast/dataset.hpp"
#include "ridecast/explain.hpp"
#include "ridecast/regression.hpp"
#include "ridecast/synthetic.hpp"
#include "ridecast/topology.hpp"
#include "ridecast/validation.hpp"

using namespace ridecast;

namespace {

constexpr double kLassoTol = 1e-6;
// allowed rise per sweep, relative to the objective; floating-point rounding only
constexpr double kObjectiveUlps = 1e-14;
constexpr double kFeatureTol = 1e-9;
constexpr double kShapTol = 1e-9;
constexpr double kNoiseSd = 5.0;
const double kMaeLimit = 1.25 * kNoiseSd * std::sqrt(2.0 / std::numbers::pi);
constexpr double kR2Limit = 0.90;
constexpr double kLimitLassoS = 5.0;
constexpr double kLimitClimbS = 10.0;
constexpr double kLimitEndToEndS = 60.0;
constexpr double kLimitTotalS = 120.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Records the first few failures and keeps going.
struct Checker {
  Outcome out;
  int failures = 0;
  void require(bool ok, const std::string& what) {
    if (ok) return;
    out.pass = false;
    if (failures++ < 3) out.detail += (out.detail.empty() ? "" : "; ") + what;
  }
};

// Shared synthetic corpus for criteria 7 to 10.
struct Shared {
  SyntheticCorpus corpus;
  Dataset topo_fit;
  FoldPlan plan;
  CVReport report;
  TrainedLinearModel final_model;
  TrainedLinearModel topo_model;
  bool ready = false;
};

Shared& shared() {
  static Shared s;
  return s;
}

GeneratorSpec corpus_spec() {
  GeneratorSpec spec;
  spec.seed = 42;
  spec.n_activities = 96;
  spec.noise_sd_min = kNoiseSd;
  return spec;
}

Outcome lasso_oracle() {
  Checker c;
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  CdOptions tight;
  tight.tol = 1e-12;
  tight.max_iter = 100000;
  tight.record_objective = true;
  for (int inst = 0; inst < 100; ++inst) {
    const int n = 30, p = 5;
    const Matrix Xo = oracle::orthonormal_design(n, p, rng);
    Vector y(n);
    for (int i = 0; i < n; ++i) y(i) = 20.0 + 3.0 * z(rng);
    for (int j = 0; j < p; ++j) y += (2.0 * z(rng)) * Xo.col(j);
    const double alpha = 0.05 + 2.0 * u(rng);
    const auto fit = fit_lasso(Xo, y, alpha, tight);
    const auto want = oracle::orthonormal_lasso(Xo, y, alpha);
    for (int j = 0; j < p; ++j) {
      c.require(std::fabs(fit.coef(j) - want[static_cast<std::size_t>(j)]) <= kLassoTol,
                fmt::format("instance {} closed form coef {}", inst, j));
    }

    Matrix X(n, p);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) X(i, j) = z(rng);
    }
    Vector y2 = (X * Vector::Random(p) * 5.0).array() + 10.0;
    for (int i = 0; i < n; ++i) y2(i) += z(rng);
    const auto zero = fit_lasso(X, y2, 0.0, tight);
    const auto ols = oracle::ols(X, y2);
    for (int j = 0; j < p; ++j) {
      c.require(std::fabs(zero.coef(j) - ols.coef[static_cast<std::size_t>(j)]) <= kLassoTol,
                fmt::format("instance {} alpha=0 coef {}", inst, j));
    }
    c.require(std::fabs(zero.intercept - ols.intercept) <= kLassoTol, fmt::format("instance {} intercept", inst));

    auto rose = [](const std::vector<double>& t, std::size_t k) {
      return t[k] - t[k - 1] > kObjectiveUlps * std::fabs(t[k - 1]);
    };
    for (const auto* f : {&fit, &zero}) {
      for (std::size_t k = 1; k < f->objective_trace.size(); ++k) {
        c.require(!rose(f->objective_trace, k), fmt::format("instance {} objective rose at sweep {}", inst, k));
      }
    }
    const auto en = fit_elasticnet(X, y2, 0.3, 0.5, tight);
    for (std::size_t k = 1; k < en.objective_trace.size(); ++k) {
      c.require(!rose(en.objective_trace, k), fmt::format("instance {} en objective rose", inst));
    }
  }
  return c.out;
}

Outcome climb_oracle() {
  Checker c;
  std::mt19937_64 rng(99);
  for (int k = 0; k < 50; ++k) {
    const auto p = fixture::random_profile(rng, 5000);
    const auto got = detect_climbs(p);
    const auto want = oracle::enumerate_climbs(p);
    if (got.size() != want.size()) {
      c.require(false, fmt::format("profile {}: {} climbs vs oracle {}", k, got.size(), want.size()));
      continue;
    }
    for (std::size_t i = 0; i < got.size(); ++i) {
      const auto d_first = static_cast<long>(got[i].first_segment) - static_cast<long>(want[i].first);
      const auto d_end = static_cast<long>(got[i].end_segment) - static_cast<long>(want[i].end);
      c.require(std::labs(d_first) <= 1 && std::labs(d_end) <= 1, fmt::format("profile {} climb {} bounds", k, i));
      c.require(std::string(to_string(got[i].category)) == want[i].category,
                fmt::format("profile {} climb {} category", k, i));
    }
  }
  return c.out;
}

Outcome feature_oracles() {
  Checker c;
  std::mt19937_64 rng(5150);
  auto close = [](double a, double b) { return a == b || std::fabs(a - b) <= kFeatureTol * std::max(1.0, std::fabs(b)); };
  for (int k = 0; k < 20; ++k) {
    const auto p = fixture::random_profile(rng, 4000);
    c.require(close(punchiness(p), oracle::punchiness(p)), fmt::format("fixture {} punchiness", k));

    const auto d = gradient_distribution(p);
    const auto b = oracle::buckets(p);
    const double want[] = {b.negative, b.b0_2, b.b2_4, b.b4_6, b.b6_10, b.b10};
    for (std::size_t i = 0; i < kBucketCount; ++i) c.require(close(d.buckets[i], want[i]), fmt::format("fixture {} bucket {}", k, i));
    c.require(close(d.above_5, b.above5) && close(d.above_8, b.above8) && close(d.above_10, b.above10),
              fmt::format("fixture {} thresholds", k));

    const auto climbs = detect_climbs(p);
    c.require(close(recovery_distance(p, climbs), oracle::recovery(p, oracle::enumerate_climbs(p))),
              fmt::format("fixture {} recovery", k));
    c.require(close(technical_descent(p), oracle::technical(p)), fmt::format("fixture {} technical", k));
    c.require(sharp_turns(p).count == oracle::turns(p), fmt::format("fixture {} turns", k));
    const auto s = max_sustained_gradient(p);
    const auto so = oracle::sustained(p);
    c.require(std::fabs(s.gradient - so.gradient) <= kFeatureTol && s.location_m == so.location,
              fmt::format("fixture {} sustained", k));
  }
  return c.out;
}

Outcome anti_leakage() {
  Checker c;
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<int> offset(30, 250);
  for (int k = 0; k < 20; ++k) {
    const Day first = 19000 + 7 * k;
    const auto history = fixture::random_history(rng, first, 300);
    const Day t = first + offset(rng);
    const auto base = build_state_features(history, t);
    std::vector<DailyLoad> extra;
    for (Day d : {t, t + 1, t + 30}) {
      DailyLoad l;
      l.date = d;
      l.tss = 300.0;
      l.power_zone_seconds.fill(1800.0);
      l.hr_zone_seconds.fill(1800.0);
      extra.push_back(l);
    }
    const auto injected = build_state_features(merge_loads(history, extra), t);
    bool identical = injected.size() == base.size();
    for (std::size_t i = 0; identical && i < base.size(); ++i) {
      identical = injected[i].first == base[i].first &&
                  std::memcmp(&injected[i].second, &base[i].second, sizeof(double)) == 0;
    }
    c.require(identical, fmt::format("history {} changed by injection", k));
  }

  const auto hist = fixture::random_history(rng, 19000, 200);
  std::vector<ActivityRecord> acts;
  std::map<std::string, RouteProfile> profiles;
  const auto route = fixture::random_profile(rng, 1500);
  for (int i = 0; i < 5; ++i) {
    ActivityRecord a;
    a.id = fmt::format("a{}", i);
    a.start_time = static_cast<std::int64_t>(19060 + 25 * i) * 86400 + 3600 * 9;
    a.moving_time = 3600.0;
    a.distance = route.total_distance();
    acts.push_back(a);
    profiles[a.id] = route;
  }
  const auto good = assemble(acts, profiles, hist, FeatureConfig::TopologyFitnessZones);
  c.require(leakage_audit(good, hist).clean(), "correct build flagged");
  const StateFeatureBuilder broken = [](std::span<const DailyLoad> h, Day t) {
    return build_state_features(h, t, WindowBoundary::Inclusive);
  };
  const auto bad = assemble(acts, profiles, hist, FeatureConfig::TopologyFitnessZones, broken);
  c.require(!leakage_audit(bad, hist, broken).clean(), "inclusive build not flagged");
  return c.out;
}

Outcome load_recursion() {
  Checker c;
  std::vector<DailyLoad> constant;
  for (Day d = 0; d < 400; ++d) {
    DailyLoad l;
    l.date = d;
    l.tss = 100.0;
    constant.push_back(l);
  }
  const auto s = evolve_fitness(constant).back();
  c.require(std::fabs(s.ctl - 100.0) <= 1.0, fmt::format("ctl {}", s.ctl));
  c.require(std::fabs(s.atl - 100.0) <= 0.1, fmt::format("atl {}", s.atl));
  c.require(std::fabs(s.ctl - oracle::constant_load_ema(100.0, 42.0, 400)) <= 1e-9, "ctl vs closed form");
  DailyLoad one;
  one.date = 5;
  one.tss = 42.0;
  const auto single = evolve_fitness(std::vector<DailyLoad>{one}).back();
  c.require(single.ctl == 1.0 && single.atl == 6.0 && single.tsb == -5.0,
            fmt::format("single step {} {} {}", single.ctl, single.atl, single.tsb));
  return c.out;
}

void prepare_shared() {
  auto& s = shared();
  if (s.ready) return;
  s.corpus = generate_corpus(corpus_spec());
  s.topo_fit = corpus_dataset(s.corpus, FeatureConfig::TopologyFitness);
  s.plan = stratified_folds(s.topo_fit, kOuterFolds, 42);
  const auto specs = default_model_specs(FeatureConfig::TopologyFitness);
  s.report = run_cv(s.topo_fit, specs, s.plan);
  const ModelCV* best = s.report.best();
  if (best) s.final_model = fit_final(s.topo_fit, best->spec, s.plan);
  const Dataset topo = s.topo_fit.restrict_to(FeatureConfig::TopologyOnly);
  s.topo_model = fit_final(topo, make_spec(ModelKind::Lasso, FeatureConfig::TopologyOnly), s.plan);
  s.ready = true;
}

Outcome cv_integrity() {
  Checker c;
  const auto corpus = generate_corpus(corpus_spec());
  const auto ds = corpus_dataset(corpus, FeatureConfig::TopologyFitness);
  const auto plan = stratified_folds(ds, 5, 42);
  std::multiset<std::size_t> sizes;
  for (int f = 0; f < 5; ++f) sizes.insert(plan.test_indices(f).size());
  c.require(sizes == std::multiset<std::size_t>{19, 19, 19, 19, 20}, "fold sizes");
  for (int q = 0; q < 5; ++q) {
    std::vector<int> counts;
    for (int f = 0; f < 5; ++f) {
      int n = 0;
      for (auto i : plan.test_indices(f)) n += plan.stratum[i] == q;
      counts.push_back(n);
    }
    const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
    c.require(*hi - *lo <= 1, fmt::format("quintile {} spread {}", q, *hi - *lo));
  }
  std::set<std::size_t> all;
  for (int f = 0; f < 5; ++f) all.insert(plan.test_indices(f).begin(), plan.test_indices(f).end());
  c.require(all.size() == 96, "folds do not partition the rows");

  int calls = 0;
  CvOptions opts;
  opts.on_outer_fit = [&](int f, std::span<const std::size_t> train, const Preprocessor& pp) {
    ++calls;
    const auto& test = plan.test_indices(f);
    for (auto i : train) c.require(std::find(test.begin(), test.end(), i) == test.end(), "test row in training set");
    std::vector<FeatureRow> rows;
    for (auto i : plan.train_indices(f)) rows.push_back(ds.rows[i]);
    c.require(fit_preprocessor(rows) == pp, fmt::format("fold {} preprocessor differs from training-only fit", f));
    // perturbing a test row must not change the statistics
    Dataset moved = ds;
    for (auto i : test) {
      for (auto& v : moved.rows[i].features) v = v ? std::optional<double>(*v * 3.0 + 1000.0) : std::nullopt;
    }
    std::vector<FeatureRow> again;
    for (auto i : plan.train_indices(f)) again.push_back(moved.rows[i]);
    c.require(fit_preprocessor(again) == pp, fmt::format("fold {} statistics see test rows", f));
  };
  nested_cv(ds, make_spec(ModelKind::Lasso, FeatureConfig::TopologyFitness), plan, opts);
  c.require(calls == 5, "observer not called for every fold");
  return c.out;
}

Outcome end_to_end() {
  Checker c;
  prepare_shared();
  const auto& s = shared();
  const ModelCV* best = nullptr;
  const ModelCV* best_topo = nullptr;
  const ModelCV* best_fit = nullptr;
  for (const auto& m : s.report.models) {
    if (m.spec.alphas.empty() || m.failed_folds > 0) continue;
    if (!best || m.test_mae_mean < best->test_mae_mean) best = &m;
    auto& slot = m.spec.config == FeatureConfig::TopologyOnly ? best_topo : best_fit;
    if (!slot || m.test_mae_mean < slot->test_mae_mean) slot = &m;
  }
  if (!best || !best_topo || !best_fit) return {false, "no regularized model completed"};
  c.require(best->test_r2_mean >= kR2Limit, fmt::format("{} R2 {:.4f}", best->spec.name, best->test_r2_mean));
  c.require(best->test_mae_mean <= kMaeLimit,
            fmt::format("{} MAE {:.3f} > {:.3f}", best->spec.name, best->test_mae_mean, kMaeLimit));
  c.require(best_fit->test_mae_mean < best_topo->test_mae_mean,
            fmt::format("fitness {:.3f} vs topology {:.3f}", best_fit->test_mae_mean, best_topo->test_mae_mean));
  if (c.out.pass) {
    c.out.detail = fmt::format("{} MAE {:.2f} (limit {:.2f}), R2 {:.3f}; best topo-only MAE {:.2f}", best->spec.name,
                               best->test_mae_mean, kMaeLimit, best->test_r2_mean, best_topo->test_mae_mean);
  }
  return c.out;
}

Outcome shap_additivity() {
  Checker c;
  prepare_shared();
  const auto& s = shared();
  const auto& m = s.final_model;
  const Dataset view = s.topo_fit.select(m.features);
  double worst = 0.0;
  for (const auto& r : view.rows) {
    const auto a = shap_linear(m, r.features);
    double sum = a.base_value;
    for (double phi : a.phi) sum += phi;
    worst = std::max(worst, std::fabs(sum - m.predict(r)));
  }
  c.require(worst < kShapTol, fmt::format("additivity residual {}", worst));
  const auto imp = global_importance(m, s.topo_fit);
  int zeros = 0;
  for (const auto& i : imp) {
    if (m.coefficients[*m.feature_index(i.feature)] != 0.0) continue;
    ++zeros;
    c.require(i.mean_abs_shap == 0.0, fmt::format("zero-coefficient {} has importance {}", i.feature, i.mean_abs_shap));
  }
  if (c.out.pass) c.out.detail = fmt::format("max residual {:.1e}, {} zero-coefficient features", worst, zeros);
  return c.out;
}

Outcome checkpoint_identities() {
  Checker c;
  prepare_shared();
  const auto& s = shared();
  const auto& m = s.topo_model;
  for (std::size_t k = 0; k < 10; ++k) {
    const auto& p = s.corpus.activities[k].profile;
    const auto cps = progressive_predictions(p, m, default_fractions());
    c.require(cps.back().predicted_min == m.predict(feature_row(m, extract_topology(p))),
              fmt::format("route {} fraction 1.0 differs", k));
    for (std::size_t i = 1; i < cps.size(); ++i) {
      c.require(cps[i].distance_km >= cps[i - 1].distance_km && cps[i].ascent_m >= cps[i - 1].ascent_m &&
                    cps[i].climbs >= cps[i - 1].climbs,
                fmt::format("route {} prefix not monotone", k));
    }
  }
  GeneratorSpec back = corpus_spec();
  back.placement = ClimbPlacement::Back;
  std::mt19937_64 rng(77);
  int increasing = 0;
  for (int routes = 0; routes < 10; ++routes) {
    const auto p = generate_route(back, rng);
    const auto cps = progressive_predictions(p, m, default_fractions());
    const bool ok = *cps[1].change_rate < *cps[2].change_rate && *cps[2].change_rate < *cps[3].change_rate;
    increasing += ok;
    c.require(ok,
              fmt::format("back-loaded route {} change rates {:.3f} {:.3f} {:.3f}", routes, *cps[1].change_rate,
                          *cps[2].change_rate, *cps[3].change_rate));
  }
  if (!c.out.pass) c.out.detail += fmt::format(" ({} of 10 back-loaded routes strictly increasing)", increasing);
  return c.out;
}

Outcome round_trips() {
  Checker c;
  prepare_shared();
  const auto& s = shared();
  const auto dir = std::filesystem::temp_directory_path() / "ridecast_acceptance";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);

  write_store(s.topo_fit, dir / "features.csv");
  c.require(read_store(dir / "features.csv") == s.topo_fit, "store round trip differs");
  const auto bytes = csv::read_text(dir / "features.csv");
  write_store(read_store(dir / "features.csv"), dir / "again.csv");
  c.require(csv::read_text(dir / "again.csv") == bytes, "store bytes differ after re-write");

  write_model(s.final_model, dir / "model.json");
  const auto back = read_model(dir / "model.json");
  c.require(back == s.final_model, "model round trip differs");
  c.require(back.predict(s.topo_fit) == s.final_model.predict(s.topo_fit), "reloaded model predicts differently");

  const Dataset small = s.topo_fit.restrict_to(FeatureConfig::TopologyOnly);
  const std::vector<ModelSpec> specs{make_spec(ModelKind::Mean, FeatureConfig::TopologyOnly),
                                     make_spec(ModelKind::Lasso, FeatureConfig::TopologyOnly)};
  const auto a = to_json(run_cv(small, specs, stratified_folds(small, 5, 7))).dump(2);
  const auto b = to_json(run_cv(small, specs, stratified_folds(small, 5, 7))).dump(2);
  c.require(a == b, "CV report bytes differ across runs");
  std::filesystem::remove_all(dir);
  return c.out;
}

struct Criterion {
  int id;
  std::string name;
  std::function<Outcome()> run;
  double limit_s;  // 0 means no runtime limit
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "lasso oracle equivalence", lasso_oracle, kLimitLassoS},
      {2, "climb detection vs exhaustive oracle", climb_oracle, kLimitClimbS},
      {3, "feature formula oracles", feature_oracles, 0.0},
      {4, "anti-leakage", anti_leakage, 0.0},
      {5, "load recursion", load_recursion, 0.0},
      {6, "nested CV integrity", cv_integrity, 0.0},
      {7, "synthetic end-to-end", end_to_end, kLimitEndToEndS},
      {8, "SHAP additivity", shap_additivity, 0.0},
      {9, "checkpoint identities", checkpoint_identities, 0.0},
      {10, "round trips", round_trips, 0.0},
  };
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  int failed = 0;
  for (const auto& cr : criteria) {
    const auto t0 = clock::now();
    Outcome o;
    try {
      o = cr.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    if (cr.limit_s > 0.0 && secs > cr.limit_s) {
      o.pass = false;
      o.detail += fmt::format("{}took {:.1f} s, limit {:.0f} s", o.detail.empty() ? "" : "; ", secs, cr.limit_s);
    }
    failed += o.pass ? 0 : 1;
    fmt::print("[{}] {:>2}. {:<38} {:6.2f} s{}{}\n", o.pass ? "PASS" : "FAIL", cr.id, cr.name, secs,
               o.detail.empty() ? "" : "  ", o.detail);
    std::fflush(stdout);
  }
  const double total = std::chrono::duration<double>(clock::now() - start).count();
  const bool total_ok = total <= kLimitTotalS;
  failed += total_ok ? 0 : 1;
  fmt::print("[{}]     {:<38} {:6.2f} s  limit {:.0f} s\n", total_ok ? "PASS" : "FAIL", "total runtime", total,
             kLimitTotalS);
  fmt::print("{} of {} criteria passed\n", criteria.size() + 1 - failed, criteria.size() + 1);
  return failed == 0 ? 0 : 1;
}
