#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "ridecast/csv.hpp"
#include "ridecast/error.hpp"
#include "ridecast/validation.hpp"

namespace ridecast {

namespace {

constexpr std::uint64_t kSeedMix = 0x9E3779B97F4A7C15ULL;

double mean_of(std::span<const double> v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

struct FoldData {
  Preprocessor pre;
  Matrix X_train;
  Vector y_train;
  Matrix X_test;
  Vector y_test;
};

FoldData prepare(const Dataset& data, std::span<const std::size_t> train, std::span<const std::size_t> test) {
  FoldData f;
  const Dataset tr = data.subset(train);
  const Dataset te = data.subset(test);
  f.pre = fit_preprocessor(tr.rows);
  f.X_train = f.pre.transform(tr.rows);
  f.X_test = f.pre.transform(te.rows);
  f.y_train = to_vector(tr.targets());
  f.y_test = to_vector(te.targets());
  return f;
}

double mae_of(const Matrix& X, const Vector& y, const LinearFit& fit) {
  const Vector pred = (X * fit.coef).array() + fit.intercept;
  return (pred - y).cwiseAbs().mean();
}

}  // namespace

std::vector<std::size_t> FoldPlan::train_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of.size(); ++i) {
    if (fold_of[i] != fold) out.push_back(i);
  }
  return out;
}

FoldPlan stratified_folds(std::span<const double> distances, int k, std::uint64_t seed, int inner_k) {
  const std::size_t n = distances.size();
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 folds");
  if (n < 2 * static_cast<std::size_t>(k)) {
    throw Error(ErrorCode::TooFewRows, fmt::format("{} rows is too few for {} folds", n, k));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return distances[a] < distances[b]; });

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.stratum.assign(n, 0);
  for (std::size_t r = 0; r < n; ++r) plan.stratum[order[r]] = static_cast<int>(5 * r / n);

  std::mt19937_64 rng(seed);
  plan.fold_of.assign(n, -1);
  plan.folds.assign(static_cast<std::size_t>(k), {});
  std::size_t counter = 0;
  for (int q = 0; q < 5; ++q) {
    std::vector<std::size_t> members;
    for (std::size_t r = 0; r < n; ++r) {
      if (plan.stratum[order[r]] == q) members.push_back(order[r]);
    }
    std::shuffle(members.begin(), members.end(), rng);
    for (auto idx : members) {
      const int f = static_cast<int>(counter++ % static_cast<std::size_t>(k));
      plan.fold_of[idx] = f;
      plan.folds[static_cast<std::size_t>(f)].push_back(idx);
    }
  }
  for (auto& f : plan.folds) std::sort(f.begin(), f.end());

  if (inner_k > 0) {
    for (int f = 0; f < k; ++f) {
      const auto train = plan.train_indices(f);
      std::vector<double> d;
      d.reserve(train.size());
      for (auto i : train) d.push_back(distances[i]);
      plan.inner.push_back(stratified_folds(d, inner_k, seed ^ (kSeedMix * static_cast<std::uint64_t>(f + 1)), 0));
    }
  }
  return plan;
}

FoldPlan stratified_folds(const Dataset& dataset, int k, std::uint64_t seed, int inner_k) {
  const std::size_t col = dataset.column("total_distance");
  std::vector<double> d;
  d.reserve(dataset.rows.size());
  for (const auto& r : dataset.rows) d.push_back(r.features[col].value_or(0.0));
  return stratified_folds(d, k, seed, inner_k);
}

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> g;
  if (count == 1) return {lo};
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < count; ++i) g.push_back(std::pow(10.0, a + (b - a) * i / (count - 1)));
  return g;
}

std::vector<double> alpha_grid(ModelKind kind) {
  switch (kind) {
    case ModelKind::Ridge: return log_grid(1e-3, 1e3, kAlphaGridSize);
    case ModelKind::Lasso:
    case ModelKind::ElasticNet: return log_grid(1e-4, 1e2, kAlphaGridSize);
    default: return {};
  }
}

std::vector<std::string> ModelSpec::columns() const { return features.empty() ? schema_for(config) : features; }

ModelSpec make_spec(ModelKind kind, FeatureConfig config) {
  ModelSpec s;
  s.kind = kind;
  s.config = config;
  s.alphas = alpha_grid(kind);
  if (kind == ModelKind::ElasticNet) s.l1_ratios = {0.1, 0.5, 0.9};
  s.name = fmt::format("{}:{}", to_string(kind), to_string(config));
  return s;
}

std::vector<ModelSpec> default_model_specs(FeatureConfig max_config) {
  std::vector<ModelSpec> specs;
  specs.push_back(make_spec(ModelKind::Mean, FeatureConfig::TopologyOnly));
  specs.back().name = "baseline-mean";
  specs.push_back(make_spec(ModelKind::Median, FeatureConfig::TopologyOnly));
  specs.back().name = "baseline-median";
  auto ols = make_spec(ModelKind::Ols, FeatureConfig::TopologyOnly);
  ols.name = "ols:distance+ascent";
  ols.features = {"total_distance", "total_ascent"};
  specs.push_back(ols);
  for (auto cfg : {FeatureConfig::TopologyOnly, FeatureConfig::TopologyFitness, FeatureConfig::TopologyFitnessZones}) {
    if (static_cast<int>(cfg) > static_cast<int>(max_config)) break;
    for (auto kind : {ModelKind::Ridge, ModelKind::Lasso, ModelKind::ElasticNet}) specs.push_back(make_spec(kind, cfg));
  }
  return specs;
}

Selection select_hyperparameters(const Dataset& data, const ModelSpec& spec, const FoldPlan& plan,
                                 const CdOptions& cd) {
  Selection best;
  if (spec.alphas.empty()) return best;
  const std::vector<double> ratios = spec.kind == ModelKind::ElasticNet
                                         ? (spec.l1_ratios.empty() ? std::vector<double>{0.5} : spec.l1_ratios)
                                         : std::vector<double>{spec.kind == ModelKind::Ridge ? 0.0 : 1.0};
  std::vector<double> alphas = spec.alphas;
  std::sort(alphas.begin(), alphas.end(), std::greater<>());

  // score[r][a] accumulates validation MAE over folds
  std::vector<std::vector<double>> score(ratios.size(), std::vector<double>(alphas.size(), 0.0));
  for (int f = 0; f < plan.k; ++f) {
    const FoldData fd = prepare(data, plan.train_indices(f), plan.test_indices(f));
    for (std::size_t r = 0; r < ratios.size(); ++r) {
      Vector warm = Vector::Zero(fd.X_train.cols());
      for (std::size_t a = 0; a < alphas.size(); ++a) {
        Penalty pen{spec.kind, alphas[a], ratios[r]};
        const LinearFit fit = fit_penalized(fd.X_train, fd.y_train, pen, cd, &warm);
        warm = fit.coef;
        score[r][a] += mae_of(fd.X_test, fd.y_test, fit) / plan.k;
      }
    }
  }
  best.mae = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < alphas.size(); ++a) {
    for (std::size_t r = 0; r < ratios.size(); ++r) {
      if (score[r][a] < best.mae) best = {alphas[a], ratios[r], score[r][a]};
    }
  }
  return best;
}

ModelCV nested_cv(const Dataset& dataset, const ModelSpec& spec, const FoldPlan& plan, const CvOptions& options) {
  if (plan.size() != dataset.rows.size()) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("plan covers {} rows but dataset has {}", plan.size(), dataset.rows.size()));
  }
  const auto cols = spec.columns();
  const Dataset data = dataset.select(cols);
  ModelCV out;
  out.spec = spec;
  out.oof_predictions.assign(data.rows.size(), std::numeric_limits<double>::quiet_NaN());

  for (int f = 0; f < plan.k; ++f) {
    FoldResult fr;
    fr.fold = f;
    const auto train = plan.train_indices(f);
    const auto& test = plan.test_indices(f);
    fr.n_train = train.size();
    fr.n_test = test.size();
    try {
      const Dataset outer_train = data.subset(train);
      Selection sel;
      if (!spec.alphas.empty()) {
        if (plan.inner.size() != static_cast<std::size_t>(plan.k)) {
          throw Error(ErrorCode::InvalidArgument, "plan has no inner folds");
        }
        sel = select_hyperparameters(outer_train, spec, plan.inner[static_cast<std::size_t>(f)], options.cd);
      }
      fr.alpha = sel.alpha;
      fr.l1_ratio = spec.kind == ModelKind::Ridge ? 0.0 : sel.l1_ratio;
      const FoldData fd = prepare(data, train, test);
      if (options.on_outer_fit) options.on_outer_fit(f, train, fd.pre);
      const LinearFit fit = fit_penalized(fd.X_train, fd.y_train, Penalty{spec.kind, fr.alpha, fr.l1_ratio}, options.cd);
      fr.converged = fit.converged;
      const Vector pred_test = (fd.X_test * fit.coef).array() + fit.intercept;
      fr.train_mae = mae_of(fd.X_train, fd.y_train, fit);
      fr.test_mae = (pred_test - fd.y_test).cwiseAbs().mean();
      fr.gap = fr.train_mae - fr.test_mae;
      std::vector<double> p(pred_test.data(), pred_test.data() + pred_test.size());
      std::vector<double> y(fd.y_test.data(), fd.y_test.data() + fd.y_test.size());
      try {
        fr.test_r2 = r2(p, y);
      } catch (const Error&) {
        fr.test_r2.reset();
      }
      for (std::size_t i = 0; i < test.size(); ++i) out.oof_predictions[test[i]] = p[i];
    } catch (const Error& e) {
      fr.error = e.what();
      ++out.failed_folds;
    }
    out.folds.push_back(std::move(fr));
  }

  std::vector<double> maes, r2s, trains, gaps;
  for (const auto& fr : out.folds) {
    if (fr.error) continue;
    maes.push_back(fr.test_mae);
    trains.push_back(fr.train_mae);
    gaps.push_back(fr.gap);
    if (fr.test_r2) r2s.push_back(*fr.test_r2);
  }
  out.test_mae_mean = mean_of(maes);
  out.test_mae_sd = sample_sd(maes);
  out.test_r2_mean = mean_of(r2s);
  out.test_r2_sd = sample_sd(r2s);
  out.train_mae_mean = mean_of(trains);
  out.gap_mean = mean_of(gaps);
  out.cv_stability = out.test_mae_mean > 0.0 ? out.test_mae_sd / out.test_mae_mean : 0.0;
  out.overfit = !gaps.empty() && out.gap_mean < kOverfitGap;
  return out;
}

CVReport run_cv(const Dataset& dataset, std::span<const ModelSpec> specs, const FoldPlan& plan,
                const CvOptions& options) {
  CVReport report;
  report.seed = plan.seed;
  report.k = plan.k;
  report.rows = dataset.rows.size();
  for (const auto& s : specs) report.models.push_back(nested_cv(dataset, s, plan, options));
  return report;
}

const ModelCV* CVReport::best() const {
  const ModelCV* best = nullptr;
  for (const auto& m : models) {
    if (m.failed_folds > 0 || m.folds.empty()) continue;
    if (!best || m.test_mae_mean < best->test_mae_mean) best = &m;
  }
  return best;
}

std::string CVReport::table() const {
  std::string out = fmt::format("{:<28} {:>16} {:>16} {:>10} {:>9} {:>9}  {}\n", "model", "test MAE (min)", "test R2",
                                "train MAE", "gap", "CV stab", "flags");
  for (const auto& m : models) {
    std::string flags;
    if (m.overfit) flags += "overfit ";
    if (m.failed_folds) flags += fmt::format("failed={} ", m.failed_folds);
    for (const auto& f : m.folds) {
      if (!f.converged) {
        flags += "not-converged ";
        break;
      }
    }
    out += fmt::format("{:<28} {:>8.2f} ± {:<5.2f} {:>8.3f} ± {:<5.3f} {:>10.2f} {:>9.2f} {:>9.3f}  {}\n", m.spec.name,
                       m.test_mae_mean, m.test_mae_sd, m.test_r2_mean, m.test_r2_sd, m.train_mae_mean, m.gap_mean,
                       m.cv_stability, flags);
  }
  return out;
}

TrainedLinearModel fit_final(const Dataset& dataset, const ModelSpec& spec, const FoldPlan& plan,
                             const CdOptions& cd) {
  const Dataset data = dataset.select(spec.columns());
  Selection sel;
  if (!spec.alphas.empty()) sel = select_hyperparameters(data, spec, plan, cd);
  TrainedLinearModel model =
      train_model(data, Penalty{spec.kind, sel.alpha, spec.kind == ModelKind::Ridge ? 0.0 : sel.l1_ratio}, cd);
  model.config = spec.config;
  return model;
}

nlohmann::json to_json(const CVReport& report) {
  using nlohmann::json;
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json models = json::array();
  for (const auto& m : report.models) {
    json folds = json::array();
    for (const auto& f : m.folds) {
      json jf = {{"fold", f.fold},           {"n_train", f.n_train},     {"n_test", f.n_test},
                 {"alpha", f.alpha},         {"l1_ratio", f.l1_ratio},   {"train_mae", f.train_mae},
                 {"test_mae", f.test_mae},   {"gap", f.gap},             {"converged", f.converged}};
      jf["test_r2"] = f.test_r2 ? json(*f.test_r2) : json(nullptr);
      if (f.error) jf["error"] = *f.error;
      folds.push_back(std::move(jf));
    }
    json oof = json::array();
    for (double v : m.oof_predictions) oof.push_back(num(v));
    models.push_back({{"name", m.spec.name},
                      {"kind", std::string(to_string(m.spec.kind))},
                      {"config", std::string(to_string(m.spec.config))},
                      {"features", m.spec.columns()},
                      {"test_mae_mean", m.test_mae_mean},
                      {"test_mae_sd", m.test_mae_sd},
                      {"test_r2_mean", m.test_r2_mean},
                      {"test_r2_sd", m.test_r2_sd},
                      {"train_mae_mean", m.train_mae_mean},
                      {"gap_mean", m.gap_mean},
                      {"cv_stability", m.cv_stability},
                      {"overfit", m.overfit},
                      {"failed_folds", m.failed_folds},
                      {"folds", std::move(folds)},
                      {"oof_predictions", std::move(oof)}});
  }
  json j = {{"seed", report.seed}, {"k", report.k}, {"rows", report.rows}, {"models", std::move(models)}};
  if (const auto* b = report.best()) j["best"] = b->spec.name;
  return j;
}

std::vector<CurvePoint> learning_curve(const Dataset& dataset, const ModelSpec& spec,
                                       std::span<const std::size_t> sizes, std::uint64_t seed, int repeats,
                                       const CdOptions& cd) {
  const std::size_t n = dataset.rows.size();
  std::vector<CurvePoint> curve;
  std::size_t prev = 0;
  for (auto size : sizes) {
    if (size < 10) throw Error(ErrorCode::InvalidArgument, fmt::format("learning-curve size {} is below 10", size));
    if (size <= prev) throw Error(ErrorCode::InvalidArgument, "learning-curve sizes must increase");
    if (size > n) throw Error(ErrorCode::SizeExceedsData, fmt::format("size {} exceeds {} rows", size, n));
    prev = size;
    CurvePoint pt;
    pt.size = size;
    pt.repeats = size == n ? 1 : repeats;
    std::vector<double> train, val;
    for (int rep = 0; rep < pt.repeats; ++rep) {
      std::mt19937_64 rng(seed ^ (kSeedMix * (size * 131 + static_cast<std::uint64_t>(rep) + 1)));
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), 0);
      if (size < n) {
        std::shuffle(idx.begin(), idx.end(), rng);
        idx.resize(size);
        std::sort(idx.begin(), idx.end());
      }
      const Dataset sub = dataset.subset(idx);
      const FoldPlan plan = stratified_folds(sub, kOuterFolds, rng());
      CvOptions opts;
      opts.cd = cd;
      const ModelCV cv = nested_cv(sub, spec, plan, opts);
      train.push_back(cv.train_mae_mean);
      val.push_back(cv.test_mae_mean);
    }
    pt.train_mae = mean_of(train);
    pt.validation_mae = mean_of(val);
    pt.validation_sd = sample_sd(val);
    curve.push_back(pt);
  }
  return curve;
}

std::string learning_curve_csv(std::span<const CurvePoint> curve) {
  std::string out = "size,repeats,train_mae,validation_mae,validation_sd\n";
  for (const auto& p : curve) {
    out += fmt::format("{},{},{},{},{}\n", p.size, p.repeats, csv::format_double(p.train_mae),
                       csv::format_double(p.validation_mae), csv::format_double(p.validation_sd));
  }
  return out;
}

std::vector<TierError> error_breakdown(std::span<const double> predicted, std::span<const double> actual,
                                       std::span<const std::string> tiers) {
  if (predicted.size() != actual.size() || tiers.size() != actual.size()) {
    throw Error(ErrorCode::InvalidArgument, "breakdown inputs are not aligned");
  }
  std::map<std::string, TierError> groups;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    auto& g = groups[tiers[i]];
    g.tier = tiers[i];
    ++g.n;
    const double e = std::fabs(predicted[i] - actual[i]);
    g.mae += e;
    g.mape += actual[i] != 0.0 ? 100.0 * e / std::fabs(actual[i]) : 0.0;
  }
  std::vector<TierError> out;
  for (auto& [_, g] : groups) {
    g.mae /= static_cast<double>(g.n);
    g.mape /= static_cast<double>(g.n);
    out.push_back(g);
  }
  return out;
}

std::vector<std::string> difficulty_tiers(std::span<const double> distance, std::span<const double> gain_per_km) {
  if (distance.size() != gain_per_km.size()) throw Error(ErrorCode::InvalidArgument, "tier inputs are not aligned");
  if (distance.empty()) return {};
  auto tiers_of = [](std::span<const double> v) {
    const std::vector<double> all(v.begin(), v.end());
    const double q1 = quantile(all, 1.0 / 3.0), q2 = quantile(all, 2.0 / 3.0);
    std::vector<int> t;
    for (double x : v) t.push_back(x <= q1 ? 0 : (x <= q2 ? 1 : 2));
    return t;
  };
  static constexpr const char* kDist[] = {"short", "medium", "long"};
  static constexpr const char* kElev[] = {"flat", "rolling", "hilly"};
  const auto td = tiers_of(distance), te = tiers_of(gain_per_km);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < td.size(); ++i) out.push_back(fmt::format("{}/{}", kDist[td[i]], kElev[te[i]]));
  return out;
}

std::vector<TierError> error_breakdown(std::span<const double> predicted, const Dataset& rows) {
  const auto dc = rows.column("total_distance");
  const auto ec = rows.column("elevation_gain_per_km");
  std::vector<double> d, e;
  for (const auto& r : rows.rows) {
    d.push_back(r.features[dc].value_or(0.0));
    e.push_back(r.features[ec].value_or(0.0));
  }
  const auto tiers = difficulty_tiers(d, e);
  const auto actual = rows.targets();
  return error_breakdown(predicted, actual, tiers);
}

std::string breakdown_csv(std::span<const TierError> table) {
  std::string out = "tier,n,mae,mape\n";
  for (const auto& t : table) {
    out += fmt::format("{},{},{},{}\n", csv::escape(t.tier), t.n, csv::format_double(t.mae), csv::format_double(t.mape));
  }
  return out;
}

}  // namespace ridecast
