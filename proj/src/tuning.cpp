#include "phosml/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "phosml/error.hpp"
#include "phosml/kernels.hpp"

namespace phosml {

Distribution Distribution::uniform(double lo, double hi) {
  if (!(lo < hi)) throw Error(Errc::Config, "uniform distribution needs lo < hi");
  return {Kind::Uniform, lo, hi, {}};
}

Distribution Distribution::log_uniform(double lo, double hi) {
  if (!(lo < hi) || !(lo > 0)) throw Error(Errc::Config, "log_uniform distribution needs 0 < lo < hi");
  return {Kind::LogUniform, lo, hi, {}};
}

Distribution Distribution::int_uniform(double lo, double hi) {
  if (!(lo < hi) || std::floor(lo) != lo || std::floor(hi) != hi)
    throw Error(Errc::Config, "int_uniform distribution needs integer lo < hi");
  return {Kind::IntUniform, lo, hi, {}};
}

Distribution Distribution::choice(std::vector<ParamValue> values) {
  if (values.empty()) throw Error(Errc::Config, "choice distribution needs at least one value");
  return {Kind::Choice, 0, 0, std::move(values)};
}

ParamValue Distribution::draw(Rng& rng) const {
  switch (kind) {
    case Kind::Uniform: return rng.uniform(lo, hi);
    case Kind::LogUniform: return std::exp(rng.uniform(std::log(lo), std::log(hi)));
    case Kind::IntUniform: return lo + static_cast<double>(rng.below(static_cast<std::uint64_t>(hi - lo) + 1));
    case Kind::Choice: return values[rng.below(values.size())];
  }
  return 0.0;
}

SearchSpace default_search_space(const std::string& label) {
  using D = Distribution;
  if (label == "KNN-Uniform" || label == "KNN-Distance") return {{"k", D::int_uniform(1, 15)}};
  if (label == "SVR")
    return {{"c", D::log_uniform(0.1, 100)}, {"epsilon", D::uniform(0.01, 0.3)}, {"gamma", D::log_uniform(1e-3, 0.5)}};
  if (label == "KRR") return {{"alpha", D::log_uniform(1e-3, 10)}, {"gamma", D::log_uniform(1e-3, 0.5)}};
  if (label == "RF")
    return {{"n_trees", D::int_uniform(50, 200)},
            {"max_features_fraction", D::uniform(0.2, 1.0)},
            {"min_samples_leaf", D::int_uniform(1, 5)}};
  if (label == "GBM")
    return {{"n_rounds", D::int_uniform(100, 400)},
            {"learning_rate", D::log_uniform(0.02, 0.2)},
            {"max_leaves", D::int_uniform(4, 31)},
            {"min_samples_leaf", D::int_uniform(1, 8)},
            {"subsample_fraction", D::uniform(0.6, 1.0)}};
  if (label == "GBM-LevelWise")
    return {{"n_rounds", D::int_uniform(100, 400)},
            {"learning_rate", D::log_uniform(0.02, 0.2)},
            {"max_depth", D::int_uniform(2, 6)},
            {"l2_leaf_reg", D::log_uniform(0.1, 10)}};
  if (label == "AdaBoost")
    return {{"n_estimators", D::int_uniform(20, 100)},
            {"learning_rate", D::log_uniform(0.1, 1.0)},
            {"loss", D::choice({std::string("linear"), std::string("square"), std::string("exponential")})},
            {"max_depth", D::int_uniform(2, 6)}};
  if (label == "CART") return {{"max_depth", D::int_uniform(2, 12)}, {"min_samples_leaf", D::int_uniform(1, 8)}};
  throw Error(Errc::Config, "no default search space for '" + label + "'");
}

nlohmann::json to_json(const Distribution& d) {
  using nlohmann::json;
  switch (d.kind) {
    case Distribution::Kind::Uniform: return json{{"uniform", {d.lo, d.hi}}};
    case Distribution::Kind::LogUniform: return json{{"log_uniform", {d.lo, d.hi}}};
    case Distribution::Kind::IntUniform: return json{{"int_uniform", {d.lo, d.hi}}};
    case Distribution::Kind::Choice: {
      json values = json::array();
      for (const auto& v : d.values) values.push_back(to_json(v));
      return json{{"choice", values}};
    }
  }
  return nullptr;
}

Distribution distribution_from_json(const nlohmann::json& j) {
  if (!j.is_object() || j.size() != 1)
    throw Error(Errc::Config, "distribution must be a single-key object, got " + j.dump());
  const auto& [key, value] = *j.items().begin();
  auto bounds = [&]() {
    if (!value.is_array() || value.size() != 2 || !value[0].is_number() || !value[1].is_number())
      throw Error(Errc::Config, key + " expects [lo, hi]");
    return std::pair{value[0].get<double>(), value[1].get<double>()};
  };
  if (key == "uniform") return std::apply(Distribution::uniform, bounds());
  if (key == "log_uniform") return std::apply(Distribution::log_uniform, bounds());
  if (key == "int_uniform") return std::apply(Distribution::int_uniform, bounds());
  if (key == "choice") {
    if (!value.is_array()) throw Error(Errc::Config, "choice expects an array");
    std::vector<ParamValue> values;
    for (const auto& v : value) values.push_back(param_from_json(v));
    return Distribution::choice(std::move(values));
  }
  throw Error(Errc::Config, "unknown distribution '" + key + "'");
}

nlohmann::json to_json(const SearchSpace& space) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, d] : space) j[name] = to_json(d);
  return j;
}

SearchSpace search_space_from_json(const nlohmann::json& j) {
  SearchSpace space;
  for (const auto& [name, d] : j.items()) space[name] = distribution_from_json(d);
  return space;
}

std::vector<FoldPrediction> cross_validate(const LearnerSpec& spec, const DesignMatrix& x, std::span<const double> y,
                                           const std::vector<std::vector<std::size_t>>& folds) {
  std::vector<FoldPrediction> out;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    if (folds[f].empty()) throw Error(Errc::EmptyFold, "fold " + std::to_string(f) + " is empty");
    std::vector<std::size_t> train;
    for (std::size_t g = 0; g < folds.size(); ++g)
      if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
    std::sort(train.begin(), train.end());
    const auto model = fit(spec, x.select_rows(train), select(y, train));
    out.push_back({select(y, folds[f]), predict(model, x.select_rows(folds[f]))});
  }
  return out;
}

namespace {

void run_trial(TrialRecord& trial, const LearnerSpec& spec, const DesignMatrix& x, std::span<const double> y,
               const std::vector<std::vector<std::size_t>>& folds) {
  try {
    LearnerSpec s = spec;
    for (const auto& [k, v] : trial.params) s.params[k] = v;
    const auto preds = cross_validate(s, x, y, folds);
    const EvalRow row = cv_report("trial", preds);
    trial.folds = row.per_fold;
    trial.mae = row.mae;
    trial.rmse = row.rmse;
    trial.r2 = row.r2;
    trial.ok = std::isfinite(trial.rmse.mean);
    if (!trial.ok) trial.error = "non-finite RMSE";
  } catch (const std::exception& e) {
    trial.ok = false;
    trial.error = e.what();
  }
}

}  // namespace

SearchResult random_search(const LearnerSpec& spec, const SearchSpace& space, std::size_t budget, const DesignMatrix& x,
                           std::span<const double> y, const std::vector<std::vector<std::size_t>>& folds,
                           std::uint64_t seed, bool parallel) {
  if (budget == 0) throw Error(Errc::Config, "search budget must be at least 1");
  if (folds.size() < 2) throw Error(Errc::EmptyFold, "random search needs at least 2 folds");
  SearchResult result;
  result.trials.resize(budget);
  for (std::size_t t = 0; t < budget; ++t) {
    auto& trial = result.trials[t];
    trial.index = t;
    Rng rng(derive_seed(seed, t));
    for (const auto& [name, dist] : space) trial.params[name] = dist.draw(rng);
  }

  const auto n = static_cast<std::ptrdiff_t>(budget);
#pragma omp parallel for schedule(dynamic) if (parallel) num_threads(kernels::thread_count())
  for (std::ptrdiff_t t = 0; t < n; ++t) run_trial(result.trials[t], spec, x, y, folds);

  std::vector<std::size_t> ok;
  for (std::size_t t = 0; t < budget; ++t)
    if (result.trials[t].ok) ok.push_back(t);
  if (ok.empty()) throw Error(Errc::InvalidParam, "every trial failed; first error: " + result.trials[0].error);
  std::stable_sort(ok.begin(), ok.end(), [&](std::size_t a, std::size_t b) {
    const auto& ta = result.trials[a];
    const auto& tb = result.trials[b];
    if (ta.rmse.mean != tb.rmse.mean) return ta.rmse.mean < tb.rmse.mean;
    return ta.mae.mean < tb.mae.mean;
  });
  for (std::size_t r = 0; r < ok.size(); ++r) result.trials[ok[r]].rank = r + 1;
  result.best = result.trials[ok.front()];
  return result;
}

std::string trials_csv(const SearchResult& result) {
  std::set<std::string> names;
  std::size_t k = 0;
  for (const auto& t : result.trials) {
    for (const auto& [name, _] : t.params) names.insert(name);
    k = std::max(k, t.folds.size());
  }
  auto num = [](double v) { return nlohmann::json(v).dump(); };
  std::ostringstream out;
  out << "trial,status";
  for (const auto& n : names) out << ',' << n;
  for (const char* metric : {"mae", "rmse", "r2"})
    for (std::size_t f = 0; f < k; ++f) out << ',' << metric << "_fold" << f;
  out << ",mae_mean,mae_std,rmse_mean,rmse_std,r2_mean,r2_std,rank,error\n";
  for (const auto& t : result.trials) {
    out << t.index << ',' << (t.ok ? "ok" : "failed");
    for (const auto& n : names) {
      out << ',';
      if (auto it = t.params.find(n); it != t.params.end()) out << to_string(it->second);
    }
    for (int metric = 0; metric < 3; ++metric)
      for (std::size_t f = 0; f < k; ++f) {
        out << ',';
        if (f >= t.folds.size()) continue;
        const auto& s = t.folds[f];
        if (metric == 0) out << num(s.mae);
        else if (metric == 1) out << num(s.rmse);
        else if (s.r2) out << num(*s.r2);
      }
    if (t.ok)
      out << ',' << num(t.mae.mean) << ',' << num(t.mae.std) << ',' << num(t.rmse.mean) << ',' << num(t.rmse.std) << ','
          << num(t.r2.mean) << ',' << num(t.r2.std);
    else
      out << ",,,,,,";
    std::string err = t.error;
    std::replace(err.begin(), err.end(), '"', '\'');
    out << ',' << t.rank << ",\"" << err << "\"\n";
  }
  return out.str();
}

}  // namespace phosml
