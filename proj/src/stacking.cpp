#include "phosml/stacking.hpp"

#include <algorithm>

#include "phosml/error.hpp"

namespace phosml {

NamedSpec default_learner(const std::string& label, std::uint64_t seed) {
  auto make = [&](LearnerKind kind, ParamMap params) { return NamedSpec{label, LearnerSpec{kind, std::move(params), seed}}; };
  if (label == "KNN-Uniform") return make(LearnerKind::KnnUniform, {{"k", 5.0}});
  if (label == "KNN-Distance") return make(LearnerKind::KnnDistance, {{"k", 5.0}});
  if (label == "SVR") return make(LearnerKind::Svr, {{"c", 10.0}, {"epsilon", 0.05}});
  if (label == "KRR") return make(LearnerKind::Krr, {{"alpha", 0.1}, {"kernel", std::string("rbf")}});
  if (label == "RF")
    return make(LearnerKind::RandomForest, {{"n_trees", 200.0}, {"max_features_fraction", 0.5}, {"bootstrap", true}});
  if (label == "GBM")
    return make(LearnerKind::GbmLeafWise,
                {{"n_rounds", 300.0}, {"learning_rate", 0.05}, {"max_leaves", 15.0}, {"min_samples_leaf", 3.0}});
  if (label == "GBM-LevelWise")
    return make(LearnerKind::GbmLevelWise, {{"n_rounds", 300.0}, {"learning_rate", 0.05}, {"max_depth", 4.0}, {"l2_leaf_reg", 1.0}});
  if (label == "AdaBoost") return make(LearnerKind::AdaBoostR2, {{"n_estimators", 50.0}, {"max_depth", 4.0}});
  if (label == "CART") return make(LearnerKind::Cart, {{"min_samples_leaf", 2.0}});
  throw Error(Errc::Config, "unknown learner label '" + label + "'");
}

std::vector<std::string> roster_labels(TargetKind target) {
  std::vector<std::string> labels{"KNN-Uniform", "KNN-Distance", "SVR", "KRR", "RF", "GBM", "AdaBoost"};
  if (target != TargetKind::Wavelength) labels.push_back("GBM-LevelWise");
  return labels;
}

std::vector<std::string> meta_candidate_labels(TargetKind target) {
  if (target == TargetKind::Plqy) return {"KRR", "SVR", "RF", "KNN-Distance"};
  return {"KRR", "SVR", "GBM", "KNN-Distance"};
}

StackArchitecture stack_preset(TargetKind target, std::uint64_t seed) {
  StackArchitecture arch;
  switch (target) {
    case TargetKind::Wavelength:
      arch.bases = {default_learner("GBM", seed)};
      arch.meta = default_learner("SVR", seed);
      arch.meta_features = MetaFeatures::FeaturesPlusBasePredictions;
      break;
    case TargetKind::Kr:
      arch.bases = {default_learner("AdaBoost", seed), default_learner("GBM", seed), default_learner("RF", seed),
                    default_learner("GBM-LevelWise", seed)};
      arch.meta = default_learner("KNN-Distance", seed);
      arch.meta_features = MetaFeatures::BasePredictionsOnly;
      break;
    case TargetKind::Plqy:
      arch.bases = {default_learner("RF", seed)};
      arch.meta = default_learner("RF", seed);
      arch.meta_features = MetaFeatures::FeaturesPlusBasePredictions;
      break;
  }
  return arch;
}

std::string to_string(MetaFeatures m) {
  return m == MetaFeatures::BasePredictionsOnly ? "base_predictions_only" : "features_plus_base_predictions";
}

std::string to_string(OofMode m) { return m == OofMode::OutOfFold ? "out_of_fold" : "in_sample"; }

MetaFeatures parse_meta_features(const std::string& text) {
  if (text == "base_predictions_only") return MetaFeatures::BasePredictionsOnly;
  if (text == "features_plus_base_predictions") return MetaFeatures::FeaturesPlusBasePredictions;
  throw Error(Errc::Config, "unknown meta_features '" + text + "'");
}

OofMode parse_oof_mode(const std::string& text) {
  if (text == "out_of_fold") return OofMode::OutOfFold;
  if (text == "in_sample") return OofMode::InSample;
  throw Error(Errc::Config, "unknown oof mode '" + text + "'");
}

std::string prediction_column(const std::string& base_name) { return "pred:" + base_name; }

namespace {

void check_arch(const StackArchitecture& arch) {
  if (arch.bases.empty()) throw Error(Errc::Config, "stack needs at least one base learner");
  std::vector<std::string> names;
  for (const auto& b : arch.bases) {
    if (std::find(names.begin(), names.end(), b.name) != names.end())
      throw Error(Errc::Config, "duplicate base learner name '" + b.name + "'");
    names.push_back(b.name);
  }
}

void check_folds(const std::vector<std::vector<std::size_t>>& folds, std::size_t n) {
  if (folds.size() < 2) throw Error(Errc::EmptyFold, "out-of-fold stacking needs at least 2 folds");
  std::vector<int> seen(n, 0);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    if (folds[f].empty()) throw Error(Errc::EmptyFold, "fold " + std::to_string(f) + " is empty");
    for (auto i : folds[f]) {
      if (i >= n) throw Error(Errc::EmptyFold, "fold " + std::to_string(f) + " references row " + std::to_string(i));
      ++seen[i];
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (seen[i] != 1) throw Error(Errc::EmptyFold, "folds do not partition the rows (row " + std::to_string(i) + ")");
}

DesignMatrix assemble(const StackArchitecture& arch, const DesignMatrix& x, const std::vector<std::vector<double>>& preds) {
  DesignMatrix meta;
  const bool with_features = arch.meta_features == MetaFeatures::FeaturesPlusBasePredictions;
  if (with_features) {
    meta.columns = x.columns;
    meta.provenance = x.provenance;
  }
  for (const auto& b : arch.bases) {
    meta.columns.push_back(prediction_column(b.name));
    meta.provenance.push_back(prediction_column(b.name));
  }
  const std::size_t d = with_features ? x.cols() : 0;
  meta.data = Matrix(x.rows(), d + preds.size());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = 0; j < d; ++j) meta.data(i, j) = x.data(i, j);
    for (std::size_t b = 0; b < preds.size(); ++b) meta.data(i, d + b) = preds[b][i];
  }
  return meta;
}

}  // namespace

OofResult build_oof_matrix(const StackArchitecture& arch, const DesignMatrix& x, std::span<const double> y,
                           const std::vector<std::vector<std::size_t>>& folds) {
  check_arch(arch);
  const std::size_t n = x.rows();
  if (y.size() != n) throw Error(Errc::LengthMismatch, "stack: X and y lengths differ");
  std::vector<std::vector<double>> preds(arch.bases.size(), std::vector<double>(n, 0.0));
  OofResult result;
  auto& book = result.bookkeeping;
  book.model_of_row.assign(n, 0);

  if (arch.oof == OofMode::InSample) {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    book.model_train_rows.push_back(all);
    for (std::size_t b = 0; b < arch.bases.size(); ++b) preds[b] = predict(fit(arch.bases[b].spec, x, y), x);
  } else {
    check_folds(folds, n);
    if (arch.oof_k != folds.size())
      throw Error(Errc::Config, "architecture expects " + std::to_string(arch.oof_k) + " folds, got " + std::to_string(folds.size()));
    for (std::size_t f = 0; f < folds.size(); ++f) {
      std::vector<std::size_t> train;
      for (std::size_t g = 0; g < folds.size(); ++g)
        if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
      std::sort(train.begin(), train.end());
      const DesignMatrix x_train = x.select_rows(train);
      const auto y_train = select(y, train);
      const DesignMatrix x_held = x.select_rows(folds[f]);
      for (std::size_t b = 0; b < arch.bases.size(); ++b) {
        const auto held = predict(fit(arch.bases[b].spec, x_train, y_train), x_held);
        for (std::size_t r = 0; r < folds[f].size(); ++r) preds[b][folds[f][r]] = held[r];
      }
      for (auto i : folds[f]) book.model_of_row[i] = f;
      book.model_train_rows.push_back(std::move(train));
    }
  }
  result.meta = assemble(arch, x, preds);
  if (!result.meta.data.all_finite()) throw Error(Errc::NonFinite, "base learners produced non-finite meta features");
  return result;
}

StackModel train_stack(const StackArchitecture& arch, const DesignMatrix& x, std::span<const double> y,
                       const std::vector<std::vector<std::size_t>>& folds) {
  auto oof = build_oof_matrix(arch, x, y, folds);
  TrainedRegressor meta = fit(arch.meta.spec, oof.meta, y);
  std::vector<TrainedRegressor> bases;
  for (const auto& b : arch.bases) bases.push_back(fit(b.spec, x, y));
  return StackModel(arch, x.columns, std::move(bases), std::move(meta), oof.meta.columns);
}

DesignMatrix stack_meta_features(const StackModel& model, const DesignMatrix& x) {
  if (x.columns != model.input_columns())
    throw Error(Errc::ColumnMismatch, "stack expects " + std::to_string(model.input_columns().size()) +
                                          " input columns in training order, got " + std::to_string(x.columns.size()));
  std::vector<std::vector<double>> preds;
  for (const auto& b : model.bases()) preds.push_back(predict(b, x));
  return assemble(model.architecture(), x, preds);
}

std::vector<double> predict_stack(const StackModel& model, const DesignMatrix& x) {
  if (x.rows() == 0) {
    if (x.columns != model.input_columns()) throw Error(Errc::ColumnMismatch, "stack input columns differ");
    return {};
  }
  return predict(model.meta(), stack_meta_features(model, x));
}

// --- persistence -----------------------------------------------------------------

nlohmann::json to_json(const StackArchitecture& arch) {
  using nlohmann::json;
  json bases = json::array();
  for (const auto& b : arch.bases) bases.push_back({{"name", b.name}, {"spec", to_json(b.spec)}});
  return json{{"bases", bases},
              {"meta", {{"name", arch.meta.name}, {"spec", to_json(arch.meta.spec)}}},
              {"meta_features", to_string(arch.meta_features)},
              {"oof", {{"mode", to_string(arch.oof)}, {"k", arch.oof_k}}}};
}

StackArchitecture stack_architecture_from_json(const nlohmann::json& doc) {
  StackArchitecture arch;
  for (const auto& b : doc.at("bases"))
    arch.bases.push_back({b.at("name").get<std::string>(), learner_spec_from_json(b.at("spec"))});
  arch.meta = {doc.at("meta").at("name").get<std::string>(), learner_spec_from_json(doc.at("meta").at("spec"))};
  arch.meta_features = parse_meta_features(doc.at("meta_features").get<std::string>());
  arch.oof = parse_oof_mode(doc.at("oof").at("mode").get<std::string>());
  arch.oof_k = doc.at("oof").at("k").get<std::size_t>();
  return arch;
}

nlohmann::json to_json(const StackModel& model) {
  using nlohmann::json;
  json bases = json::array();
  for (const auto& b : model.bases()) bases.push_back(to_json(b));
  return json{{"format", "phosml.stack"},
              {"format_version", kStackFormatVersion},
              {"architecture", to_json(model.architecture())},
              {"input_columns", model.input_columns()},
              {"meta_columns", model.meta_columns()},
              {"bases", bases},
              {"meta", to_json(model.meta())}};
}

StackModel stack_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "phosml.stack") throw Error(Errc::Parse, "not a stack document");
    const int version = doc.at("format_version").get<int>();
    if (version != kStackFormatVersion)
      throw Error(Errc::VersionMismatch, "stack format_version " + std::to_string(version) + ", expected " +
                                             std::to_string(kStackFormatVersion));
    auto arch = stack_architecture_from_json(doc.at("architecture"));
    std::vector<TrainedRegressor> bases;
    for (const auto& b : doc.at("bases")) bases.push_back(regressor_from_json(b));
    if (bases.size() != arch.bases.size()) throw Error(Errc::Parse, "stack document base count mismatch");
    return StackModel(std::move(arch), doc.at("input_columns").get<std::vector<std::string>>(), std::move(bases),
                      regressor_from_json(doc.at("meta")), doc.at("meta_columns").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Parse, std::string("stack document: ") + e.what());
  }
}

}  // namespace phosml
