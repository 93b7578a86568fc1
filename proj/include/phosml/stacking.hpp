#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "phosml/dataset.hpp"
#include "phosml/learners.hpp"

namespace phosml {

enum class MetaFeatures { BasePredictionsOnly, FeaturesPlusBasePredictions };
enum class OofMode { OutOfFold, InSample };

struct NamedSpec {
  std::string name;
  LearnerSpec spec;
};

struct StackArchitecture {
  std::vector<NamedSpec> bases;
  NamedSpec meta;
  MetaFeatures meta_features = MetaFeatures::FeaturesPlusBasePredictions;
  OofMode oof = OofMode::OutOfFold;
  std::size_t oof_k = 10;
};

// Learners by report label, with project-default parameters:
// KNN-Uniform, KNN-Distance, SVR, KRR, RF, GBM (leaf-wise), GBM-LevelWise,
// AdaBoost, CART.
NamedSpec default_learner(const std::string& label, std::uint64_t seed);
// Single-learner comparison roster per target (GBM-LevelWise only for kr/plqy).
std::vector<std::string> roster_labels(TargetKind target);
// Meta-learner candidates compared for each target's stack.
std::vector<std::string> meta_candidate_labels(TargetKind target);

// Wavelength: GBM base, SVR meta on features + prediction.
// Kr: AdaBoost, GBM, RF, GBM-LevelWise bases, distance-weighted KNN meta on
// the four predictions only.
// Plqy: RF base, RF meta on features + prediction.
StackArchitecture stack_preset(TargetKind target, std::uint64_t seed);

std::string to_string(MetaFeatures m);
std::string to_string(OofMode m);
MetaFeatures parse_meta_features(const std::string& text);
OofMode parse_oof_mode(const std::string& text);

// Which fitted base model produced each row's meta feature, and what that
// model was trained on. In InSample mode there is a single model (index 0)
// trained on every row.
struct OofBookkeeping {
  std::vector<std::vector<std::size_t>> model_train_rows;
  std::vector<std::size_t> model_of_row;
};

struct OofResult {
  DesignMatrix meta;
  OofBookkeeping bookkeeping;
};

std::string prediction_column(const std::string& base_name);

// Meta-feature matrix: entry (i, b) is base b's prediction for row i from a
// model trained without row i's fold (OutOfFold) or on all rows (InSample).
// `folds` are positions into the rows of x and must partition them.
OofResult build_oof_matrix(const StackArchitecture& arch, const DesignMatrix& x, std::span<const double> y,
                           const std::vector<std::vector<std::size_t>>& folds);

class StackModel {
 public:
  StackModel(StackArchitecture arch, std::vector<std::string> input_columns, std::vector<TrainedRegressor> bases,
             TrainedRegressor meta, std::vector<std::string> meta_columns)
      : arch_(std::move(arch)), input_columns_(std::move(input_columns)), bases_(std::move(bases)),
        meta_(std::move(meta)), meta_columns_(std::move(meta_columns)) {}

  const StackArchitecture& architecture() const noexcept { return arch_; }
  const std::vector<std::string>& input_columns() const noexcept { return input_columns_; }
  const std::vector<TrainedRegressor>& bases() const noexcept { return bases_; }
  const TrainedRegressor& meta() const noexcept { return meta_; }
  const std::vector<std::string>& meta_columns() const noexcept { return meta_columns_; }

 private:
  StackArchitecture arch_;
  std::vector<std::string> input_columns_;
  std::vector<TrainedRegressor> bases_;
  TrainedRegressor meta_;
  std::vector<std::string> meta_columns_;
};

// Fits the meta learner on the OOF matrix, then refits every base on all
// rows for inference.
StackModel train_stack(const StackArchitecture& arch, const DesignMatrix& x, std::span<const double> y,
                       const std::vector<std::vector<std::size_t>>& folds);

// Meta features for new rows from the full-data bases.
DesignMatrix stack_meta_features(const StackModel& model, const DesignMatrix& x);
std::vector<double> predict_stack(const StackModel& model, const DesignMatrix& x);

inline constexpr int kStackFormatVersion = 1;
nlohmann::json to_json(const StackArchitecture& arch);
StackArchitecture stack_architecture_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const StackModel& model);
StackModel stack_from_json(const nlohmann::json& doc);

}  // namespace phosml
