#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "phosml/dataset.hpp"
#include "phosml/learners.hpp"
#include "phosml/metrics.hpp"
#include "phosml/rng.hpp"

namespace phosml {

struct Distribution {
  enum class Kind { Uniform, LogUniform, IntUniform, Choice };
  Kind kind = Kind::Uniform;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<ParamValue> values;  // Choice only

  static Distribution uniform(double lo, double hi);
  static Distribution log_uniform(double lo, double hi);
  static Distribution int_uniform(double lo, double hi);  // inclusive bounds
  static Distribution choice(std::vector<ParamValue> values);

  ParamValue draw(Rng& rng) const;
};

// Parameters are drawn in name order.
using SearchSpace = std::map<std::string, Distribution>;

// Project-default spaces by report label (see default_learner); these are
// starting points for the search, not recovered published settings.
SearchSpace default_search_space(const std::string& label);

nlohmann::json to_json(const Distribution& d);
Distribution distribution_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SearchSpace& space);
SearchSpace search_space_from_json(const nlohmann::json& j);

struct TrialRecord {
  std::size_t index = 0;
  ParamMap params;  // sampled values only
  bool ok = false;
  std::string error;
  std::vector<FoldScore> folds;
  MeanStd mae;
  MeanStd rmse;
  MeanStd r2;
  std::size_t rank = 0;  // 1 = best; 0 for failed trials
};

struct SearchResult {
  TrialRecord best;
  std::vector<TrialRecord> trials;
};

// Scores `spec` with its params overlaid by each sample using k-fold CV over
// `folds` (positions into x's rows). Trial t draws from Rng(derive_seed(seed, t)),
// so a larger budget extends, and never changes, the trial sequence.
// Best = lowest mean RMSE, then lowest mean MAE, then earliest trial.
// Learner errors fail the trial, not the search; if every trial fails the
// first trial's error is rethrown.
SearchResult random_search(const LearnerSpec& spec, const SearchSpace& space, std::size_t budget, const DesignMatrix& x,
                           std::span<const double> y, const std::vector<std::vector<std::size_t>>& folds,
                           std::uint64_t seed, bool parallel = true);

// Held-out predictions of `spec` for each fold, trained on the other folds.
std::vector<FoldPrediction> cross_validate(const LearnerSpec& spec, const DesignMatrix& x, std::span<const double> y,
                                           const std::vector<std::vector<std::size_t>>& folds);

// One row per trial: params flattened, per-fold scores, means, rank.
std::string trials_csv(const SearchResult& result);

}  // namespace phosml
