#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "phosml/matrix.hpp"

namespace phosml {

struct SplitPlan {
  std::vector<std::size_t> train_indices;  // dataset rows, in selection order
  std::vector<std::size_t> test_indices;   // dataset rows, ascending
  // folds[f] holds positions into train_indices (not dataset rows).
  std::vector<std::vector<std::size_t>> folds;

  friend bool operator==(const SplitPlan&, const SplitPlan&) = default;
};

struct SpxyOptions {
  bool standardize = true;  // z-score the feature columns before d_x
};

// Combined SPXY metric: d_x / max d_x + d_y / max d_y, with d_x Euclidean
// over (optionally standardized) rows and d_y = |y_p - y_q|. A term whose
// maximum is zero contributes nothing.
Matrix spxy_distances(const Matrix& x, std::span<const double> y, SpxyOptions options = {});

// Kennard-Stone selection under the SPXY metric. The training set starts
// with the farthest pair (smallest (p, q) on ties) and grows by repeatedly
// taking the candidate whose nearest selected sample is farthest away
// (lowest index on ties). |train| = round(train_fraction * N).
SplitPlan spxy_split(const Matrix& x, std::span<const double> y, double train_fraction, SpxyOptions options = {});

// Shuffles the training positions with Rng(seed) and deals them round-robin
// into k folds; each fold is stored ascending.
SplitPlan kfold_assign(SplitPlan plan, std::size_t k, std::uint64_t seed);

nlohmann::json to_json(const SplitPlan& plan);
SplitPlan split_plan_from_json(const nlohmann::json& doc);

}  // namespace phosml
