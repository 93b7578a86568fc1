#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "phosml/matrix.hpp"
#include "phosml/rng.hpp"

namespace phosml {

// Node table entry. Leaves have feature == -1 and left == right == -1;
// internal nodes send x[feature] <= threshold to the left child.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct Tree {
  std::vector<TreeNode> nodes;

  double predict(std::span<const double> row) const noexcept;
  std::size_t leaf_count() const noexcept;
  std::size_t depth() const noexcept;
  void scale_values(double factor) noexcept;

  friend bool operator==(const Tree&, const Tree&) = default;
};

struct TreeOptions {
  std::size_t max_depth = 0;         // 0 = unlimited
  std::size_t min_samples_leaf = 1;
  std::size_t max_leaves = 0;        // 0 = unlimited; > 0 switches to best-first growth
  double l2 = 0.0;                   // leaf value = sum / (count + l2)
  double max_features_fraction = 1.0;
};

struct GrownTree {
  Tree tree;
  std::vector<double> gain_by_feature;  // summed split gains, length = x.cols()
};

// Greedy least-squares regression tree over the multiset `rows` of x.
// Split gain is G_L^2/(n_L+l2) + G_R^2/(n_R+l2) - G^2/(n+l2), which for l2 = 0
// is the decrease in squared error. Candidate thresholds are midpoints
// between consecutive distinct values; ties go to the lowest feature index,
// then the lowest threshold. Without a leaf limit, nodes are expanded level
// by level; with one, the open leaf with the largest gain is expanded next.
// `rng` is consulted only when max_features_fraction < 1.
GrownTree grow_tree(const Matrix& x, std::span<const double> target, std::vector<std::size_t> rows,
                    const TreeOptions& options, Rng* rng = nullptr);

}  // namespace phosml
