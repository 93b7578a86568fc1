#include "phosml/tree.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <utility>

namespace phosml {

double Tree::predict(std::span<const double> row) const noexcept {
  int i = 0;
  while (nodes[i].feature >= 0) i = row[nodes[i].feature] <= nodes[i].threshold ? nodes[i].left : nodes[i].right;
  return nodes[i].value;
}

std::size_t Tree::leaf_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.feature < 0; }));
}

std::size_t Tree::depth() const noexcept {
  std::vector<std::size_t> d(nodes.size(), 0);
  std::size_t best = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].feature < 0) continue;
    d[nodes[i].left] = d[nodes[i].right] = d[i] + 1;
    best = std::max(best, d[i] + 1);
  }
  return best;
}

void Tree::scale_values(double factor) noexcept {
  for (auto& n : nodes) n.value *= factor;
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

struct OpenNode {
  int id;
  std::size_t depth;
  std::vector<std::size_t> rows;
  Split split;
};

class Grower {
 public:
  Grower(const Matrix& x, std::span<const double> target, const TreeOptions& options, Rng* rng)
      : x_(x), target_(target), options_(options), rng_(rng), gains_(x.cols(), 0.0) {}

  GrownTree run(std::vector<std::size_t> rows) {
    Tree tree;
    tree.nodes.push_back(make_leaf(rows));
    std::deque<OpenNode> open;
    open.push_back(evaluate(0, 0, std::move(rows)));
    std::size_t leaves = 1;

    while (!open.empty()) {
      if (options_.max_leaves > 0 && leaves >= options_.max_leaves) break;
      auto pick = open.begin();
      if (options_.max_leaves > 0) {
        for (auto it = open.begin(); it != open.end(); ++it)
          if (it->split.gain > pick->split.gain) pick = it;
      }
      OpenNode node = std::move(*pick);
      open.erase(pick);
      if (node.split.feature < 0) continue;

      std::vector<std::size_t> left, right;
      for (auto r : node.rows)
        (x_(r, node.split.feature) <= node.split.threshold ? left : right).push_back(r);

      const int left_id = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(make_leaf(left));
      const int right_id = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back(make_leaf(right));
      auto& parent = tree.nodes[node.id];
      parent.feature = node.split.feature;
      parent.threshold = node.split.threshold;
      parent.left = left_id;
      parent.right = right_id;
      gains_[node.split.feature] += node.split.gain;
      ++leaves;

      open.push_back(evaluate(left_id, node.depth + 1, std::move(left)));
      open.push_back(evaluate(right_id, node.depth + 1, std::move(right)));
    }
    return GrownTree{std::move(tree), std::move(gains_)};
  }

 private:
  // Sums run over sorted targets so that results do not depend on row order.
  double canonical_sum(const std::vector<std::size_t>& rows) {
    sorted_.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) sorted_[i] = target_[rows[i]];
    std::sort(sorted_.begin(), sorted_.end());
    double sum = 0.0;
    for (double t : sorted_) sum += t;
    return sum;
  }

  TreeNode make_leaf(const std::vector<std::size_t>& rows) {
    const double sum = canonical_sum(rows);
    TreeNode leaf;
    const double denom = static_cast<double>(rows.size()) + options_.l2;
    leaf.value = denom > 0 ? sum / denom : 0.0;
    return leaf;
  }

  OpenNode evaluate(int id, std::size_t depth, std::vector<std::size_t> rows) {
    OpenNode node{id, depth, std::move(rows), {}};
    const std::size_t n = node.rows.size();
    if (options_.max_depth > 0 && depth >= options_.max_depth) return node;
    if (n < 2 * options_.min_samples_leaf || n < 2) return node;

    const double sum = canonical_sum(node.rows);
    if (sorted_.front() == sorted_.back()) return node;
    const double mean = sum / static_cast<double>(n);
    double sse = 0.0;
    for (double t : sorted_) sse += (t - mean) * (t - mean);
    const double min_gain = 1e-12 * sse;

    // Unregularized gains are computed on node-centred targets.
    const double shift = options_.l2 == 0.0 ? mean : 0.0;

    for (auto feature : candidate_features()) {
      order_.resize(n);
      for (std::size_t i = 0; i < n; ++i) order_[i] = {x_(node.rows[i], feature), target_[node.rows[i]] - shift};
      std::sort(order_.begin(), order_.end());
      double total = 0.0;
      for (const auto& o : order_) total += o.second;
      const double parent_score = total * total / (static_cast<double>(n) + options_.l2);
      double left_sum = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_sum += order_[i].second;
        const std::size_t n_left = i + 1, n_right = n - n_left;
        if (order_[i].first == order_[i + 1].first) continue;
        if (n_left < options_.min_samples_leaf || n_right < options_.min_samples_leaf) continue;
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / (static_cast<double>(n_left) + options_.l2) +
                            right_sum * right_sum / (static_cast<double>(n_right) + options_.l2) - parent_score;
        if (gain > node.split.gain && gain > min_gain) {
          const double lo_v = order_[i].first, hi_v = order_[i + 1].first;
          double threshold = 0.5 * (lo_v + hi_v);
          if (!(threshold < hi_v)) threshold = lo_v;
          node.split = Split{static_cast<int>(feature), threshold, gain};
        }
      }
    }
    return node;
  }

  std::vector<std::size_t> candidate_features() {
    const std::size_t d = x_.cols();
    if (options_.max_features_fraction >= 1.0 || rng_ == nullptr) {
      std::vector<std::size_t> all(d);
      for (std::size_t j = 0; j < d; ++j) all[j] = j;
      return all;
    }
    const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(options_.max_features_fraction * static_cast<double>(d)));
    return rng_->sample_without_replacement(d, m);
  }

  const Matrix& x_;
  std::span<const double> target_;
  const TreeOptions& options_;
  Rng* rng_;
  std::vector<double> gains_;
  std::vector<double> sorted_;
  std::vector<std::pair<double, double>> order_;
};

}  // namespace

GrownTree grow_tree(const Matrix& x, std::span<const double> target, std::vector<std::size_t> rows,
                    const TreeOptions& options, Rng* rng) {
  return Grower(x, target, options, rng).run(std::move(rows));
}

}  // namespace phosml
