#include <algorithm>
#include <cmath>
#include <numeric>

#include "phosml/learners.hpp"

namespace phosml {

namespace {

double mse(std::span<const double> y, std::span<const double> f) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += (y[i] - f[i]) * (y[i] - f[i]);
  return s / static_cast<double>(y.size());
}

}  // namespace

// Stagewise least-squares boosting: each round fits a tree to the current
// residuals, with leaf values sum / (count + l2_leaf_reg) shrunk by the
// learning rate. With learning_rate <= 1 and no subsampling the training
// squared error cannot increase from one round to the next.
GbmModel train_gbm(const Matrix& x, std::span<const double> y, const GbmParams& p, bool leaf_wise, std::uint64_t seed) {
  const std::size_t n = x.rows();
  GbmModel model;
  model.base_score = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  model.importance.assign(x.cols(), 0.0);

  TreeOptions opts;
  opts.max_depth = p.max_depth;
  opts.min_samples_leaf = p.min_samples_leaf;
  opts.max_leaves = leaf_wise ? p.max_leaves : 0;
  opts.l2 = p.l2_leaf_reg;

  std::vector<double> f(n, model.base_score);
  std::vector<double> residual(n);
  model.train_mse.push_back(mse(y, f));
  const auto bag = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(p.subsample_fraction * static_cast<double>(n))));

  for (std::size_t round = 0; round < p.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - f[i];
    std::vector<std::size_t> rows;
    if (bag < n) {
      Rng rng(derive_seed(seed, round));
      rows = rng.sample_without_replacement(n, bag);
    } else {
      rows.resize(n);
      std::iota(rows.begin(), rows.end(), std::size_t{0});
    }
    auto grown = grow_tree(x, residual, std::move(rows), opts);
    grown.tree.scale_values(p.learning_rate);
    for (std::size_t j = 0; j < x.cols(); ++j) model.importance[j] += grown.gain_by_feature[j];
    for (std::size_t i = 0; i < n; ++i) f[i] += grown.tree.predict(x.row(i));
    model.trees.push_back(std::move(grown.tree));
    model.train_mse.push_back(mse(y, f));
  }
  return model;
}

std::vector<double> predict_gbm(const GbmModel& m, const Matrix& x) {
  std::vector<double> out(x.rows(), m.base_score);
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (const auto& t : m.trees) out[i] += t.predict(x.row(i));
  return out;
}

}  // namespace phosml
