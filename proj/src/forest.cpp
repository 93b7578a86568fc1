#include <numeric>

#include "phosml/error.hpp"
#include "phosml/kernels.hpp"
#include "phosml/learners.hpp"

namespace phosml {

namespace {

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

std::vector<double> normalized(const std::vector<double>& v) {
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  std::vector<double> out(v.size(), 0.0);
  if (total > 0)
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / total;
  return out;
}

}  // namespace

CartModel train_cart(const Matrix& x, std::span<const double> y, const CartParams& p) {
  TreeOptions opts;
  opts.max_depth = p.max_depth;
  opts.min_samples_leaf = p.min_samples_leaf;
  auto grown = grow_tree(x, y, all_rows(x.rows()), opts);
  return CartModel{std::move(grown.tree), std::move(grown.gain_by_feature)};
}

ForestModel train_forest(const Matrix& x, std::span<const double> y, const ForestParams& p, std::uint64_t seed,
                         bool parallel) {
  const std::size_t n = x.rows();
  TreeOptions opts;
  opts.max_depth = p.max_depth;
  opts.min_samples_leaf = p.min_samples_leaf;
  opts.max_features_fraction = p.max_features_fraction;

  std::vector<GrownTree> grown(p.n_trees);
  const auto n_trees = static_cast<std::ptrdiff_t>(p.n_trees);
  // Tree t draws from its own stream, so the forest does not depend on the schedule.
#pragma omp parallel for schedule(dynamic) if (parallel) num_threads(kernels::thread_count())
  for (std::ptrdiff_t t = 0; t < n_trees; ++t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    std::vector<std::size_t> rows;
    if (p.bootstrap) {
      rows.resize(n);
      for (auto& r : rows) r = static_cast<std::size_t>(rng.below(n));
    } else {
      rows = all_rows(n);
    }
    grown[t] = grow_tree(x, y, std::move(rows), opts, &rng);
  }

  ForestModel model;
  model.importance.assign(x.cols(), 0.0);
  for (auto& g : grown) {
    const auto w = normalized(g.gain_by_feature);
    for (std::size_t j = 0; j < w.size(); ++j) model.importance[j] += w[j] / static_cast<double>(p.n_trees);
    model.trees.push_back(std::move(g.tree));
  }
  return model;
}

std::vector<double> predict_forest(const ForestModel& m, const Matrix& x, bool parallel) {
  std::vector<double> out(x.rows(), 0.0);
  const auto rows = static_cast<std::ptrdiff_t>(x.rows());
  const double count = static_cast<double>(m.trees.size());
#pragma omp parallel for schedule(static) if (parallel) num_threads(kernels::thread_count())
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    double sum = 0.0;
    for (const auto& t : m.trees) sum += t.predict(x.row(i));
    out[i] = sum / count;
  }
  return out;
}

}  // namespace phosml
