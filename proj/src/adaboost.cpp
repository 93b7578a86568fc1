#include <algorithm>
#include <cmath>
#include <numeric>

#include "phosml/learners.hpp"

namespace phosml {

double weighted_median(std::span<const double> values, std::span<const double> weights) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double cumulative = 0.0;
  for (auto i : order) {
    cumulative += weights[i];
    if (cumulative >= 0.5 * total) return values[i];
  }
  return values[order.back()];
}

// AdaBoost.R2 (Drucker 1997): trees are fitted on weighted bootstrap draws,
// per-sample losses are scaled by the largest training error, and sample
// weights shrink by beta^(1 - L_i) for well-predicted samples.
AdaModel train_adaboost(const Matrix& x, std::span<const double> y, const AdaParams& p, std::uint64_t seed) {
  const std::size_t n = x.rows();
  AdaModel model;
  std::vector<double> sample_w(n, 1.0 / static_cast<double>(n));
  std::vector<std::vector<double>> gains;

  TreeOptions opts;
  opts.max_depth = p.max_depth;

  std::vector<double> cdf(n), loss(n);
  for (std::size_t t = 0; t < p.n_estimators; ++t) {
    Rng rng(derive_seed(seed, t));
    std::partial_sum(sample_w.begin(), sample_w.end(), cdf.begin());
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) {
      const double u = rng.uniform01() * cdf.back();
      auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      r = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), n - 1);
    }
    auto grown = grow_tree(x, y, std::move(rows), opts);

    double max_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      loss[i] = std::abs(grown.tree.predict(x.row(i)) - y[i]);
      max_err = std::max(max_err, loss[i]);
    }
    if (max_err > 0)
      for (auto& l : loss) {
        l /= max_err;
        if (p.loss == AdaLoss::Square) l = l * l;
        else if (p.loss == AdaLoss::Exponential) l = 1.0 - std::exp(-l);
      }
    double avg_loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) avg_loss += sample_w[i] * loss[i];

    if (avg_loss <= 0.0) {
      model.trees.push_back(std::move(grown.tree));
      model.weights.push_back(1.0);
      gains.push_back(std::move(grown.gain_by_feature));
      break;
    }
    if (avg_loss >= 0.5) {
      // A lone first estimator is kept so the ensemble is never empty.
      if (model.trees.empty()) {
        model.trees.push_back(std::move(grown.tree));
        model.weights.push_back(1.0);
        gains.push_back(std::move(grown.gain_by_feature));
      }
      break;
    }
    const double beta = avg_loss / (1.0 - avg_loss);
    model.trees.push_back(std::move(grown.tree));
    model.weights.push_back(p.learning_rate * std::log(1.0 / beta));
    gains.push_back(std::move(grown.gain_by_feature));

    if (t + 1 == p.n_estimators) break;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sample_w[i] *= std::pow(beta, (1.0 - loss[i]) * p.learning_rate);
      total += sample_w[i];
    }
    if (!(total > 0)) break;
    for (auto& w : sample_w) w /= total;
  }

  model.importance.assign(x.cols(), 0.0);
  const double weight_total = std::accumulate(model.weights.begin(), model.weights.end(), 0.0);
  for (std::size_t t = 0; t < gains.size(); ++t) {
    const double g = std::accumulate(gains[t].begin(), gains[t].end(), 0.0);
    if (!(g > 0) || !(weight_total > 0)) continue;
    for (std::size_t j = 0; j < x.cols(); ++j) model.importance[j] += model.weights[t] / weight_total * gains[t][j] / g;
  }
  return model;
}

std::vector<double> predict_adaboost(const AdaModel& m, const Matrix& x) {
  std::vector<double> out(x.rows());
  std::vector<double> preds(m.trees.size());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t t = 0; t < m.trees.size(); ++t) preds[t] = m.trees[t].predict(x.row(i));
    out[i] = weighted_median(preds, m.weights);
  }
  return out;
}

}  // namespace phosml
