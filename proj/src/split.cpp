#include "phosml/split.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "phosml/dataset.hpp"
#include "phosml/error.hpp"
#include "phosml/kernels.hpp"
#include "phosml/rng.hpp"

namespace phosml {

Matrix spxy_distances(const Matrix& x, std::span<const double> y, SpxyOptions options) {
  const std::size_t n = x.rows();
  if (y.size() != n) throw Error(Errc::LengthMismatch, "spxy: X has " + std::to_string(n) + " rows, y has " + std::to_string(y.size()));
  Matrix dx = kernels::pairwise_distances(options.standardize && n >= 2 ? apply_scaler(x, fit_scaler(x)) : x);

  double max_dx = 0.0, max_dy = 0.0;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q) {
      max_dx = std::max(max_dx, dx(p, q));
      max_dy = std::max(max_dy, std::abs(y[p] - y[q]));
    }

  Matrix d(n, n);
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q) {
      double v = 0.0;
      if (max_dx > 0) v += dx(p, q) / max_dx;
      if (max_dy > 0) v += std::abs(y[p] - y[q]) / max_dy;
      d(p, q) = v;
      d(q, p) = v;
    }
  return d;
}

SplitPlan spxy_split(const Matrix& x, std::span<const double> y, double train_fraction, SpxyOptions options) {
  const std::size_t n = x.rows();
  if (!(train_fraction > 0 && train_fraction < 1))
    throw Error(Errc::InvalidParam, "train_fraction must lie in (0, 1)");
  if (n < 2) throw Error(Errc::TooFewSamples, "SPXY needs at least 2 samples, got " + std::to_string(n));
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  if (n_train < 1 || n_train > n)
    throw Error(Errc::TooFewSamples, "train_fraction " + std::to_string(train_fraction) + " selects no training samples");

  const Matrix d = spxy_distances(x, y, options);

  std::size_t best_p = 0, best_q = 1;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q)
      if (d(p, q) > d(best_p, best_q)) {
        best_p = p;
        best_q = q;
      }

  SplitPlan plan;
  std::vector<bool> taken(n, false);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  auto take = [&](std::size_t i) {
    plan.train_indices.push_back(i);
    taken[i] = true;
    for (std::size_t j = 0; j < n; ++j) nearest[j] = std::min(nearest[j], d(i, j));
  };
  take(best_p);
  if (n_train >= 2) take(best_q);

  while (plan.train_indices.size() < n_train) {
    std::size_t pick = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (taken[j]) continue;
      if (pick == n || nearest[j] > nearest[pick]) pick = j;
    }
    take(pick);
  }
  for (std::size_t j = 0; j < n; ++j)
    if (!taken[j]) plan.test_indices.push_back(j);
  return plan;
}

SplitPlan kfold_assign(SplitPlan plan, std::size_t k, std::uint64_t seed) {
  const std::size_t m = plan.train_indices.size();
  if (k == 0) throw Error(Errc::InvalidParam, "k must be positive");
  if (k > m) throw Error(Errc::KTooLarge, "k = " + std::to_string(k) + " exceeds " + std::to_string(m) + " training samples");
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  plan.folds.assign(k, {});
  for (std::size_t t = 0; t < m; ++t) plan.folds[t % k].push_back(order[t]);
  for (auto& fold : plan.folds) std::sort(fold.begin(), fold.end());
  return plan;
}

nlohmann::json to_json(const SplitPlan& plan) {
  return nlohmann::json{{"train_indices", plan.train_indices},
                        {"test_indices", plan.test_indices},
                        {"folds", plan.folds}};
}

SplitPlan split_plan_from_json(const nlohmann::json& doc) {
  try {
    SplitPlan plan;
    plan.train_indices = doc.at("train_indices").get<std::vector<std::size_t>>();
    plan.test_indices = doc.at("test_indices").get<std::vector<std::size_t>>();
    if (doc.contains("folds")) plan.folds = doc.at("folds").get<std::vector<std::vector<std::size_t>>>();
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Parse, std::string("split plan: ") + e.what());
  }
}

}  // namespace phosml
