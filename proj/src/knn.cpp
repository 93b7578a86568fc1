#include <algorithm>
#include <cmath>
#include <numeric>

#include "phosml/kernels.hpp"
#include "phosml/learners.hpp"

namespace phosml {

namespace {

ScalerStats scaler_for(const Matrix& x) {
  if (x.rows() >= 2) return fit_scaler(x);
  ScalerStats s{std::vector<double>(x.cols(), 0.0), std::vector<double>(x.cols(), 1.0)};
  if (x.rows() == 1)
    for (std::size_t c = 0; c < x.cols(); ++c) s.mean[c] = x(0, c);
  return s;
}

}  // namespace

KnnModel train_knn(const Matrix& x, std::span<const double> y, const KnnParams& p, bool distance_weighted) {
  KnnModel m;
  m.scaler = scaler_for(x);
  m.train = apply_scaler(x, m.scaler);
  m.y.assign(y.begin(), y.end());
  m.k = p.k;
  m.distance_weighted = distance_weighted;
  return m;
}

std::vector<double> predict_knn(const KnnModel& m, const Matrix& x) {
  constexpr double kDistanceFloor = 1e-12;
  const Matrix queries = apply_scaler(x, m.scaler);
  const Matrix d2 = kernels::cross_squared_distances(queries, m.train);
  const std::size_t n = m.train.rows();
  const std::size_t k = std::min(m.k, n);
  std::vector<double> out(x.rows());
  std::vector<std::size_t> order(n);
  for (std::size_t q = 0; q < x.rows(); ++q) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    // nearest first; equal distances resolved by training index
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) { return d2(q, a) < d2(q, b) || (d2(q, a) == d2(q, b) && a < b); });
    if (!m.distance_weighted) {
      double sum = 0.0;
      for (std::size_t i = 0; i < k; ++i) sum += m.y[order[i]];
      out[q] = sum / static_cast<double>(k);
    } else {
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < k; ++i) {
        const double w = 1.0 / (std::sqrt(d2(q, order[i])) + kDistanceFloor);
        num += w * m.y[order[i]];
        den += w;
      }
      out[q] = num / den;
    }
  }
  return out;
}

}  // namespace phosml
