#pragma once

// Independent reference implementations used as test oracles. They share no
// code with the library beyond the Matrix container.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "phosml/matrix.hpp"

namespace oracle {

// z-score with population std; zero-variance columns centred only.
inline phosml::Matrix standardize(const phosml::Matrix& x, const phosml::Matrix& reference) {
  const std::size_t n = reference.rows(), d = reference.cols();
  phosml::Matrix out(x.rows(), d);
  for (std::size_t c = 0; c < d; ++c) {
    double sum = 0.0;
    bool constant = true;
    for (std::size_t r = 0; r < n; ++r) {
      sum += reference(r, c);
      constant = constant && reference(r, c) == reference(0, c);
    }
    double mean = sum / static_cast<double>(n), sd = 1.0;
    if (constant) {
      mean = reference(0, c);
    } else {
      double ss = 0.0;
      for (std::size_t r = 0; r < n; ++r) ss += (reference(r, c) - mean) * (reference(r, c) - mean);
      sd = std::sqrt(ss / static_cast<double>(n));
    }
    for (std::size_t r = 0; r < x.rows(); ++r) out(r, c) = (x(r, c) - mean) / sd;
  }
  return out;
}

// Full sort of all training points by (distance, index); no partial sort.
inline std::vector<double> knn(const phosml::Matrix& train, const std::vector<double>& y, const phosml::Matrix& query,
                               std::size_t k, bool distance_weighted) {
  const auto t = standardize(train, train);
  const auto q = standardize(query, train);
  std::vector<double> out;
  for (std::size_t i = 0; i < q.rows(); ++i) {
    std::vector<std::pair<double, std::size_t>> d;
    for (std::size_t j = 0; j < t.rows(); ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < t.cols(); ++c) s += (q(i, c) - t(j, c)) * (q(i, c) - t(j, c));
      d.emplace_back(s, j);
    }
    std::sort(d.begin(), d.end());
    double num = 0.0, den = 0.0;
    for (std::size_t m = 0; m < std::min(k, d.size()); ++m) {
      const double w = distance_weighted ? 1.0 / (std::sqrt(d[m].first) + 1e-12) : 1.0;
      num += distance_weighted ? w * y[d[m].second] : y[d[m].second];
      den += w;
    }
    out.push_back(num / den);
  }
  return out;
}

// Dense solve of (K + alpha I) a = y - mean(y) with a pivoted QR.
inline std::vector<double> krr_rbf(const phosml::Matrix& train, const std::vector<double>& y, const phosml::Matrix& query,
                                   double alpha, double gamma) {
  const auto t = standardize(train, train);
  const auto q = standardize(query, train);
  const auto n = static_cast<Eigen::Index>(t.rows());
  auto kernel = [&](const phosml::Matrix& a, std::size_t i, std::size_t j) {
    double s = 0.0;
    for (std::size_t c = 0; c < t.cols(); ++c) s += (a(i, c) - t(j, c)) * (a(i, c) - t(j, c));
    return std::exp(-gamma * s);
  };
  Eigen::MatrixXd k(n, n);
  Eigen::VectorXd rhs(n);
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    rhs(i) = y[static_cast<std::size_t>(i)] - mean;
    for (Eigen::Index j = 0; j < n; ++j)
      k(i, j) = kernel(t, static_cast<std::size_t>(i), static_cast<std::size_t>(j)) + (i == j ? alpha : 0.0);
  }
  const Eigen::VectorXd a = k.fullPivHouseholderQr().solve(rhs);
  std::vector<double> out;
  for (std::size_t i = 0; i < q.rows(); ++i) {
    double s = mean;
    for (Eigen::Index j = 0; j < n; ++j) s += a(j) * kernel(q, i, static_cast<std::size_t>(j));
    out.push_back(s);
  }
  return out;
}

// Kennard-Stone under the SPXY metric by direct enumeration: every pair is
// visited in lexicographic order for the seed, every candidate against every
// selected point for each later pick; strict improvement keeps the first.
inline std::vector<std::size_t> spxy(const phosml::Matrix& x_raw, const std::vector<double>& y, std::size_t n_train,
                                     bool standardized) {
  const std::size_t n = x_raw.rows();
  const auto x = standardized ? standardize(x_raw, x_raw) : x_raw;
  std::vector<std::vector<double>> dx(n, std::vector<double>(n)), dy(n, std::vector<double>(n));
  double mx = 0.0, my = 0.0;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q) {
      double s = 0.0;
      for (std::size_t c = 0; c < x.cols(); ++c) s += (x(p, c) - x(q, c)) * (x(p, c) - x(q, c));
      dx[p][q] = std::sqrt(s);
      dy[p][q] = std::abs(y[p] - y[q]);
      mx = std::max(mx, dx[p][q]);
      my = std::max(my, dy[p][q]);
    }
  auto d = [&](std::size_t p, std::size_t q) { return (mx > 0 ? dx[p][q] / mx : 0.0) + (my > 0 ? dy[p][q] / my : 0.0); };
  std::size_t bp = 0, bq = 1;
  double best = -1.0;
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q)
      if (d(p, q) > best) {
        best = d(p, q);
        bp = p;
        bq = q;
      }
  std::vector<std::size_t> sel{bp};
  if (n_train >= 2) sel.push_back(bq);
  while (sel.size() < n_train) {
    std::size_t pick = n;
    double pick_val = -1.0;
    for (std::size_t c = 0; c < n; ++c) {
      if (std::find(sel.begin(), sel.end(), c) != sel.end()) continue;
      double m = std::numeric_limits<double>::infinity();
      for (auto s : sel) m = std::min(m, d(c, s));
      if (m > pick_val) {
        pick_val = m;
        pick = c;
      }
    }
    sel.push_back(pick);
  }
  return sel;
}

// k_r from the radiative-rate formula with constants typed in directly.
inline long double kr(long double wavelength_nm, long double f) {
  const long double pi = 3.141592653589793238462643383279502884L;
  const long double e = 1.602176634e-19L, eps0 = 8.8541878128e-12L, me = 9.1093837015e-31L, c = 299792458.0L;
  const long double nu = c / (wavelength_nm * 1e-9L);
  return 2.0L * pi * nu * nu * e * e / (eps0 * me * c * c * c) * f;
}

}  // namespace oracle
