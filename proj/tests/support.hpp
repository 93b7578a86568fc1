#pragma once

#include <string>
#include <vector>

#include "phosml/dataset.hpp"
#include "phosml/matrix.hpp"
#include "phosml/rng.hpp"

namespace support {

inline phosml::Matrix random_matrix(phosml::Rng& rng, std::size_t rows, std::size_t cols, double lo = -1.0,
                                    double hi = 1.0) {
  phosml::Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = rng.uniform(lo, hi);
  return m;
}

inline std::vector<double> random_vector(phosml::Rng& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

inline phosml::DesignMatrix design(phosml::Matrix m) {
  phosml::DesignMatrix d;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    d.columns.push_back("x" + std::to_string(c));
    d.provenance.push_back("x" + std::to_string(c));
  }
  d.data = std::move(m);
  return d;
}

// Smooth nonlinear target with a little noise.
inline std::vector<double> friedman(const phosml::Matrix& x, phosml::Rng& rng, double noise = 0.05) {
  std::vector<double> y(x.rows());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    const double a = x(r, 0), b = x.cols() > 1 ? x(r, 1) : 0.0, c = x.cols() > 2 ? x(r, 2) : 0.0;
    y[r] = std::sin(3.0 * a) + b * b - 0.5 * c + noise * rng.uniform(-1.0, 1.0);
  }
  return y;
}

}  // namespace support
