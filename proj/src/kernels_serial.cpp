#include <cmath>

#include "phosml/kernels.hpp"

namespace phosml::kernels::serial {

Matrix pairwise_distances(const Matrix& x) {
  const std::size_t n = x.rows();
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = std::sqrt(squared_distance(x.row(i), x.row(j)));
      out(i, j) = d;
      out(j, i) = d;
    }
  return out;
}

Matrix cross_squared_distances(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = squared_distance(a.row(i), b.row(j));
  return out;
}

Matrix rbf_gram(const Matrix& a, const Matrix& b, double gamma) {
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j)
      out(i, j) = std::exp(-gamma * squared_distance(a.row(i), b.row(j)));
  return out;
}

Matrix linear_gram(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = dot(a.row(i), b.row(j));
  return out;
}

}  // namespace phosml::kernels::serial
