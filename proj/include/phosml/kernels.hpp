#pragma once

#include <span>

#include "phosml/matrix.hpp"

// Data-parallel inner loops shared by the distance- and kernel-based code.
// Every kernel has a serial reference in kernels::serial; the OpenMP versions
// compute each output entry with the same scalar routine, so results are
// bit-identical to the reference regardless of thread count or schedule.
namespace phosml::kernels {

inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

// Symmetric N x N Euclidean distance matrix of the rows of x.
Matrix pairwise_distances(const Matrix& x);
// |a| x |b| squared Euclidean distances between rows.
Matrix cross_squared_distances(const Matrix& a, const Matrix& b);
// exp(-gamma * |a_i - b_j|^2)
Matrix rbf_gram(const Matrix& a, const Matrix& b, double gamma);
// <a_i, b_j>
Matrix linear_gram(const Matrix& a, const Matrix& b);

namespace serial {
Matrix pairwise_distances(const Matrix& x);
Matrix cross_squared_distances(const Matrix& a, const Matrix& b);
Matrix rbf_gram(const Matrix& a, const Matrix& b, double gamma);
Matrix linear_gram(const Matrix& a, const Matrix& b);
}  // namespace serial

// Threads used by the OpenMP kernels; reads PHOSML_THREADS once if set.
int thread_count();
void set_thread_count(int n);

}  // namespace phosml::kernels
