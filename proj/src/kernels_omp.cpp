#include <omp.h>

#include <cmath>
#include <cstdlib>
#include <string>

#include "phosml/kernels.hpp"

namespace phosml::kernels {

namespace {

int initial_threads() {
  if (const char* env = std::getenv("PHOSML_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
    }
  }
  return omp_get_max_threads();
}

int& threads() {
  static int n = initial_threads();
  return n;
}

using Index = std::ptrdiff_t;

}  // namespace

int thread_count() { return threads(); }
void set_thread_count(int n) { threads() = n > 0 ? n : 1; }

Matrix pairwise_distances(const Matrix& x) {
  const auto n = static_cast<Index>(x.rows());
  Matrix out(x.rows(), x.rows());
#pragma omp parallel for schedule(dynamic, 8) num_threads(thread_count())
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const double d = std::sqrt(squared_distance(x.row(i), x.row(j)));
      out(i, j) = d;
      out(j, i) = d;
    }
  return out;
}

Matrix cross_squared_distances(const Matrix& a, const Matrix& b) {
  const auto n = static_cast<Index>(a.rows());
  Matrix out(a.rows(), b.rows());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (Index i = 0; i < n; ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = squared_distance(a.row(i), b.row(j));
  return out;
}

Matrix rbf_gram(const Matrix& a, const Matrix& b, double gamma) {
  const auto n = static_cast<Index>(a.rows());
  Matrix out(a.rows(), b.rows());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (Index i = 0; i < n; ++i)
    for (std::size_t j = 0; j < b.rows(); ++j)
      out(i, j) = std::exp(-gamma * squared_distance(a.row(i), b.row(j)));
  return out;
}

Matrix linear_gram(const Matrix& a, const Matrix& b) {
  const auto n = static_cast<Index>(a.rows());
  Matrix out(a.rows(), b.rows());
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (Index i = 0; i < n; ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = dot(a.row(i), b.row(j));
  return out;
}

}  // namespace phosml::kernels
