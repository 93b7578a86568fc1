#include <doctest.h>

#include <cmath>

#include "phosml/kernels.hpp"
#include "support.hpp"

using namespace phosml;

TEST_CASE("OpenMP kernels are bit-identical to the serial reference") {
  Rng rng(1);
  const auto a = support::random_matrix(rng, 57, 13);
  const auto b = support::random_matrix(rng, 31, 13);
  for (int threads : {1, 2, 3, 8}) {
    kernels::set_thread_count(threads);
    CHECK(kernels::pairwise_distances(a) == kernels::serial::pairwise_distances(a));
    CHECK(kernels::cross_squared_distances(a, b) == kernels::serial::cross_squared_distances(a, b));
    CHECK(kernels::rbf_gram(a, b, 0.3) == kernels::serial::rbf_gram(a, b, 0.3));
    CHECK(kernels::linear_gram(b, a) == kernels::serial::linear_gram(b, a));
  }
  kernels::set_thread_count(1);
}

TEST_CASE("kernel values") {
  Matrix a(2, 2, std::vector<double>{0, 0, 3, 4});
  const auto d = kernels::serial::pairwise_distances(a);
  CHECK(d(0, 1) == 5.0);
  CHECK(d(1, 0) == 5.0);
  CHECK(d(0, 0) == 0.0);
  CHECK(kernels::serial::cross_squared_distances(a, a)(0, 1) == 25.0);
  CHECK(kernels::serial::rbf_gram(a, a, 0.1)(0, 1) == std::exp(-2.5));
  CHECK(kernels::serial::linear_gram(a, a)(1, 1) == 25.0);
}
