#include <doctest.h>

#include <algorithm>
#include <set>

#include "phosml/matrix.hpp"
#include "phosml/rng.hpp"

using namespace phosml;

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(derive_seed(7, 3) == derive_seed(7, 3));
}

TEST_CASE("bounded draws") {
  Rng rng(3);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = rng.below(7);
    REQUIRE(v < 7);
    ++hits[v];
  }
  for (int h : hits) CHECK(h > 800);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  const auto s = rng.sample_without_replacement(20, 8);
  CHECK(s.size() == 8);
  CHECK(std::is_sorted(s.begin(), s.end()));
  CHECK(std::set<std::size_t>(s.begin(), s.end()).size() == 8);
  CHECK(rng.sample_without_replacement(5, 5) == std::vector<std::size_t>{0, 1, 2, 3, 4});
}

TEST_CASE("shuffle is a permutation") {
  Rng rng(9);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  rng.shuffle(std::span(v));
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);
}

TEST_CASE("matrix basics") {
  Matrix m(2, 3, std::vector<double>{1, 2, 3, 4, 5, 6});
  CHECK(m(1, 2) == 6.0);
  CHECK(m.row(1)[0] == 4.0);
  CHECK(m.column(1) == std::vector<double>{2, 5});
  const std::vector<std::size_t> idx{1, 1, 0};
  const auto s = m.select_rows(idx);
  CHECK(s.rows() == 3);
  CHECK(s(0, 0) == 4.0);
  CHECK(s(2, 0) == 1.0);
  CHECK(m.all_finite());
  CHECK(select(std::vector<double>{10, 20, 30}, idx) == std::vector<double>{20, 20, 10});
}
