#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "oracles.hpp"
#include "phosml/error.hpp"
#include "phosml/split.hpp"
#include "support.hpp"

using namespace phosml;

namespace {

std::vector<std::size_t> pick(const Matrix& x, const std::vector<double>& y, double frac, bool standardize = true) {
  return spxy_split(x, y, frac, SpxyOptions{standardize}).train_indices;
}

}  // namespace

TEST_CASE("hand-executed Kennard-Stone example") {
  Matrix x(4, 1, std::vector<double>{0, 1, 2, 10});
  const std::vector<double> y{0, 1, 2, 10};
  const auto plan = spxy_split(x, y, 0.75);
  CHECK(plan.train_indices == std::vector<std::size_t>{0, 3, 2});
  CHECK(plan.test_indices == std::vector<std::size_t>{1});
  CHECK(pick(x, y, 0.75, false) == std::vector<std::size_t>{0, 3, 2});
}

TEST_CASE("two samples, half training") {
  Matrix x(2, 1, std::vector<double>{5, 1});
  const auto plan = spxy_split(x, std::vector<double>{1, 2}, 0.5);
  CHECK(plan.train_indices == std::vector<std::size_t>{0});
  CHECK(plan.test_indices == std::vector<std::size_t>{1});
}

TEST_CASE("exact duplicates are not both selected before distinct points run out") {
  Matrix x(5, 2, std::vector<double>{0, 0, 1, 0, 0, 1, 1, 1, 1, 0});
  const std::vector<double> y{0, 1, 2, 3, 1};
  const auto plan = spxy_split(x, y, 0.8);
  const std::set<std::size_t> train(plan.train_indices.begin(), plan.train_indices.end());
  CHECK(train.size() == 4);
  CHECK(!(train.count(1) && train.count(4)));
  CHECK(plan.train_indices == oracle::spxy(x, y, 4, true));
}

TEST_CASE("matches brute-force enumeration on 1000 small datasets, with rescaling invariance") {
  Rng rng(2024);
  int mismatches = 0, y_scale = 0, x_scale = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(6);
    const std::size_t d = 1 + rng.below(3);
    const auto x = support::random_matrix(rng, n, d, -5, 5);
    const auto y = support::random_vector(rng, n, -3, 3);
    const double frac = rng.uniform(0.3, 0.95);
    const auto n_train = static_cast<std::size_t>(std::llround(frac * static_cast<double>(n)));
    if (n_train == 0 || n_train > n) continue;
    const bool standardize = rng.below(2) == 0;
    const auto got = pick(x, y, frac, standardize);
    if (got != oracle::spxy(x, y, n_train, standardize)) ++mismatches;

    std::vector<double> y2 = y;
    for (auto& v : y2) v *= 37.5;
    if (pick(x, y2, frac, standardize) != got) ++y_scale;
    Matrix x2 = x;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < d; ++c) x2(r, c) *= 0.125;
    if (pick(x2, y, frac, standardize) != got) ++x_scale;
  }
  CHECK(mismatches == 0);
  CHECK(y_scale == 0);
  CHECK(x_scale == 0);
}

TEST_CASE("split plan invariants and permutation relabeling") {
  Rng rng(8);
  const auto x = support::random_matrix(rng, 30, 4);
  const auto y = support::random_vector(rng, 30);
  const auto plan = spxy_split(x, y, 0.8);
  CHECK(plan.train_indices.size() == 24);
  std::vector<std::size_t> all = plan.train_indices;
  all.insert(all.end(), plan.test_indices.begin(), plan.test_indices.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 30; ++i) CHECK(all[i] == i);
  CHECK(std::is_sorted(plan.test_indices.begin(), plan.test_indices.end()));

  std::vector<std::size_t> perm(30);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  rng.shuffle(std::span(perm));
  const auto px = x.select_rows(perm);
  const auto py = select(y, perm);
  const auto pplan = spxy_split(px, py, 0.8);
  std::set<std::size_t> relabeled;
  for (auto i : pplan.train_indices) relabeled.insert(perm[i]);
  CHECK(relabeled == std::set<std::size_t>(plan.train_indices.begin(), plan.train_indices.end()));
}

TEST_CASE("the farthest pair is selected first") {
  Rng rng(77);
  const auto x = support::random_matrix(rng, 15, 3);
  const auto y = support::random_vector(rng, 15);
  const auto d = spxy_distances(x, y);
  std::size_t bp = 0, bq = 1;
  for (std::size_t p = 0; p < 15; ++p)
    for (std::size_t q = p + 1; q < 15; ++q)
      if (d(p, q) > d(bp, bq)) {
        bp = p;
        bq = q;
      }
  const auto plan = spxy_split(x, y, 0.5);
  CHECK(plan.train_indices[0] == bp);
  CHECK(plan.train_indices[1] == bq);
}

TEST_CASE("split errors") {
  Matrix one(1, 1, std::vector<double>{1});
  CHECK_THROWS_AS(spxy_split(one, std::vector<double>{1}, 0.5), Error);
  Matrix two(2, 1, std::vector<double>{1, 2});
  CHECK_THROWS_AS(spxy_split(two, std::vector<double>{1, 2}, 1.0), Error);
  CHECK_THROWS_AS(spxy_split(two, std::vector<double>{1}, 0.5), Error);
}

TEST_CASE("k-fold assignment") {
  SplitPlan plan;
  plan.train_indices.resize(165);
  std::iota(plan.train_indices.begin(), plan.train_indices.end(), std::size_t{0});
  const auto a = kfold_assign(plan, 10, 42);
  const auto b = kfold_assign(plan, 10, 42);
  CHECK(a == b);
  CHECK(a.folds != kfold_assign(plan, 10, 43).folds);
  std::map<std::size_t, int> sizes;
  std::vector<std::size_t> seen;
  for (const auto& f : a.folds) {
    ++sizes[f.size()];
    CHECK(std::is_sorted(f.begin(), f.end()));
    seen.insert(seen.end(), f.begin(), f.end());
  }
  CHECK(sizes == std::map<std::size_t, int>{{16, 5}, {17, 5}});
  std::sort(seen.begin(), seen.end());
  for (std::size_t i = 0; i < 165; ++i) CHECK(seen[i] == i);

  plan.train_indices.resize(10);
  const auto loo = kfold_assign(plan, 10, 1);
  for (const auto& f : loo.folds) CHECK(f.size() == 1);
  try {
    kfold_assign(plan, 11, 1);
    FAIL("expected KTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::KTooLarge);
  }
}

TEST_CASE("split plan JSON round trip") {
  Rng rng(4);
  const auto x = support::random_matrix(rng, 20, 2);
  const auto plan = kfold_assign(spxy_split(x, support::random_vector(rng, 20), 0.8), 4, 9);
  CHECK(split_plan_from_json(nlohmann::json::parse(to_json(plan).dump())) == plan);
}
