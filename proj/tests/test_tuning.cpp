#include <doctest.h>

#include <numeric>

#include "phosml/error.hpp"
#include "phosml/split.hpp"
#include "phosml/tuning.hpp"
#include "support.hpp"

using namespace phosml;

namespace {

struct Problem {
  DesignMatrix x;
  std::vector<double> y;
  std::vector<std::vector<std::size_t>> folds;
};

Problem problem() {
  Rng rng(3);
  Problem p{support::design(support::random_matrix(rng, 40, 3)), {}, {}};
  p.y = support::friedman(p.x.data, rng);
  SplitPlan plan;
  plan.train_indices.resize(40);
  std::iota(plan.train_indices.begin(), plan.train_indices.end(), std::size_t{0});
  p.folds = kfold_assign(plan, 5, 1).folds;
  return p;
}

}  // namespace

TEST_CASE("distributions validate and draw inside their bounds") {
  CHECK_THROWS_AS(Distribution::uniform(2, 1), Error);
  CHECK_THROWS_AS(Distribution::log_uniform(0, 1), Error);
  CHECK_THROWS_AS(Distribution::choice({}), Error);
  Rng rng(1);
  const auto lu = Distribution::log_uniform(1e-3, 10);
  const auto iu = Distribution::int_uniform(2, 5);
  for (int i = 0; i < 500; ++i) {
    const double a = std::get<double>(lu.draw(rng));
    CHECK(a >= 1e-3);
    CHECK(a <= 10);
    const double b = std::get<double>(iu.draw(rng));
    CHECK(b == std::floor(b));
    CHECK(b >= 2);
    CHECK(b <= 5);
  }
  const SearchSpace space{{"k", iu}, {"loss", Distribution::choice({std::string("a"), true})}, {"c", lu}};
  CHECK(search_space_from_json(nlohmann::json::parse(to_json(space).dump())).size() == 3);
  CHECK(to_json(search_space_from_json(to_json(space))) == to_json(space));
}

TEST_CASE("random search is deterministic and picks the lowest RMSE") {
  const auto p = problem();
  const LearnerSpec spec{LearnerKind::KnnUniform, {}, 1};
  const SearchSpace space{{"k", Distribution::int_uniform(1, 20)}};
  const auto a = random_search(spec, space, 8, p.x, p.y, p.folds, 42);
  const auto b = random_search(spec, space, 8, p.x, p.y, p.folds, 42, false);
  REQUIRE(a.trials.size() == 8);
  for (std::size_t t = 0; t < 8; ++t) {
    CHECK(a.trials[t].params == b.trials[t].params);
    CHECK(a.trials[t].rmse.mean == b.trials[t].rmse.mean);
    CHECK(a.trials[t].folds.size() == 5);
  }
  CHECK(a.best.index == b.best.index);
  for (const auto& t : a.trials)
    if (t.ok) CHECK(a.best.rmse.mean <= t.rmse.mean);
  CHECK(a.best.rank == 1);

  const auto longer = random_search(spec, space, 16, p.x, p.y, p.folds, 42);
  for (std::size_t t = 0; t < 8; ++t) CHECK(longer.trials[t].params == a.trials[t].params);
  CHECK(longer.best.rmse.mean <= a.best.rmse.mean);

  const auto one = random_search(spec, space, 1, p.x, p.y, p.folds, 42);
  CHECK(one.best.index == 0);
  const auto csv = trials_csv(a);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
}

TEST_CASE("degenerate spaces and failing trials") {
  const auto p = problem();
  const LearnerSpec spec{LearnerKind::KnnUniform, {}, 1};
  const auto same = random_search(spec, {{"k", Distribution::choice({3.0})}}, 4, p.x, p.y, p.folds, 7);
  for (const auto& t : same.trials) {
    CHECK(t.params == same.trials[0].params);
    CHECK(t.rmse.mean == same.trials[0].rmse.mean);
  }
  // k above the smallest training fold fails those trials but not the search
  const auto mixed = random_search(spec, {{"k", Distribution::choice({2.0, 100.0})}}, 10, p.x, p.y, p.folds, 3);
  std::size_t failed = 0;
  for (const auto& t : mixed.trials) {
    if (!t.ok) {
      ++failed;
      CHECK(!t.error.empty());
      CHECK(t.rank == 0);
    }
  }
  CHECK(failed > 0);
  CHECK(mixed.best.ok);
  CHECK_THROWS_AS(random_search(spec, {{"k", Distribution::choice({100.0})}}, 2, p.x, p.y, p.folds, 3), Error);
  CHECK_THROWS_AS(random_search(spec, {{"k", Distribution::choice({2.0})}}, 0, p.x, p.y, p.folds, 3), Error);
}

TEST_CASE("default spaces exist for every roster label") {
  for (const char* label : {"KNN-Uniform", "KNN-Distance", "SVR", "KRR", "RF", "GBM", "GBM-LevelWise", "AdaBoost", "CART"})
    CHECK_FALSE(default_search_space(label).empty());
}
