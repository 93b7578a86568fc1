#include <doctest.h>

#include <cmath>

#include "phosml/error.hpp"
#include "phosml/metrics.hpp"
#include "phosml/rng.hpp"

using namespace phosml;

namespace {
Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::Io;
}
}  // namespace

TEST_CASE("hand-computed scores") {
  const std::vector<double> t{1, 2, 3};
  CHECK(r2(t, t) == 1.0);
  CHECK(mae(t, t) == 0.0);
  CHECK(rmse(t, t) == 0.0);
  const std::vector<double> flat{2, 2, 2};
  CHECK(r2(t, flat) == 0.0);
  CHECK(mae(t, flat) == 2.0 / 3.0);
  CHECK(rmse(t, flat) == std::sqrt(2.0 / 3.0));
  CHECK(r2(std::vector<double>{0, 1}, std::vector<double>{1, 0}) == -3.0);
  CHECK(pearson_r2(std::vector<double>{1, 2, 3}, std::vector<double>{2, 4, 6}) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("score errors") {
  CHECK(code_of([] { mae(std::vector<double>{1, 2}, std::vector<double>{1}); }) == Errc::LengthMismatch);
  CHECK(code_of([] { rmse(std::vector<double>{}, std::vector<double>{}); }) == Errc::LengthMismatch);
  CHECK(code_of([] { r2(std::vector<double>{4, 4}, std::vector<double>{1, 2}); }) == Errc::ConstantTruth);
  CHECK(code_of([] { mae(std::vector<double>{NAN}, std::vector<double>{1}); }) == Errc::NonFinite);
}

TEST_CASE("RMSE >= MAE and permutation invariance on random vectors") {
  Rng rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(30);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform(-10, 10);
      b[i] = rng.uniform(-10, 10);
    }
    CHECK(rmse(a, b) >= mae(a, b));
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    rng.shuffle(std::span(perm));
    std::vector<double> pa(n), pb(n);
    for (std::size_t i = 0; i < n; ++i) {
      pa[i] = a[perm[i]];
      pb[i] = b[perm[i]];
    }
    CHECK(mae(pa, pb) == doctest::Approx(mae(a, b)).epsilon(1e-12));
    CHECK(rmse(pa, pb) == doctest::Approx(rmse(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("log-space error: a tenfold rate error is one log unit") {
  const std::vector<double> rates{2.0e4, 1.2e5, 7.5e5};
  std::vector<double> t, p;
  for (double k : rates) {
    t.push_back(std::log10(k));
    p.push_back(std::log10(k));
  }
  const double before = mae(t, p);
  for (auto& v : p) v = std::log10(std::pow(10.0, v) * 10.0);
  CHECK(mae(t, p) - before == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("mean_std and m±s formatting") {
  const auto ms = mean_std(std::vector<double>{5, 7});
  CHECK(ms.mean == 6.0);
  CHECK(ms.std == 1.0);
  CHECK(format_pm(ms) == "6.00±1.00");
  CHECK(format_pm({-0.001, 0.0}) == "0.00±0.00");
  CHECK(format_pm({NAN, 0.0}) == "n/a");
  CHECK(mean_std(std::vector<double>{3, 3, 3}).std == 0.0);
}

TEST_CASE("cv_report aggregates per fold") {
  std::vector<FoldPrediction> folds{{{1, 2, 3}, {1, 2, 4}}, {{4, 5, 6}, {4, 6, 6}}};
  const auto row = cv_report("m", folds);
  CHECK(row.folds == 2);
  CHECK(row.per_fold.size() == 2);
  CHECK(row.mae.mean == doctest::Approx(1.0 / 3.0));
  CHECK(row.mae.std == 0.0);
  CHECK(row.r2_folds == 2);
  CHECK_FALSE(row.fold_too_small);

  std::vector<FoldPrediction> small{{{1}, {1.5}}, {{2, 3}, {2, 3}}};
  const auto flagged = cv_report("s", small);
  CHECK(flagged.fold_too_small);
  CHECK(flagged.r2_folds == 1);
  CHECK(flagged.r2.mean == 1.0);

  CHECK(code_of([&] { cv_report("x", std::span(folds).first(1)); }) == Errc::EmptyFold);
}

TEST_CASE("table layout keeps MAE, RMSE, R2 order") {
  std::vector<FoldPrediction> folds{{{1, 2, 3}, {1, 2, 4}}, {{4, 5, 6}, {4, 6, 6}}};
  EvalReport report{"Title", "wavelength", "nm", R2Definition::Determination, {cv_report("GBM", folds)}};
  const auto text = render_table(report);
  const auto mae_at = text.find("MAE (nm)"), rmse_at = text.find("RMSE (nm)"), r2_at = text.find("R2");
  CHECK(mae_at != std::string::npos);
  CHECK(mae_at < rmse_at);
  CHECK(rmse_at < r2_at);
  CHECK(text.find("GBM") != std::string::npos);
  CHECK(text.find("0.33±0.00") != std::string::npos);
  const auto csv = render_csv(report);
  CHECK(csv.rfind("model,folds,mae,rmse,r2", 0) == 0);
  const auto j = to_json(report);
  CHECK(j.at("rows").size() == 1);
  CHECK(parse_r2_definition(to_string(R2Definition::PearsonSquared)) == R2Definition::PearsonSquared);
}
