#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "phosml/config.hpp"
#include "phosml/learners.hpp"
#include "phosml/metrics.hpp"
#include "phosml/physics.hpp"
#include "phosml/pipeline.hpp"
#include "phosml/split.hpp"
#include "phosml/stacking.hpp"
#include "phosml/synthetic.hpp"
#include "support.hpp"

using namespace phosml;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, const std::string& name, bool ok, const std::string& detail) {
  std::printf("%s criterion %d (%s): %s\n", ok ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

template <typename F>
void guarded(int id, const std::string& name, F&& f) {
  try {
    f();
  } catch (const std::exception& e) {
    report(id, name, false, std::string("exception: ") + e.what());
  }
}

void knn_oracle() {
  const auto t0 = Clock::now();
  Rng rng(1);
  const auto x = support::random_matrix(rng, 50, 5);
  const auto y = support::random_vector(rng, 50);
  const auto q = support::random_matrix(rng, 50, 5);
  std::size_t bad = 0;
  for (std::size_t k : {1, 3, 5, 10}) {
    const auto u = predict(fit({LearnerKind::KnnUniform, {{"k", double(k)}}, 1}, support::design(x), y), support::design(q));
    if (u != oracle::knn(x, y, q, k, false)) ++bad;
    const auto d = predict(fit({LearnerKind::KnnDistance, {{"k", double(k)}}, 1}, support::design(x), y), support::design(q));
    const auto od = oracle::knn(x, y, q, k, true);
    for (std::size_t i = 0; i < d.size(); ++i)
      if (std::abs(d[i] - od[i]) > 1e-10 * std::max(1.0, std::abs(od[i]))) ++bad;
  }
  const double s = seconds_since(t0);
  report(1, "KNN brute-force oracle", bad == 0 && s < 1.0,
         std::to_string(bad) + " mismatches, " + std::to_string(s) + " s");
}

void krr_oracle() {
  Rng rng(2);
  double worst = 0.0;
  for (double alpha : {1e-6, 1e-2, 1.0})
    for (int trial = 0; trial < 20; ++trial) {
      const std::size_t n = 2 + rng.below(9);
      const auto x = support::random_matrix(rng, n, 3);
      const auto y = support::random_vector(rng, n, -2, 2);
      const auto q = support::random_matrix(rng, 8, 3);
      const auto p = predict(fit({LearnerKind::Krr, {{"alpha", alpha}}, 1}, support::design(x), y), support::design(q));
      const auto o = oracle::krr_rbf(x, y, q, alpha, 1.0 / 3.0);
      for (std::size_t i = 0; i < p.size(); ++i) worst = std::max(worst, std::abs(p[i] - o[i]));
    }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "max |diff| %.3g", worst);
  report(2, "KRR dense-solve oracle", worst <= 1e-8, buf);
}

void forest_equals_cart() {
  std::size_t identical = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng rng(300 + s);
    const auto x = support::design(support::random_matrix(rng, 30 + 5 * s, 4));
    const auto y = support::friedman(x.data, rng);
    const auto q = support::design(support::random_matrix(rng, 25, 4));
    const ParamMap forest{{"n_trees", 1.0}, {"bootstrap", false}, {"max_features_fraction", 1.0}};
    if (predict(fit({LearnerKind::RandomForest, forest, s}, x, y), q) == predict(fit({LearnerKind::Cart, {}, s}, x, y), q))
      ++identical;
  }
  report(3, "degenerate forest equals CART", identical == 10, std::to_string(identical) + "/10 bit-identical");
}

void boosting_monotone() {
  Rng rng(4);
  const auto x = support::design(support::random_matrix(rng, 200, 10));
  const auto y = support::friedman(x.data, rng, 0.3);
  std::size_t increases = 0, rounds = 0;
  for (auto kind : {LearnerKind::GbmLeafWise, LearnerKind::GbmLevelWise}) {
    const auto m = fit({kind, {{"n_rounds", 200.0}, {"learning_rate", 0.1}, {"subsample_fraction", 1.0}}, 1}, x, y);
    const auto& mse = std::get<GbmModel>(m.state()).train_mse;
    rounds += mse.size() - 1;
    for (std::size_t r = 1; r < mse.size(); ++r)
      if (mse[r] > mse[r - 1]) ++increases;
  }
  report(4, "boosting training MSE non-increasing", increases == 0 && rounds == 400,
         std::to_string(increases) + " increases over " + std::to_string(rounds) + " rounds");
}

void spxy_oracle() {
  Rng rng(5);
  std::size_t mismatches = 0, rescale = 0, cases = 0;
  while (cases < 1000) {
    const std::size_t n = 2 + rng.below(6);
    const std::size_t d = 1 + rng.below(3);
    const auto x = support::random_matrix(rng, n, d, -5, 5);
    const auto y = support::random_vector(rng, n, -3, 3);
    const double frac = rng.uniform(0.3, 0.95);
    const auto n_train = static_cast<std::size_t>(std::llround(frac * static_cast<double>(n)));
    if (n_train == 0 || n_train > n) continue;
    ++cases;
    const bool standardize = rng.below(2) == 0;
    const auto got = spxy_split(x, y, frac, SpxyOptions{standardize}).train_indices;
    if (got != oracle::spxy(x, y, n_train, standardize)) ++mismatches;
    auto y2 = y;
    for (auto& v : y2) v *= 41.0;
    Matrix x2 = x;
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < d; ++c) x2(r, c) *= 0.25;
    if (spxy_split(x, y2, frac, SpxyOptions{standardize}).train_indices != got ||
        spxy_split(x2, y, frac, SpxyOptions{standardize}).train_indices != got)
      ++rescale;
  }
  report(5, "SPXY brute-force enumeration", mismatches == 0 && rescale == 0,
         std::to_string(mismatches) + " mismatches, " + std::to_string(rescale) + " rescaling changes in " +
             std::to_string(cases) + " cases");
}

void radiative_rate() {
  using namespace physics;
  const double kr = kr_from_transition(TransitionRecord::from_wavelength_nm(500.0, 1e-3));
  const double expected = static_cast<double>(oracle::kr(500.0L, 1e-3L));
  const double rel = std::abs(kr - expected) / expected;
  const double k0 = kr_from_transition(TransitionRecord::from_frequency_hz(4e14, 2e-3));
  const double lin = std::abs(kr_from_transition(TransitionRecord::from_frequency_hz(4e14, 6e-3)) / k0 - 3.0) / 3.0;
  const double quad = std::abs(kr_from_transition(TransitionRecord::from_frequency_hz(8e14, 2e-3)) / k0 - 4.0) / 4.0;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "k_r = %.6e s^-1, rel err %.2g, linearity %.2g, nu^2 %.2g", kr, rel, lin, quad);
  report(6, "radiative rate", rel < 1e-3 && lin < 1e-12 && quad < 1e-12, buf);
}

void oof_bookkeeping() {
  Rng rng(7);
  const auto x = support::design(support::random_matrix(rng, 60, 3));
  const auto y = support::friedman(x.data, rng);
  SplitPlan plan;
  for (std::size_t i = 0; i < 60; ++i) plan.train_indices.push_back(i);
  const auto folds = kfold_assign(plan, 5, 9).folds;
  StackArchitecture arch;
  arch.bases = {{"CART", {LearnerKind::Cart, {{"max_depth", 3.0}}, 1}}, {"CART2", {LearnerKind::Cart, {{"max_depth", 5.0}}, 2}}};
  arch.meta = {"KNN", {LearnerKind::KnnUniform, {{"k", 3.0}}, 1}};
  arch.meta_features = MetaFeatures::BasePredictionsOnly;
  arch.oof_k = 5;
  arch.oof = OofMode::OutOfFold;
  const auto oof = build_oof_matrix(arch, x, y, folds);
  std::size_t leaks = 0;
  for (std::size_t i = 0; i < 60; ++i) {
    const auto& rows = oof.bookkeeping.model_train_rows[oof.bookkeeping.model_of_row[i]];
    if (std::find(rows.begin(), rows.end(), i) != rows.end()) ++leaks;
  }
  arch.oof = OofMode::InSample;
  const auto ins = build_oof_matrix(arch, x, y, folds);
  std::size_t seen = 0;
  for (std::size_t i = 0; i < 60; ++i) {
    const auto& rows = ins.bookkeeping.model_train_rows[ins.bookkeeping.model_of_row[i]];
    if (std::find(rows.begin(), rows.end(), i) != rows.end()) ++seen;
  }
  report(7, "out-of-fold leakage", leaks == 0 && seen == 60,
         std::to_string(leaks) + " OOF rows leaked, in-sample flag includes " + std::to_string(seen) + "/60");
}

bool table_format_ok(const std::string& text) {
  const auto header = text.find("MAE (nm)");
  if (header == std::string::npos) return false;
  const auto rmse = text.find("RMSE (nm)", header), r2 = text.find("R2", header);
  if (rmse == std::string::npos || r2 == std::string::npos || !(header < rmse && rmse < r2)) return false;
  static const std::regex row(R"(\n\S+\s+\d+\.\d\d±\d+\.\d\d\s+\d+\.\d\d±\d+\.\d\d\s+-?\d+\.\d\d±\d+\.\d\d)");
  return std::regex_search(text, row);
}

void pipeline_criteria(const fs::path& work) {
  fs::remove_all(work);
  fs::create_directories(work);
  const auto data = work / "emitters.csv";
  {
    std::ofstream out(data);
    write_dataset(out, synthetic_emitters(206, 7));
  }
  auto config_for = [&](const std::string& out) {
    return config_from_json(nlohmann::json{{"dataset", data.string()}, {"target", "wavelength"}, {"output_dir", (work / out).string()}});
  };

  RunResult first;
  double elapsed = 0.0;
  guarded(8, "stacked wavelength pipeline", [&] {
    const auto t0 = Clock::now();
    first = cmd_run(config_for("run1"));
    elapsed = seconds_since(t0);
    const bool format = table_format_ok(slurp(work / "run1" / "report.txt"));
    const bool quality = first.stack_test.r2 >= first.best_single_test.r2 - 0.05;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%.1f s, stack R2 %.4f vs best single %s R2 %.4f, table format %s", elapsed,
                  first.stack_test.r2, first.best_single.c_str(), first.best_single_test.r2, format ? "ok" : "bad");
    report(8, "stacked wavelength pipeline", elapsed < 120.0 && quality && format, buf);
  });

  guarded(9, "determinism", [&] {
    cmd_run(config_for("run2"));
    std::size_t compared = 0, differing = 0;
    for (const auto& entry : fs::directory_iterator(work / "run1")) {
      const auto name = entry.path().filename();
      if (name == "config.json") continue;  // records output_dir
      ++compared;
      if (!fs::exists(work / "run2" / name) || slurp(entry.path()) != slurp(work / "run2" / name)) ++differing;
    }
    const bool cfg_same = config_hash(config_for("run1")) == config_hash(config_for("run2"));
    report(9, "determinism", compared >= 10 && differing == 0 && cfg_same,
           std::to_string(differing) + " of " + std::to_string(compared) + " artifacts differ between two runs");
  });
}

void metric_identities() {
  Rng rng(10);
  std::size_t violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(40);
    const auto a = support::random_vector(rng, n, -10, 10);
    const auto b = support::random_vector(rng, n, -10, 10);
    if (rmse(a, b) < mae(a, b)) ++violations;
  }
  const std::vector<double> t{1, 2, 3}, flat{2, 2, 2};
  const bool hand = r2(t, t) == 1.0 && r2(t, flat) == 0.0 && mae(t, flat) == 2.0 / 3.0 &&
                    rmse(t, flat) == std::sqrt(2.0 / 3.0) && r2(std::vector<double>{0, 1}, std::vector<double>{1, 0}) == -3.0;
  std::vector<double> lt, lp;
  for (double k : {3.0e4, 2.2e5, 9.1e5}) {
    lt.push_back(physics::log10_rate(k));
    lp.push_back(physics::log10_rate(k * 10.0));
  }
  const double shift = mae(lt, lp);
  const bool log_ok = std::abs(shift - 1.0) < 1e-12;
  report(10, "metric identities", violations == 0 && hand && log_ok,
         std::to_string(violations) + " RMSE < MAE cases, hand cases " + (hand ? "ok" : "bad") +
             ", tenfold rate error = " + std::to_string(shift) + " log units");
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "phosml_acceptance";
  guarded(1, "KNN brute-force oracle", knn_oracle);
  guarded(2, "KRR dense-solve oracle", krr_oracle);
  guarded(3, "degenerate forest equals CART", forest_equals_cart);
  guarded(4, "boosting training MSE non-increasing", boosting_monotone);
  guarded(5, "SPXY brute-force enumeration", spxy_oracle);
  guarded(6, "radiative rate", radiative_rate);
  guarded(7, "out-of-fold leakage", oof_bookkeeping);
  pipeline_criteria(work);
  guarded(10, "metric identities", metric_identities);
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
