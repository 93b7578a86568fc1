#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace phosml {

// Coefficient of determination 1 - SS_res / SS_tot (can be negative).
double r2(std::span<const double> y_true, std::span<const double> y_pred);
// Squared Pearson correlation between truth and prediction.
double pearson_r2(std::span<const double> y_true, std::span<const double> y_pred);
double mae(std::span<const double> y_true, std::span<const double> y_pred);
double rmse(std::span<const double> y_true, std::span<const double> y_pred);

enum class R2Definition { Determination, PearsonSquared };

std::string to_string(R2Definition def);
R2Definition parse_r2_definition(const std::string& text);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population deviation across folds
};

MeanStd mean_std(std::span<const double> values);
// "m±s" with two decimals; "n/a" for a non-finite mean.
std::string format_pm(const MeanStd& v, int decimals = 2);

struct FoldPrediction {
  std::vector<double> y_true;
  std::vector<double> y_pred;
};

struct FoldScore {
  std::size_t samples = 0;
  double mae = 0.0;
  double rmse = 0.0;
  std::optional<double> r2;  // empty when the fold is too small or constant
};

struct EvalRow {
  std::string model;
  std::size_t folds = 0;
  std::vector<FoldScore> per_fold;
  MeanStd mae;
  MeanStd rmse;
  MeanStd r2;            // over folds where R^2 was defined
  std::size_t r2_folds = 0;
  bool fold_too_small = false;  // some fold lacked a defined R^2
};

// Scores each fold on its own held-out samples and aggregates mean and
// population std across folds. Needs at least two folds.
EvalRow cv_report(const std::string& model, std::span<const FoldPrediction> folds,
                  R2Definition def = R2Definition::Determination);

struct EvalReport {
  std::string title;
  std::string target;  // wavelength | kr | plqy
  std::string unit;    // nm | log10(s^-1) | fraction
  R2Definition r2_definition = R2Definition::Determination;
  std::vector<EvalRow> rows;
};

// Aligned plain-text table: model, MAE, RMSE, R2 (in that order).
std::string render_table(const EvalReport& report);
// Delimited text, one row per model.
std::string render_csv(const EvalReport& report);
nlohmann::json to_json(const EvalReport& report);

}  // namespace phosml
