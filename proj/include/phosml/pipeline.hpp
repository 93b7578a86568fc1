#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "phosml/config.hpp"
#include "phosml/dataset.hpp"
#include "phosml/error.hpp"
#include "phosml/metrics.hpp"
#include "phosml/split.hpp"
#include "phosml/stacking.hpp"
#include "phosml/tuning.hpp"

namespace phosml {

// A library error tagged with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& cause)
      : Error(cause.code(), "stage '" + stage + "': " + std::string(cause.what()).substr(errc_name(cause.code()).size() + 2)),
        stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

// Exit status the CLI uses for a failure in `stage` (2 and up).
int stage_exit_code(const std::string& stage);

// Dataset, encoding and split shared by every command.
struct Prepared {
  std::vector<std::string> ids;  // dataset row ids
  TargetSpec target;
  Encoded encoded;
  SplitPlan plan;
  DesignMatrix x_train;
  std::vector<double> y_train;
  DesignMatrix x_test;
  std::vector<double> y_test;
};

Prepared prepare(const PipelineConfig& config, const Dataset& dataset);

struct HeldOutScore {
  double mae = 0.0;
  double rmse = 0.0;
  double r2 = 0.0;
};

HeldOutScore score(std::span<const double> y_true, std::span<const double> y_pred, R2Definition def);

struct LearnerOutcome {
  std::string label;
  LearnerSpec spec;  // after tuning
  std::optional<SearchResult> search;
  std::vector<FoldPrediction> cv_folds;    // held-out fold predictions
  std::vector<FoldPrediction> test_folds;  // each fold model on the test set
  std::optional<TrainedRegressor> full_model;  // refit on the whole training set
  std::vector<double> test_pred;               // full_model on the test set
  HeldOutScore test;
};

struct RunResult {
  std::string config_hash;
  std::uint64_t seed = 0;
  Prepared prepared;
  std::vector<LearnerOutcome> learners;
  std::vector<LearnerOutcome> metas;  // meta candidates, trained on the OOF matrix
  EvalReport cv_report;
  EvalReport test_report;
  EvalReport meta_cv_report;
  EvalReport meta_test_report;
  std::optional<StackModel> stack;
  std::vector<double> stack_test_pred;
  HeldOutScore stack_test;
  std::string best_single;
  HeldOutScore best_single_test;
  std::optional<ColumnWeights> importance;        // per encoded column, descending
  std::optional<ColumnWeights> importance_source; // per source feature, descending
};

// The whole protocol in memory: split, per-learner tuning and CV, stack with
// meta-learner comparison, held-out scoring, importance.
RunResult run_pipeline(const PipelineConfig& config, const Dataset& dataset);

// Renders and writes every artifact of a run into config.output_dir and
// returns the paths written, in write order.
std::vector<std::filesystem::path> write_run_artifacts(const PipelineConfig& config, const RunResult& result);

// Load -> run -> write.
RunResult cmd_run(const PipelineConfig& config);

std::string render_report(const PipelineConfig& config, const RunResult& result);
nlohmann::json report_json(const PipelineConfig& config, const RunResult& result);

// Self-describing model document wrapping a regressor or a stack.
inline constexpr int kModelFormatVersion = 1;
nlohmann::json model_document(const PipelineConfig& config, const TrainedRegressor& model);
nlohmann::json model_document(const PipelineConfig& config, const StackModel& model);

struct LoadedModel {
  std::string config_hash;
  std::uint64_t seed = 0;
  TargetSpec target;
  std::vector<std::string> excited_states;
  std::optional<TrainedRegressor> regressor;
  std::optional<StackModel> stack;

  std::vector<double> predict(const DesignMatrix& x) const;
  const std::vector<std::string>& input_columns() const;
};

LoadedModel load_model(const nlohmann::json& doc);
LoadedModel load_model(const std::filesystem::path& path);

// Predictions in natural units: nm, s^-1 (plus a log10 column) or a PLQY
// clipped to [0, 1]. When every row carries the target, an external-test
// score table is appended to `report`.
struct PredictOutput {
  std::string csv;
  std::optional<std::string> report;
};

PredictOutput cmd_predict(const LoadedModel& model, const Dataset& dataset);
PredictOutput cmd_predict(const std::filesystem::path& model_path, const std::filesystem::path& data_path);

// Stage commands used by the CLI. Each loads the dataset named in the config,
// writes its artifact into config.output_dir and returns it.
SplitPlan cmd_split(const PipelineConfig& config);
SearchResult cmd_tune(const PipelineConfig& config, const std::string& label);
TrainedRegressor cmd_train(const PipelineConfig& config, const std::string& label);
StackModel cmd_stack(const PipelineConfig& config);
EvalReport cmd_evaluate(const PipelineConfig& config);

// Importance table of a persisted tree model (or a stack's meta learner),
// as CSV: scope,rank,name,weight.
std::string cmd_importance(const LoadedModel& model, std::size_t top);

// "# phosml config_hash=... seed=..." line prefixed to text artifacts.
std::string artifact_header(const std::string& config_hash, std::uint64_t seed);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace phosml
