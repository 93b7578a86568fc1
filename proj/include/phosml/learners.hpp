#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "phosml/dataset.hpp"
#include "phosml/matrix.hpp"
#include "phosml/tree.hpp"

namespace phosml {

// Gbm comes in two growth policies: leaf-wise (LightGBM-like, bounded by
// max_leaves) and level-wise (XGBoost-like, bounded by max_depth).
enum class LearnerKind {
  Cart,
  RandomForest,
  GbmLeafWise,
  GbmLevelWise,
  AdaBoostR2,
  KnnUniform,
  KnnDistance,
  Krr,
  Svr,
};

std::string to_string(LearnerKind kind);
LearnerKind parse_learner_kind(const std::string& text);
bool is_tree_ensemble(LearnerKind kind);

using ParamValue = std::variant<bool, double, std::string>;
using ParamMap = std::map<std::string, ParamValue>;

std::string to_string(const ParamValue& value);
nlohmann::json to_json(const ParamValue& value);
ParamValue param_from_json(const nlohmann::json& j);

struct LearnerSpec {
  LearnerKind kind = LearnerKind::Cart;
  ParamMap params;
  std::uint64_t seed = 0;
};

enum class ParamType { Int, Real, Bool, Choice };

// One entry of a learner's declared parameter space. Numeric bounds are
// inclusive unless the matching *_open flag is set. A missing default means
// the value is derived at fit time (e.g. gamma = 1 / n_features).
struct ParamDecl {
  std::string name;
  ParamType type = ParamType::Real;
  double lo = 0.0;
  double hi = 0.0;
  bool lo_open = false;
  std::vector<std::string> choices;
  std::optional<ParamValue> default_value;
};

const std::vector<ParamDecl>& param_space(LearnerKind kind);

// Fills defaults, rejects unknown names, wrong types and out-of-range values.
ParamMap resolve_params(LearnerKind kind, const ParamMap& params);

struct CartParams {
  std::size_t max_depth = 0;
  std::size_t min_samples_leaf = 1;
};

struct ForestParams {
  std::size_t n_trees = 100;
  double max_features_fraction = 1.0;
  bool bootstrap = true;
  std::size_t max_depth = 0;
  std::size_t min_samples_leaf = 1;
};

struct GbmParams {
  std::size_t n_rounds = 100;
  double learning_rate = 0.1;
  std::size_t max_leaves = 31;
  std::size_t max_depth = 0;
  double l2_leaf_reg = 0.0;
  double subsample_fraction = 1.0;
  std::size_t min_samples_leaf = 1;
};

enum class AdaLoss { Linear, Square, Exponential };

struct AdaParams {
  std::size_t n_estimators = 50;
  AdaLoss loss = AdaLoss::Linear;
  double learning_rate = 1.0;
  std::size_t max_depth = 3;
};

struct KnnParams {
  std::size_t k = 5;
};

enum class KernelType { Rbf, Linear };

struct KrrParams {
  double alpha = 1.0;
  KernelType kernel = KernelType::Rbf;
  std::optional<double> gamma;
};

struct SvrParams {
  double c = 1.0;
  double epsilon = 0.1;
  std::optional<double> gamma;
  double tol = 1e-3;
  std::size_t max_iter = 100000;
};

CartParams cart_params(const ParamMap& resolved);
ForestParams forest_params(const ParamMap& resolved);
GbmParams gbm_params(LearnerKind kind, const ParamMap& resolved);
AdaParams ada_params(const ParamMap& resolved);
KnnParams knn_params(const ParamMap& resolved);
KrrParams krr_params(const ParamMap& resolved);
SvrParams svr_params(const ParamMap& resolved);

// --- fitted state ------------------------------------------------------------

struct CartModel {
  Tree tree;
  std::vector<double> importance;  // raw squared-error decrease per column
};

struct ForestModel {
  std::vector<Tree> trees;
  std::vector<double> importance;  // mean of per-tree normalized importances
};

struct GbmModel {
  double base_score = 0.0;
  std::vector<Tree> trees;  // leaf values already multiplied by learning_rate
  std::vector<double> importance;  // summed gains
  std::vector<double> train_mse;  // after round 0..n_rounds (index 0 = base score only)
};

struct AdaModel {
  std::vector<Tree> trees;
  std::vector<double> weights;  // log(1 / beta) * learning_rate
  std::vector<double> importance;  // estimator-weighted normalized importances
};

struct KnnModel {
  ScalerStats scaler;
  Matrix train;  // standardized training rows
  std::vector<double> y;
  std::size_t k = 1;
  bool distance_weighted = false;
};

struct KrrModel {
  ScalerStats scaler;
  Matrix train;
  std::vector<double> dual;
  double intercept = 0.0;  // mean of the training targets
  KernelType kernel = KernelType::Rbf;
  double gamma = 1.0;
};

struct SvrModel {
  ScalerStats scaler;
  Matrix support;           // standardized support vectors
  std::vector<double> coef; // alpha_i - alpha_i^*
  double rho = 0.0;         // f(x) = sum coef_i k(s_i, x) - rho, in scaled target units
  double gamma = 1.0;
  double y_mean = 0.0;
  double y_scale = 1.0;
  std::size_t iterations = 0;
};

using ModelState = std::variant<CartModel, ForestModel, GbmModel, AdaModel, KnnModel, KrrModel, SvrModel>;

class TrainedRegressor {
 public:
  TrainedRegressor(LearnerSpec spec, std::vector<std::string> columns, ModelState state)
      : spec_(std::move(spec)), columns_(std::move(columns)), state_(std::move(state)) {}

  const LearnerSpec& spec() const noexcept { return spec_; }  // params fully resolved
  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const ModelState& state() const noexcept { return state_; }

 private:
  LearnerSpec spec_;
  std::vector<std::string> columns_;
  ModelState state_;
};

TrainedRegressor fit(const LearnerSpec& spec, const DesignMatrix& x, std::span<const double> y);
std::vector<double> predict(const TrainedRegressor& model, const DesignMatrix& x);
// Skips the column check; x must have the training column layout.
std::vector<double> predict_rows(const TrainedRegressor& model, const Matrix& x);

using ColumnWeights = std::vector<std::pair<std::string, double>>;

// Impurity-decrease importances per encoded column, normalized to sum 1
// (all zero when the model never split). Tree learners only.
ColumnWeights feature_importance(const TrainedRegressor& model);
// Sums column weights by source feature (first-appearance order).
ColumnWeights aggregate_by_source(const ColumnWeights& weights, const DesignMatrix& layout);
ColumnWeights top_k(ColumnWeights weights, std::size_t k);

inline constexpr int kRegressorFormatVersion = 1;
nlohmann::json to_json(const TrainedRegressor& model);
TrainedRegressor regressor_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const LearnerSpec& spec);
LearnerSpec learner_spec_from_json(const nlohmann::json& doc);

// Per-family trainers, exposed for tests and benchmarks.
CartModel train_cart(const Matrix& x, std::span<const double> y, const CartParams& p);
ForestModel train_forest(const Matrix& x, std::span<const double> y, const ForestParams& p, std::uint64_t seed,
                         bool parallel = true);
GbmModel train_gbm(const Matrix& x, std::span<const double> y, const GbmParams& p, bool leaf_wise, std::uint64_t seed);
AdaModel train_adaboost(const Matrix& x, std::span<const double> y, const AdaParams& p, std::uint64_t seed);
KnnModel train_knn(const Matrix& x, std::span<const double> y, const KnnParams& p, bool distance_weighted);
KrrModel train_krr(const Matrix& x, std::span<const double> y, const KrrParams& p);
SvrModel train_svr(const Matrix& x, std::span<const double> y, const SvrParams& p);

std::vector<double> predict_forest(const ForestModel& m, const Matrix& x, bool parallel = true);
std::vector<double> predict_gbm(const GbmModel& m, const Matrix& x);
std::vector<double> predict_adaboost(const AdaModel& m, const Matrix& x);
std::vector<double> predict_knn(const KnnModel& m, const Matrix& x);
std::vector<double> predict_krr(const KrrModel& m, const Matrix& x);
std::vector<double> predict_svr(const SvrModel& m, const Matrix& x);

// Internals of the SVR solver, for KKT checks in tests.
struct SvrDual {
  std::vector<double> alpha;       // length 2n: [alpha_1..alpha_n, alpha*_1..alpha*_n]
  std::vector<double> gradient;    // gradient of the dual objective
  double rho = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};
// Solves min 1/2 a'Qa + p'a  s.t. y'a = 0, 0 <= a <= c for the epsilon-SVR
// dual over kernel matrix `gram` and (already scaled) targets z.
SvrDual solve_svr_dual(const Matrix& gram, std::span<const double> z, double c, double epsilon, double tol,
                       std::size_t max_iter);

// Weighted median used by AdaBoost.R2: smallest prediction whose cumulative
// weight (in sorted order) reaches half the total.
double weighted_median(std::span<const double> values, std::span<const double> weights);

}  // namespace phosml
