#include "phosml/learners.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "phosml/error.hpp"

namespace phosml {

namespace {

struct KindName {
  LearnerKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {LearnerKind::Cart, "cart"},
    {LearnerKind::RandomForest, "random_forest"},
    {LearnerKind::GbmLeafWise, "gbm_leafwise"},
    {LearnerKind::GbmLevelWise, "gbm_levelwise"},
    {LearnerKind::AdaBoostR2, "adaboost_r2"},
    {LearnerKind::KnnUniform, "knn_uniform"},
    {LearnerKind::KnnDistance, "knn_distance"},
    {LearnerKind::Krr, "krr"},
    {LearnerKind::Svr, "svr"},
};

constexpr double kBig = 1e12;

ParamDecl int_param(std::string name, double lo, double hi, std::optional<double> def) {
  ParamDecl d{std::move(name), ParamType::Int, lo, hi, false, {}, std::nullopt};
  if (def) d.default_value = ParamValue(*def);
  return d;
}

ParamDecl real_param(std::string name, double lo, double hi, bool lo_open, std::optional<double> def) {
  ParamDecl d{std::move(name), ParamType::Real, lo, hi, lo_open, {}, std::nullopt};
  if (def) d.default_value = ParamValue(*def);
  return d;
}

ParamDecl bool_param(std::string name, bool def) {
  return ParamDecl{std::move(name), ParamType::Bool, 0, 0, false, {}, ParamValue(def)};
}

ParamDecl choice_param(std::string name, std::vector<std::string> choices, std::string def) {
  return ParamDecl{std::move(name), ParamType::Choice, 0, 0, false, std::move(choices), ParamValue(std::move(def))};
}

std::vector<ParamDecl> gbm_space(bool leaf_wise) {
  std::vector<ParamDecl> s{
      int_param("n_rounds", 1, 1e6, 100),
      real_param("learning_rate", 0, 1, true, 0.1),
  };
  if (leaf_wise) {
    s.push_back(int_param("max_leaves", 2, 1e6, 31));
    s.push_back(int_param("max_depth", 0, 1e4, 0));
    s.push_back(real_param("l2_leaf_reg", 0, kBig, false, 0.0));
  } else {
    s.push_back(int_param("max_depth", 0, 1e4, 6));
    s.push_back(real_param("l2_leaf_reg", 0, kBig, false, 1.0));
  }
  s.push_back(real_param("subsample_fraction", 0, 1, true, 1.0));
  s.push_back(int_param("min_samples_leaf", 1, 1e6, 1));
  return s;
}

}  // namespace

std::string to_string(LearnerKind kind) {
  for (const auto& k : kKindNames)
    if (k.kind == kind) return k.name;
  return "?";
}

LearnerKind parse_learner_kind(const std::string& text) {
  for (const auto& k : kKindNames)
    if (text == k.name) return k.kind;
  throw Error(Errc::Config, "unknown learner kind '" + text + "'");
}

bool is_tree_ensemble(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::Cart:
    case LearnerKind::RandomForest:
    case LearnerKind::GbmLeafWise:
    case LearnerKind::GbmLevelWise:
    case LearnerKind::AdaBoostR2: return true;
    default: return false;
  }
}

std::string to_string(const ParamValue& value) {
  if (const auto* b = std::get_if<bool>(&value)) return *b ? "true" : "false";
  if (const auto* s = std::get_if<std::string>(&value)) return *s;
  return nlohmann::json(std::get<double>(value)).dump();
}

nlohmann::json to_json(const ParamValue& value) {
  return std::visit([](const auto& v) { return nlohmann::json(v); }, value);
}

ParamValue param_from_json(const nlohmann::json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw Error(Errc::Config, "parameter values must be numbers, booleans or strings, got " + j.dump());
}

const std::vector<ParamDecl>& param_space(LearnerKind kind) {
  static const std::vector<ParamDecl> cart{
      int_param("max_depth", 0, 1e4, 0),
      int_param("min_samples_leaf", 1, 1e6, 1),
  };
  static const std::vector<ParamDecl> forest{
      int_param("n_trees", 1, 1e5, 100),
      real_param("max_features_fraction", 0, 1, true, 1.0),
      bool_param("bootstrap", true),
      int_param("max_depth", 0, 1e4, 0),
      int_param("min_samples_leaf", 1, 1e6, 1),
  };
  static const std::vector<ParamDecl> gbm_leaf = gbm_space(true);
  static const std::vector<ParamDecl> gbm_level = gbm_space(false);
  static const std::vector<ParamDecl> ada{
      int_param("n_estimators", 1, 1e5, 50),
      choice_param("loss", {"linear", "square", "exponential"}, "linear"),
      real_param("learning_rate", 0, 100, true, 1.0),
      int_param("max_depth", 0, 1e4, 3),
  };
  static const std::vector<ParamDecl> knn{int_param("k", 1, 1e9, 5)};
  static const std::vector<ParamDecl> krr{
      real_param("alpha", 0, kBig, false, 1.0),
      choice_param("kernel", {"rbf", "linear"}, "rbf"),
      real_param("gamma", 0, kBig, true, std::nullopt),
  };
  static const std::vector<ParamDecl> svr{
      real_param("c", 0, kBig, true, 1.0),
      real_param("epsilon", 0, kBig, false, 0.1),
      real_param("gamma", 0, kBig, true, std::nullopt),
      real_param("tol", 0, 1, true, 1e-3),
      int_param("max_iter", 1, 1e9, 100000),
  };
  switch (kind) {
    case LearnerKind::Cart: return cart;
    case LearnerKind::RandomForest: return forest;
    case LearnerKind::GbmLeafWise: return gbm_leaf;
    case LearnerKind::GbmLevelWise: return gbm_level;
    case LearnerKind::AdaBoostR2: return ada;
    case LearnerKind::KnnUniform:
    case LearnerKind::KnnDistance: return knn;
    case LearnerKind::Krr: return krr;
    case LearnerKind::Svr: return svr;
  }
  return cart;
}

ParamMap resolve_params(LearnerKind kind, const ParamMap& params) {
  const auto& space = param_space(kind);
  for (const auto& [name, _] : params) {
    if (std::none_of(space.begin(), space.end(), [&](const ParamDecl& d) { return d.name == name; }))
      throw Error(Errc::InvalidParam, to_string(kind) + " has no parameter '" + name + "'");
  }
  ParamMap out;
  for (const auto& decl : space) {
    auto it = params.find(decl.name);
    if (it == params.end()) {
      if (decl.default_value) out[decl.name] = *decl.default_value;
      continue;
    }
    const ParamValue& v = it->second;
    const std::string where = to_string(kind) + "." + decl.name;
    switch (decl.type) {
      case ParamType::Bool:
        if (!std::holds_alternative<bool>(v)) throw Error(Errc::InvalidParam, where + " must be a boolean");
        break;
      case ParamType::Choice: {
        const auto* s = std::get_if<std::string>(&v);
        if (!s || std::find(decl.choices.begin(), decl.choices.end(), *s) == decl.choices.end())
          throw Error(Errc::InvalidParam, where + " = " + to_string(v) + " is not an allowed choice");
        break;
      }
      case ParamType::Int:
      case ParamType::Real: {
        const auto* d = std::get_if<double>(&v);
        if (!d || !std::isfinite(*d)) throw Error(Errc::InvalidParam, where + " must be a finite number");
        if (decl.type == ParamType::Int && std::floor(*d) != *d)
          throw Error(Errc::InvalidParam, where + " must be an integer, got " + to_string(v));
        const bool low_ok = decl.lo_open ? *d > decl.lo : *d >= decl.lo;
        if (!low_ok || *d > decl.hi) {
          std::ostringstream msg;
          msg << where << " = " << *d << " outside " << (decl.lo_open ? "(" : "[") << decl.lo << ", " << decl.hi << "]";
          throw Error(Errc::InvalidParam, msg.str());
        }
        break;
      }
    }
    out[decl.name] = v;
  }
  return out;
}

namespace {

double num(const ParamMap& p, const char* name) { return std::get<double>(p.at(name)); }
std::size_t count(const ParamMap& p, const char* name) { return static_cast<std::size_t>(num(p, name)); }
std::optional<double> opt_num(const ParamMap& p, const char* name) {
  auto it = p.find(name);
  if (it == p.end()) return std::nullopt;
  return std::get<double>(it->second);
}

}  // namespace

CartParams cart_params(const ParamMap& p) { return {count(p, "max_depth"), count(p, "min_samples_leaf")}; }

ForestParams forest_params(const ParamMap& p) {
  return {count(p, "n_trees"), num(p, "max_features_fraction"), std::get<bool>(p.at("bootstrap")),
          count(p, "max_depth"), count(p, "min_samples_leaf")};
}

GbmParams gbm_params(LearnerKind kind, const ParamMap& p) {
  GbmParams g;
  g.n_rounds = count(p, "n_rounds");
  g.learning_rate = num(p, "learning_rate");
  g.max_leaves = kind == LearnerKind::GbmLeafWise ? count(p, "max_leaves") : 0;
  g.max_depth = count(p, "max_depth");
  g.l2_leaf_reg = num(p, "l2_leaf_reg");
  g.subsample_fraction = num(p, "subsample_fraction");
  g.min_samples_leaf = count(p, "min_samples_leaf");
  return g;
}

AdaParams ada_params(const ParamMap& p) {
  AdaParams a;
  a.n_estimators = count(p, "n_estimators");
  const auto& loss = std::get<std::string>(p.at("loss"));
  a.loss = loss == "square" ? AdaLoss::Square : loss == "exponential" ? AdaLoss::Exponential : AdaLoss::Linear;
  a.learning_rate = num(p, "learning_rate");
  a.max_depth = count(p, "max_depth");
  return a;
}

KnnParams knn_params(const ParamMap& p) { return {count(p, "k")}; }

KrrParams krr_params(const ParamMap& p) {
  KrrParams k;
  k.alpha = num(p, "alpha");
  k.kernel = std::get<std::string>(p.at("kernel")) == "linear" ? KernelType::Linear : KernelType::Rbf;
  k.gamma = opt_num(p, "gamma");
  return k;
}

SvrParams svr_params(const ParamMap& p) {
  SvrParams s;
  s.c = num(p, "c");
  s.epsilon = num(p, "epsilon");
  s.gamma = opt_num(p, "gamma");
  s.tol = num(p, "tol");
  s.max_iter = count(p, "max_iter");
  return s;
}

// --- fit / predict -------------------------------------------------------------

TrainedRegressor fit(const LearnerSpec& spec, const DesignMatrix& x, std::span<const double> y) {
  LearnerSpec resolved{spec.kind, resolve_params(spec.kind, spec.params), spec.seed};
  const std::size_t n = x.rows();
  if (y.size() != n)
    throw Error(Errc::LengthMismatch, "X has " + std::to_string(n) + " rows, y has " + std::to_string(y.size()));
  if (x.cols() != x.columns.size()) throw Error(Errc::ColumnMismatch, "design matrix column names do not match its width");
  if (n == 0) throw Error(Errc::TooFewSamples, to_string(spec.kind) + " needs at least one sample");
  if (!x.data.all_finite()) throw Error(Errc::NonFinite, "design matrix has non-finite entries");
  if (!std::all_of(y.begin(), y.end(), [](double v) { return std::isfinite(v); }))
    throw Error(Errc::NonFinite, "target vector has non-finite entries");

  const auto& p = resolved.params;
  auto make = [&](ModelState state) { return TrainedRegressor(resolved, x.columns, std::move(state)); };
  switch (spec.kind) {
    case LearnerKind::Cart: return make(train_cart(x.data, y, cart_params(p)));
    case LearnerKind::RandomForest: return make(train_forest(x.data, y, forest_params(p), spec.seed));
    case LearnerKind::GbmLeafWise:
    case LearnerKind::GbmLevelWise:
      return make(train_gbm(x.data, y, gbm_params(spec.kind, p), spec.kind == LearnerKind::GbmLeafWise, spec.seed));
    case LearnerKind::AdaBoostR2: return make(train_adaboost(x.data, y, ada_params(p), spec.seed));
    case LearnerKind::KnnUniform:
    case LearnerKind::KnnDistance: {
      const auto kp = knn_params(p);
      if (kp.k > n) throw Error(Errc::KTooLarge, "k = " + std::to_string(kp.k) + " exceeds " + std::to_string(n) + " training rows");
      return make(train_knn(x.data, y, kp, spec.kind == LearnerKind::KnnDistance));
    }
    case LearnerKind::Krr:
      if (n < 2) throw Error(Errc::TooFewSamples, "krr needs at least 2 samples");
      return make(train_krr(x.data, y, krr_params(p)));
    case LearnerKind::Svr:
      if (n < 2) throw Error(Errc::TooFewSamples, "svr needs at least 2 samples");
      return make(train_svr(x.data, y, svr_params(p)));
  }
  throw Error(Errc::Unsupported, "unhandled learner kind");
}

namespace {

std::vector<double> predict_tree(const Tree& tree, const Matrix& x) {
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = tree.predict(x.row(i));
  return out;
}

}  // namespace

std::vector<double> predict_rows(const TrainedRegressor& model, const Matrix& x) {
  if (x.rows() == 0) return {};
  if (x.cols() != model.columns().size())
    throw Error(Errc::ColumnMismatch, "model expects " + std::to_string(model.columns().size()) + " columns, got " +
                                          std::to_string(x.cols()));
  struct Visitor {
    const Matrix& x;
    std::vector<double> operator()(const CartModel& m) const { return predict_tree(m.tree, x); }
    std::vector<double> operator()(const ForestModel& m) const { return predict_forest(m, x); }
    std::vector<double> operator()(const GbmModel& m) const { return predict_gbm(m, x); }
    std::vector<double> operator()(const AdaModel& m) const { return predict_adaboost(m, x); }
    std::vector<double> operator()(const KnnModel& m) const { return predict_knn(m, x); }
    std::vector<double> operator()(const KrrModel& m) const { return predict_krr(m, x); }
    std::vector<double> operator()(const SvrModel& m) const { return predict_svr(m, x); }
  };
  return std::visit(Visitor{x}, model.state());
}

std::vector<double> predict(const TrainedRegressor& model, const DesignMatrix& x) {
  if (x.columns != model.columns()) {
    std::string detail = "model expects " + std::to_string(model.columns().size()) + " columns, got " +
                         std::to_string(x.columns.size());
    for (std::size_t i = 0; i < std::min(x.columns.size(), model.columns().size()); ++i)
      if (x.columns[i] != model.columns()[i]) {
        detail += "; first difference at position " + std::to_string(i) + " ('" + model.columns()[i] + "' vs '" +
                  x.columns[i] + "')";
        break;
      }
    throw Error(Errc::ColumnMismatch, detail);
  }
  return predict_rows(model, x.data);
}

// --- importance ----------------------------------------------------------------

namespace {

std::vector<double> normalized(std::vector<double> v) {
  const double total = std::accumulate(v.begin(), v.end(), 0.0);
  if (total > 0)
    for (auto& w : v) w /= total;
  else
    std::fill(v.begin(), v.end(), 0.0);
  return v;
}

}  // namespace

ColumnWeights feature_importance(const TrainedRegressor& model) {
  const std::vector<double>* raw = nullptr;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CartModel> || std::is_same_v<T, ForestModel> ||
                      std::is_same_v<T, GbmModel> || std::is_same_v<T, AdaModel>)
          raw = &m.importance;
      },
      model.state());
  if (!raw) throw Error(Errc::Unsupported, "feature importance is not defined for " + to_string(model.spec().kind));
  const auto weights = normalized(*raw);
  ColumnWeights out;
  for (std::size_t i = 0; i < weights.size(); ++i) out.emplace_back(model.columns()[i], weights[i]);
  return out;
}

ColumnWeights aggregate_by_source(const ColumnWeights& weights, const DesignMatrix& layout) {
  ColumnWeights out;
  for (const auto& [column, w] : weights) {
    auto pos = std::find(layout.columns.begin(), layout.columns.end(), column);
    const std::string source = pos == layout.columns.end() ? column : layout.provenance[pos - layout.columns.begin()];
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& e) { return e.first == source; });
    if (it == out.end()) out.emplace_back(source, w);
    else it->second += w;
  }
  return out;
}

ColumnWeights top_k(ColumnWeights weights, std::size_t k) {
  std::stable_sort(weights.begin(), weights.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  if (weights.size() > k) weights.resize(k);
  return weights;
}

// --- persistence ---------------------------------------------------------------

namespace {

using nlohmann::json;

json tree_json(const Tree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) nodes.push_back(json::array({n.feature, n.threshold, n.left, n.right, n.value}));
  return nodes;
}

Tree tree_from(const json& j) {
  Tree t;
  for (const auto& n : j) t.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(), n.at(4).get<double>()});
  const auto size = static_cast<int>(t.nodes.size());
  if (size == 0) throw Error(Errc::Parse, "empty tree");
  for (const auto& n : t.nodes)
    if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size))
      throw Error(Errc::Parse, "tree node references a missing child");
  return t;
}

json trees_json(const std::vector<Tree>& trees) {
  json arr = json::array();
  for (const auto& t : trees) arr.push_back(tree_json(t));
  return arr;
}

std::vector<Tree> trees_from(const json& j) {
  std::vector<Tree> out;
  for (const auto& t : j) out.push_back(tree_from(t));
  return out;
}

json matrix_json(const Matrix& m) { return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}}; }

Matrix matrix_from(const json& j) {
  return Matrix(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(), j.at("data").get<std::vector<double>>());
}

json scaler_json(const ScalerStats& s) { return json{{"mean", s.mean}, {"scale", s.scale}}; }

ScalerStats scaler_from(const json& j) {
  return ScalerStats{j.at("mean").get<std::vector<double>>(), j.at("scale").get<std::vector<double>>()};
}

const char* kernel_name(KernelType k) { return k == KernelType::Linear ? "linear" : "rbf"; }

KernelType kernel_from(const std::string& s) {
  if (s == "rbf") return KernelType::Rbf;
  if (s == "linear") return KernelType::Linear;
  throw Error(Errc::Parse, "unknown kernel " + s);
}

}  // namespace

nlohmann::json to_json(const LearnerSpec& spec) {
  json params = json::object();
  for (const auto& [k, v] : spec.params) params[k] = to_json(v);
  return json{{"kind", to_string(spec.kind)}, {"params", params}, {"seed", spec.seed}};
}

LearnerSpec learner_spec_from_json(const nlohmann::json& doc) {
  LearnerSpec spec;
  spec.kind = parse_learner_kind(doc.at("kind").get<std::string>());
  if (doc.contains("params"))
    for (const auto& [k, v] : doc.at("params").items()) spec.params[k] = param_from_json(v);
  if (doc.contains("seed")) spec.seed = doc.at("seed").get<std::uint64_t>();
  return spec;
}

nlohmann::json to_json(const TrainedRegressor& model) {
  json doc;
  doc["format"] = "phosml.regressor";
  doc["format_version"] = kRegressorFormatVersion;
  doc["spec"] = to_json(model.spec());
  doc["columns"] = model.columns();
  doc["scaler"] = nullptr;
  json state;
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, CartModel>) {
          state = {{"tree", tree_json(m.tree)}, {"importance", m.importance}};
        } else if constexpr (std::is_same_v<T, ForestModel>) {
          state = {{"trees", trees_json(m.trees)}, {"importance", m.importance}};
        } else if constexpr (std::is_same_v<T, GbmModel>) {
          state = {{"base_score", m.base_score}, {"trees", trees_json(m.trees)}, {"importance", m.importance},
                   {"train_mse", m.train_mse}};
        } else if constexpr (std::is_same_v<T, AdaModel>) {
          state = {{"trees", trees_json(m.trees)}, {"weights", m.weights}, {"importance", m.importance}};
        } else if constexpr (std::is_same_v<T, KnnModel>) {
          doc["scaler"] = scaler_json(m.scaler);
          state = {{"train", matrix_json(m.train)}, {"y", m.y}, {"k", m.k}, {"distance_weighted", m.distance_weighted}};
        } else if constexpr (std::is_same_v<T, KrrModel>) {
          doc["scaler"] = scaler_json(m.scaler);
          state = {{"train", matrix_json(m.train)}, {"dual", m.dual}, {"intercept", m.intercept},
                   {"kernel", kernel_name(m.kernel)}, {"gamma", m.gamma}};
        } else if constexpr (std::is_same_v<T, SvrModel>) {
          doc["scaler"] = scaler_json(m.scaler);
          state = {{"support", matrix_json(m.support)}, {"coef", m.coef}, {"rho", m.rho}, {"gamma", m.gamma},
                   {"y_mean", m.y_mean}, {"y_scale", m.y_scale}, {"iterations", m.iterations}};
        }
      },
      model.state());
  doc["state"] = std::move(state);
  return doc;
}

TrainedRegressor regressor_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "phosml.regressor")
      throw Error(Errc::Parse, "not a regressor document");
    const int version = doc.at("format_version").get<int>();
    if (version != kRegressorFormatVersion)
      throw Error(Errc::VersionMismatch, "regressor format_version " + std::to_string(version) + ", expected " +
                                             std::to_string(kRegressorFormatVersion));
    LearnerSpec spec = learner_spec_from_json(doc.at("spec"));
    spec.params = resolve_params(spec.kind, spec.params);
    auto columns = doc.at("columns").get<std::vector<std::string>>();
    const json& s = doc.at("state");
    auto make = [&](ModelState state) { return TrainedRegressor(spec, columns, std::move(state)); };
    switch (spec.kind) {
      case LearnerKind::Cart:
        return make(CartModel{tree_from(s.at("tree")), s.at("importance").get<std::vector<double>>()});
      case LearnerKind::RandomForest:
        return make(ForestModel{trees_from(s.at("trees")), s.at("importance").get<std::vector<double>>()});
      case LearnerKind::GbmLeafWise:
      case LearnerKind::GbmLevelWise:
        return make(GbmModel{s.at("base_score").get<double>(), trees_from(s.at("trees")),
                             s.at("importance").get<std::vector<double>>(), s.at("train_mse").get<std::vector<double>>()});
      case LearnerKind::AdaBoostR2:
        return make(AdaModel{trees_from(s.at("trees")), s.at("weights").get<std::vector<double>>(),
                             s.at("importance").get<std::vector<double>>()});
      case LearnerKind::KnnUniform:
      case LearnerKind::KnnDistance:
        return make(KnnModel{scaler_from(doc.at("scaler")), matrix_from(s.at("train")), s.at("y").get<std::vector<double>>(),
                             s.at("k").get<std::size_t>(), s.at("distance_weighted").get<bool>()});
      case LearnerKind::Krr:
        return make(KrrModel{scaler_from(doc.at("scaler")), matrix_from(s.at("train")), s.at("dual").get<std::vector<double>>(),
                             s.at("intercept").get<double>(), kernel_from(s.at("kernel").get<std::string>()),
                             s.at("gamma").get<double>()});
      case LearnerKind::Svr:
        return make(SvrModel{scaler_from(doc.at("scaler")), matrix_from(s.at("support")), s.at("coef").get<std::vector<double>>(),
                             s.at("rho").get<double>(), s.at("gamma").get<double>(), s.at("y_mean").get<double>(),
                             s.at("y_scale").get<double>(), s.at("iterations").get<std::size_t>()});
    }
    throw Error(Errc::Parse, "unhandled learner kind");
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::Parse, std::string("regressor document: ") + e.what());
  }
}

}  // namespace phosml
