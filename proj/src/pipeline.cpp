#include "phosml/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace phosml {

using nlohmann::json;

namespace {

const std::vector<std::string> kStages = {"config", "load", "split", "tune", "train", "stack",
                                          "evaluate", "predict", "importance", "write"};

template <typename F>
auto in_stage(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string num(double v) { return json(v).dump(); }

std::string fixed(double v, int decimals = 2) {
  if (!std::isfinite(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
  return s;
}

std::string file_label(const std::string& label) {
  std::string out;
  for (char ch : label) {
    if (std::isalnum(static_cast<unsigned char>(ch))) out += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    else if (ch == '-' || ch == '_') out += '_';
  }
  return out;
}

Dataset load_data(const PipelineConfig& config) {
  return in_stage("load", [&] {
    if (config.dataset.empty()) throw Error(Errc::Config, "no dataset path given");
    return load_dataset(config.dataset, config.schema());
  });
}

struct FoldRuns {
  std::vector<FoldPrediction> held;
  std::vector<FoldPrediction> test;
};

FoldRuns fold_runs(const LearnerSpec& spec, const DesignMatrix& x, std::span<const double> y,
                   const std::vector<std::vector<std::size_t>>& folds, const DesignMatrix& x_test,
                   std::span<const double> y_test) {
  FoldRuns runs;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    std::vector<std::size_t> train;
    for (std::size_t g = 0; g < folds.size(); ++g)
      if (g != f) train.insert(train.end(), folds[g].begin(), folds[g].end());
    std::sort(train.begin(), train.end());
    const auto model = fit(spec, x.select_rows(train), select(y, train));
    runs.held.push_back({select(y, folds[f]), predict(model, x.select_rows(folds[f]))});
    if (x_test.rows() > 0)
      runs.test.push_back({std::vector<double>(y_test.begin(), y_test.end()), predict(model, x_test)});
  }
  return runs;
}

LearnerSpec overlay(LearnerSpec spec, const ParamMap& params) {
  for (const auto& [k, v] : params) spec.params[k] = v;
  spec.params = resolve_params(spec.kind, spec.params);
  return spec;
}

// Tunes (when a budget is set), cross-validates and refits one learner.
LearnerOutcome evaluate_learner(const std::string& label, const LearnerSpec& spec, const SearchSpace& space,
                                std::size_t budget, std::uint64_t seed, const DesignMatrix& x,
                                std::span<const double> y, const std::vector<std::vector<std::size_t>>& folds,
                                const DesignMatrix& x_test, std::span<const double> y_test, R2Definition def) {
  LearnerOutcome o;
  o.label = label;
  o.spec = spec;
  if (budget > 0 && !space.empty()) {
    o.search = in_stage("tune", [&] {
      return random_search(spec, space, budget, x, y, folds, derive_seed(seed, fnv1a(label)));
    });
    o.spec = overlay(spec, o.search->best.params);
  }
  in_stage("evaluate", [&] {
    auto runs = fold_runs(o.spec, x, y, folds, x_test, y_test);
    o.cv_folds = std::move(runs.held);
    o.test_folds = std::move(runs.test);
  });
  in_stage("train", [&] {
    o.full_model = fit(o.spec, x, y);
    if (x_test.rows() > 0) {
      o.test_pred = predict(*o.full_model, x_test);
      o.test = score(y_test, o.test_pred, def);
    }
  });
  return o;
}

LearnerSpec roster_spec(const PipelineConfig& config, const std::vector<LearnerOutcome>* tuned, const std::string& label) {
  if (tuned)
    for (const auto& o : *tuned)
      if (o.label == label) return o.spec;
  for (const auto& e : config.learners)
    if (e.label == label) return e.spec;
  return default_learner(label, config.seed).spec;
}

StackArchitecture architecture(const PipelineConfig& config, const std::vector<LearnerOutcome>* tuned) {
  StackArchitecture arch;
  if (config.stack.preset == "custom") {
    for (const auto& label : config.stack.bases) arch.bases.push_back({label, roster_spec(config, tuned, label)});
    arch.meta = default_learner(config.stack.meta, config.seed);
    arch.meta_features = config.stack.meta_features;
  } else {
    arch = stack_preset(parse_target_kind(config.stack.preset), config.seed);
    for (auto& base : arch.bases) base.spec = roster_spec(config, tuned, base.name);
  }
  arch.oof = config.stack.oof;
  arch.oof_k = config.split.k;
  return arch;
}

EvalReport make_report(const std::string& title, const PipelineConfig& config, const std::vector<LearnerOutcome>& outcomes,
                       bool test) {
  const auto target = config.target_spec();
  EvalReport report{title, to_string(target.kind), target.unit(), config.r2_definition, {}};
  for (const auto& o : outcomes) {
    const auto& folds = test ? o.test_folds : o.cv_folds;
    if (folds.empty()) continue;
    report.rows.push_back(cv_report(o.label, folds, config.r2_definition));
  }
  return report;
}

ColumnWeights sorted_desc(ColumnWeights w) {
  std::stable_sort(w.begin(), w.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  return w;
}

DesignMatrix layout_of(const std::vector<std::string>& columns) {
  DesignMatrix layout;
  layout.columns = columns;
  for (const auto& c : columns) {
    const auto eq = c.find('=');
    layout.provenance.push_back(eq == std::string::npos || c.rfind("pred:", 0) == 0 ? c : c.substr(0, eq));
  }
  return layout;
}

struct ScoreRow {
  std::string model;
  HeldOutScore s;
};

std::string render_scores(const std::string& title, const std::string& unit, R2Definition def,
                          const std::vector<ScoreRow>& rows) {
  const std::string u = unit.empty() ? "" : " (" + unit + ")";
  std::vector<std::vector<std::string>> cells{
      {"Model", "MAE" + u, "RMSE" + u, def == R2Definition::Determination ? "R2" : "R2 (pearson)"}};
  for (const auto& r : rows) cells.push_back({r.model, fixed(r.s.mae), fixed(r.s.rmse), fixed(r.s.r2)});
  std::vector<std::size_t> widths(4, 0);
  auto width = [](const std::string& s) {
    std::size_t n = 0;
    for (unsigned char ch : s) n += (ch & 0xC0) != 0x80;
    return n;
  };
  for (const auto& row : cells)
    for (std::size_t c = 0; c < 4; ++c) widths[c] = std::max(widths[c], width(row[c]));
  std::ostringstream out;
  out << title << '\n';
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t c = 0; c < 4; ++c) {
      out << cells[i][c];
      if (c + 1 < 4) out << std::string(widths[c] - width(cells[i][c]) + 2, ' ');
    }
    out << '\n';
    if (i == 0) out << std::string(widths[0] + widths[1] + widths[2] + widths[3] + 6, '-') << '\n';
  }
  return out.str();
}

json score_json(const HeldOutScore& s) { return json{{"mae", s.mae}, {"rmse", s.rmse}, {"r2", s.r2}}; }

json weights_json(const ColumnWeights& w) {
  json out = json::array();
  for (const auto& [name, weight] : w) out.push_back({{"name", name}, {"weight", weight}});
  return out;
}

std::string stack_description(const StackArchitecture& arch) {
  std::string bases;
  for (const auto& b : arch.bases) bases += (bases.empty() ? "" : ", ") + b.name;
  return "bases " + bases + "; meta " + arch.meta.name + " on " +
         (arch.meta_features == MetaFeatures::BasePredictionsOnly ? "base predictions only" : "features + base predictions") +
         "; " + (arch.oof == OofMode::OutOfFold ? std::to_string(arch.oof_k) + "-fold out-of-fold" : "in-sample") +
         " meta features";
}

json target_json(const TargetSpec& t) {
  return json{{"kind", to_string(t.kind)},
              {"transform", t.transform == TargetTransform::Log10 ? "log10" : "identity"},
              {"feature_mask", std::vector<std::string>(t.feature_mask.begin(), t.feature_mask.end())}};
}

json wrap(const PipelineConfig& config, const std::string& type, json model) {
  return json{{"format", "phosml.model"},
              {"format_version", kModelFormatVersion},
              {"config_hash", config_hash(config)},
              {"seed", config.seed},
              {"target", target_json(config.target_spec())},
              {"excited_states", config.excited_states},
              {"model_type", type},
              {"model", std::move(model)}};
}

void write_json(const std::filesystem::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

std::filesystem::path out_dir(const PipelineConfig& config) {
  return in_stage("write", [&] {
    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    if (ec) throw Error(Errc::Io, "cannot create output directory " + config.output_dir + ": " + ec.message());
    return std::filesystem::path(config.output_dir);
  });
}

json split_document(const PipelineConfig& config, const Prepared& p) {
  json doc{{"format", "phosml.split"}, {"format_version", 1}, {"config_hash", config_hash(config)},
           {"seed", config.split.seed}, {"plan", to_json(p.plan)}};
  std::vector<std::string> train_ids, test_ids;
  for (auto i : p.plan.train_indices) train_ids.push_back(p.ids[i]);
  for (auto i : p.plan.test_indices) test_ids.push_back(p.ids[i]);
  doc["train_ids"] = train_ids;
  doc["test_ids"] = test_ids;
  return doc;
}

}  // namespace

int stage_exit_code(const std::string& stage) {
  auto it = std::find(kStages.begin(), kStages.end(), stage);
  return it == kStages.end() ? 1 : static_cast<int>(it - kStages.begin()) + 2;
}

std::string artifact_header(const std::string& hash, std::uint64_t seed) {
  return "# phosml config_hash=" + hash + " seed=" + std::to_string(seed) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

Prepared prepare(const PipelineConfig& config, const Dataset& dataset) {
  Prepared p;
  p.target = config.target_spec();
  for (const auto& s : dataset.samples()) p.ids.push_back(s.id);
  p.encoded = in_stage("load", [&] { return encode(dataset, p.target); });
  in_stage("split", [&] {
    p.plan = spxy_split(p.encoded.x.data, p.encoded.y, config.split.train_fraction,
                        SpxyOptions{config.split.spxy_on_standardized});
    p.plan = kfold_assign(std::move(p.plan), config.split.k, config.split.seed);
  });
  p.x_train = p.encoded.x.select_rows(p.plan.train_indices);
  p.y_train = select(p.encoded.y, p.plan.train_indices);
  p.x_test = p.encoded.x.select_rows(p.plan.test_indices);
  p.y_test = select(p.encoded.y, p.plan.test_indices);
  return p;
}

HeldOutScore score(std::span<const double> y_true, std::span<const double> y_pred, R2Definition def) {
  return HeldOutScore{mae(y_true, y_pred), rmse(y_true, y_pred),
                      def == R2Definition::Determination ? r2(y_true, y_pred) : pearson_r2(y_true, y_pred)};
}

RunResult run_pipeline(const PipelineConfig& config, const Dataset& dataset) {
  RunResult r;
  r.config_hash = config_hash(config);
  r.seed = config.seed;
  r.prepared = prepare(config, dataset);
  const Prepared& p = r.prepared;
  const auto& folds = p.plan.folds;
  const auto def = config.r2_definition;

  for (const auto& e : config.learners)
    r.learners.push_back(evaluate_learner(e.label, e.spec, e.space, e.budget, config.seed, p.x_train, p.y_train, folds,
                                          p.x_test, p.y_test, def));
  r.cv_report = make_report("Cross-validation on the training set", config, r.learners, false);
  r.test_report = make_report("Independent test set (fold models)", config, r.learners, true);
  if (p.x_test.rows() > 0) {
    for (const auto& o : r.learners)
      if (r.best_single.empty() || o.test.r2 > r.best_single_test.r2) {
        r.best_single = o.label;
        r.best_single_test = o.test;
      }
  }

  // Stack: OOF matrix once, full-data bases once, then each meta candidate.
  StackArchitecture arch = architecture(config, &r.learners);
  const OofResult oof = in_stage("stack", [&] { return build_oof_matrix(arch, p.x_train, p.y_train, folds); });
  std::vector<TrainedRegressor> bases;
  in_stage("stack", [&] {
    for (const auto& b : arch.bases) bases.push_back(fit(b.spec, p.x_train, p.y_train));
  });

  std::vector<std::string> candidates = config.stack.meta_candidates;
  if (std::find(candidates.begin(), candidates.end(), arch.meta.name) == candidates.end())
    candidates.push_back(arch.meta.name);
  auto tune_meta = [&](const std::string& label, const DesignMatrix& test_meta) {
    const auto spec = default_learner(label, config.seed).spec;
    return evaluate_learner(label, spec, default_search_space(label), config.stack.meta_budget,
                            derive_seed(config.seed, 1), oof.meta, p.y_train, folds, test_meta, p.y_test, def);
  };

  // The preset meta learner comes first: its fitted stack supplies the
  // test-set meta features the other candidates are scored on.
  const DesignMatrix no_test;
  LearnerOutcome chosen = tune_meta(arch.meta.name, no_test);
  arch.meta.spec = chosen.spec;
  r.stack.emplace(arch, p.x_train.columns, std::move(bases), *chosen.full_model, oof.meta.columns);
  const DesignMatrix test_meta = in_stage("stack", [&] { return stack_meta_features(*r.stack, p.x_test); });
  for (const auto& label : candidates) {
    if (label == arch.meta.name && test_meta.rows() == 0) {
      r.metas.push_back(chosen);
      continue;
    }
    r.metas.push_back(tune_meta(label, test_meta));
  }
  r.meta_cv_report = make_report("Meta-learner comparison: cross-validation on out-of-fold meta features", config, r.metas, false);
  r.meta_test_report = make_report("Meta-learner comparison: independent test set (fold models)", config, r.metas, true);

  if (p.x_test.rows() > 0) {
    r.stack_test_pred = predict_rows(r.stack->meta(), test_meta.data);
    r.stack_test = score(p.y_test, r.stack_test_pred, def);
  }

  for (const auto& o : r.learners) {
    if (o.label != config.importance_model || !o.full_model || !is_tree_ensemble(o.spec.kind)) continue;
    const auto w = in_stage("importance", [&] { return feature_importance(*o.full_model); });
    r.importance = sorted_desc(w);
    r.importance_source = sorted_desc(aggregate_by_source(w, p.x_train));
  }
  return r;
}

std::string render_report(const PipelineConfig& config, const RunResult& r) {
  const auto& p = r.prepared;
  const auto target = config.target_spec();
  std::ostringstream out;
  out << artifact_header(r.config_hash, r.seed);
  out << "target: " << to_string(target.kind) << " (" << target.unit() << ")\n";
  out << "samples: " << p.ids.size() << " (train " << p.plan.train_indices.size() << ", test "
      << p.plan.test_indices.size() << "; SPXY on " << (config.split.spxy_on_standardized ? "standardized" : "raw")
      << " features)\n";
  out << "cross-validation: " << p.plan.folds.size() << "-fold, fold seed " << config.split.seed << "\n";
  out << "encoded columns: " << p.x_train.cols() << "\n";
  for (const auto& o : r.learners)
    if (o.search)
      out << "tuned " << o.label << ": " << o.search->trials.size() << " trials, best #" << o.search->best.index
          << " (CV RMSE " << format_pm(o.search->best.rmse) << ")\n";
  out << '\n' << render_table(r.cv_report) << '\n' << render_table(r.test_report);
  out << '\n' << render_table(r.meta_cv_report) << '\n' << render_table(r.meta_test_report);

  if (!p.plan.test_indices.empty()) {
    std::vector<ScoreRow> rows;
    for (const auto& o : r.learners) rows.push_back({o.label, o.test});
    rows.push_back({"Stack", r.stack_test});
    out << '\n'
        << render_scores("Independent test set (models refit on the full training set)", target.unit(),
                         config.r2_definition, rows);
    out << "best single learner: " << r.best_single << " (R2 " << fixed(r.best_single_test.r2, 4) << "); stack R2 "
        << fixed(r.stack_test.r2, 4) << " (difference " << (r.stack_test.r2 >= r.best_single_test.r2 ? "+" : "")
        << fixed(r.stack_test.r2 - r.best_single_test.r2, 4) << ")\n";
  }
  out << "stack: " << stack_description(r.stack->architecture()) << "\n";

  if (r.importance) {
    out << "\nTop " << config.importance_top << " features (" << config.importance_model << ", impurity decrease)\n";
    const auto top = top_k(*r.importance, config.importance_top);
    for (std::size_t i = 0; i < top.size(); ++i)
      out << (i + 1 < 10 ? " " : "") << i + 1 << "  " << top[i].first << "  " << fixed(top[i].second, 4) << '\n';
    out << "\nTop " << config.importance_top << " source features\n";
    const auto src = top_k(*r.importance_source, config.importance_top);
    for (std::size_t i = 0; i < src.size(); ++i)
      out << (i + 1 < 10 ? " " : "") << i + 1 << "  " << src[i].first << "  " << fixed(src[i].second, 4) << '\n';
  }
  return out.str();
}

json report_json(const PipelineConfig& config, const RunResult& r) {
  const auto& p = r.prepared;
  json doc{{"format", "phosml.report"},
           {"format_version", 1},
           {"config_hash", r.config_hash},
           {"seed", r.seed},
           {"target", target_json(config.target_spec())},
           {"unit", config.target_spec().unit()},
           {"n_train", p.plan.train_indices.size()},
           {"n_test", p.plan.test_indices.size()},
           {"folds", p.plan.folds.size()},
           {"cv", to_json(r.cv_report)},
           {"test", to_json(r.test_report)},
           {"meta_cv", to_json(r.meta_cv_report)},
           {"meta_test", to_json(r.meta_test_report)},
           {"stack", to_json(r.stack->architecture())}};
  json params = json::object();
  for (const auto& o : r.learners) params[o.label] = to_json(o.spec);
  doc["learners"] = params;
  if (!p.plan.test_indices.empty()) {
    json held = json::object();
    for (const auto& o : r.learners) held[o.label] = score_json(o.test);
    doc["held_out"] = held;
    doc["stack_held_out"] = score_json(r.stack_test);
    doc["best_single"] = {{"model", r.best_single}, {"score", score_json(r.best_single_test)}};
  }
  if (r.importance) {
    doc["importance"] = {{"model", config.importance_model},
                         {"columns", weights_json(top_k(*r.importance, config.importance_top))},
                         {"sources", weights_json(top_k(*r.importance_source, config.importance_top))}};
  }
  return doc;
}

std::vector<std::filesystem::path> write_run_artifacts(const PipelineConfig& config, const RunResult& r) {
  const auto dir = out_dir(config);
  std::vector<std::filesystem::path> written;
  const auto header = artifact_header(r.config_hash, r.seed);
  const auto& p = r.prepared;
  const auto target = config.target_spec();
  in_stage("write", [&] {
    auto put_text = [&](const std::string& name, const std::string& text) {
      write_text(dir / name, text);
      written.push_back(dir / name);
    };
    auto put_json = [&](const std::string& name, const json& doc) {
      write_json(dir / name, doc);
      written.push_back(dir / name);
    };
    json cfg = to_json(config);
    cfg["config_hash"] = r.config_hash;
    put_json("config.json", cfg);
    put_json("split_plan.json", split_document(config, p));
    for (const auto& o : r.learners)
      if (o.search) put_text("trials_" + file_label(o.label) + ".csv", header + trials_csv(*o.search));
    for (const auto& o : r.metas)
      if (o.search) put_text("trials_meta_" + file_label(o.label) + ".csv", header + trials_csv(*o.search));
    put_text("report.txt", render_report(config, r));
    put_json("report.json", report_json(config, r));
    put_text("cv_table.csv", header + render_csv(r.cv_report));
    put_text("test_table.csv", header + render_csv(r.test_report));
    put_text("meta_cv_table.csv", header + render_csv(r.meta_cv_report));
    put_text("meta_test_table.csv", header + render_csv(r.meta_test_report));
    put_json("stack_model.json", model_document(config, *r.stack));

    if (r.importance) {
      std::ostringstream imp;
      imp << header << "scope,rank,name,weight\n";
      for (std::size_t i = 0; i < r.importance->size(); ++i)
        imp << "column," << i + 1 << ',' << (*r.importance)[i].first << ',' << num((*r.importance)[i].second) << '\n';
      for (std::size_t i = 0; i < r.importance_source->size(); ++i)
        imp << "source," << i + 1 << ',' << (*r.importance_source)[i].first << ','
            << num((*r.importance_source)[i].second) << '\n';
      put_text("importance.csv", imp.str());
    }

    // Stack predictions: held-out meta CV predictions on the training set,
    // full stack on the test set.
    std::ostringstream sc;
    sc << header << "id,set,y_true,y_pred,y_true_natural,y_pred_natural\n";
    auto row = [&](std::size_t dataset_row, const char* set, double yt, double yp) {
      sc << p.ids[dataset_row] << ',' << set << ',' << num(yt) << ',' << num(yp) << ',' << num(target.inverse(yt)) << ','
         << num(target.inverse(yp)) << '\n';
    };
    const auto& meta_name = r.stack->architecture().meta.name;
    for (const auto& o : r.metas) {
      if (o.label != meta_name) continue;
      for (std::size_t f = 0; f < p.plan.folds.size(); ++f)
        for (std::size_t k = 0; k < p.plan.folds[f].size(); ++k)
          row(p.plan.train_indices[p.plan.folds[f][k]], "train_cv", o.cv_folds[f].y_true[k], o.cv_folds[f].y_pred[k]);
      break;
    }
    for (std::size_t k = 0; k < p.plan.test_indices.size(); ++k)
      row(p.plan.test_indices[k], "test", p.y_test[k], r.stack_test_pred[k]);
    put_text("scatter.csv", sc.str());
  });
  return written;
}

RunResult cmd_run(const PipelineConfig& config) {
  const Dataset data = load_data(config);
  // fail fast on an impossible fold count before any training
  in_stage("split", [&] {
    const auto n_train = static_cast<std::size_t>(std::llround(config.split.train_fraction * static_cast<double>(data.size())));
    if (config.split.k > n_train)
      throw Error(Errc::KTooLarge, "k = " + std::to_string(config.split.k) + " exceeds the " + std::to_string(n_train) +
                                       " training samples");
  });
  RunResult r = run_pipeline(config, data);
  write_run_artifacts(config, r);
  return r;
}

json model_document(const PipelineConfig& config, const TrainedRegressor& model) {
  return wrap(config, "regressor", to_json(model));
}

json model_document(const PipelineConfig& config, const StackModel& model) {
  return wrap(config, "stack", to_json(model));
}

std::vector<double> LoadedModel::predict(const DesignMatrix& x) const {
  return stack ? predict_stack(*stack, x) : phosml::predict(*regressor, x);
}

const std::vector<std::string>& LoadedModel::input_columns() const {
  return stack ? stack->input_columns() : regressor->columns();
}

LoadedModel load_model(const json& doc) {
  if (!doc.is_object() || doc.value("format", "") != "phosml.model")
    throw Error(Errc::Parse, "not a phosml model document");
  if (doc.at("format_version").get<int>() != kModelFormatVersion)
    throw Error(Errc::VersionMismatch, "model format_version " + doc.at("format_version").dump() + ", expected " +
                                           std::to_string(kModelFormatVersion));
  LoadedModel m;
  try {
    m.config_hash = doc.at("config_hash").get<std::string>();
    m.seed = doc.at("seed").get<std::uint64_t>();
    const auto& t = doc.at("target");
    const auto mask = t.at("feature_mask").get<std::vector<std::string>>();
    m.target = TargetSpec::make(parse_target_kind(t.at("kind").get<std::string>()),
                                std::set<std::string>(mask.begin(), mask.end()));
    m.excited_states = doc.at("excited_states").get<std::vector<std::string>>();
    const auto type = doc.at("model_type").get<std::string>();
    if (type == "stack") m.stack.emplace(stack_from_json(doc.at("model")));
    else if (type == "regressor") m.regressor.emplace(regressor_from_json(doc.at("model")));
    else throw Error(Errc::Parse, "unknown model_type '" + type + "'");
  } catch (const json::exception& e) {
    throw Error(Errc::Parse, std::string("model document: ") + e.what());
  }
  return m;
}

LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open model " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::Parse, path.string() + ": " + e.what());
  }
  return load_model(doc);
}

PredictOutput cmd_predict(const LoadedModel& model, const Dataset& dataset) {
  const auto x = in_stage("load", [&] { return encode_features(dataset, model.target.feature_mask); });
  const auto yhat = in_stage("predict", [&] { return model.predict(x); });
  const auto kind = model.target.kind;

  std::ostringstream csv;
  csv << artifact_header(model.config_hash, model.seed);
  csv << (kind == TargetKind::Wavelength ? "id,wavelength_nm\n" : kind == TargetKind::Kr ? "id,kr_per_s,log10_kr_per_s\n" : "id,plqy\n");
  std::vector<double> reported(yhat.size());
  for (std::size_t i = 0; i < yhat.size(); ++i) {
    const auto& id = dataset.samples()[i].id;
    switch (kind) {
      case TargetKind::Wavelength:
        reported[i] = yhat[i];
        csv << id << ',' << num(yhat[i]) << '\n';
        break;
      case TargetKind::Kr:
        reported[i] = yhat[i];
        csv << id << ',' << num(model.target.inverse(yhat[i])) << ',' << num(yhat[i]) << '\n';
        break;
      case TargetKind::Plqy:
        reported[i] = std::clamp(yhat[i], 0.0, 1.0);
        csv << id << ',' << num(reported[i]) << '\n';
        break;
    }
  }

  PredictOutput out{csv.str(), std::nullopt};
  std::vector<double> truth;
  for (const auto& s : dataset.samples()) {
    const auto t = model.target.target_of(s);
    if (!t) break;
    truth.push_back(model.target.forward(*t));
  }
  if (!truth.empty() && truth.size() == dataset.size()) {
    const auto s = in_stage("evaluate", [&] { return score(truth, reported, R2Definition::Determination); });
    out.report = artifact_header(model.config_hash, model.seed) +
                 render_scores("External test set (" + std::to_string(truth.size()) + " samples)", model.target.unit(),
                               R2Definition::Determination, {{model.stack ? "Stack" : to_string(model.regressor->spec().kind), s}});
  }
  return out;
}

PredictOutput cmd_predict(const std::filesystem::path& model_path, const std::filesystem::path& data_path) {
  const auto model = in_stage("load", [&] { return load_model(model_path); });
  const auto data = in_stage("load", [&] { return load_dataset(data_path, FeatureSchema::pt_emitters(model.excited_states)); });
  return cmd_predict(model, data);
}

SplitPlan cmd_split(const PipelineConfig& config) {
  const auto p = prepare(config, load_data(config));
  in_stage("write", [&] { write_json(out_dir(config) / "split_plan.json", split_document(config, p)); });
  return p.plan;
}

SearchResult cmd_tune(const PipelineConfig& config, const std::string& label) {
  const auto& entry = in_stage("config", [&]() -> const LearnerEntry& { return config.learner(label); });
  if (entry.budget == 0 || entry.space.empty())
    throw StageError("config", Error(Errc::Config, "learner '" + label + "' has no search space or a zero budget"));
  const auto p = prepare(config, load_data(config));
  auto result = in_stage("tune", [&] {
    return random_search(entry.spec, entry.space, entry.budget, p.x_train, p.y_train, p.plan.folds,
                         derive_seed(config.seed, fnv1a(label)));
  });
  in_stage("write", [&] {
    write_text(out_dir(config) / ("trials_" + file_label(label) + ".csv"),
               artifact_header(config_hash(config), config.seed) + trials_csv(result));
  });
  return result;
}

TrainedRegressor cmd_train(const PipelineConfig& config, const std::string& label) {
  const auto& entry = in_stage("config", [&]() -> const LearnerEntry& { return config.learner(label); });
  const auto p = prepare(config, load_data(config));
  auto model = in_stage("train", [&] { return fit(entry.spec, p.x_train, p.y_train); });
  in_stage("write", [&] {
    write_json(out_dir(config) / ("model_" + file_label(label) + ".json"), model_document(config, model));
  });
  return model;
}

StackModel cmd_stack(const PipelineConfig& config) {
  const auto p = prepare(config, load_data(config));
  const auto arch = architecture(config, nullptr);
  auto model = in_stage("stack", [&] { return train_stack(arch, p.x_train, p.y_train, p.plan.folds); });
  in_stage("write", [&] { write_json(out_dir(config) / "stack_model.json", model_document(config, model)); });
  return model;
}

EvalReport cmd_evaluate(const PipelineConfig& config) {
  const auto p = prepare(config, load_data(config));
  std::vector<LearnerOutcome> outcomes;
  for (const auto& e : config.learners) {
    LearnerOutcome o;
    o.label = e.label;
    o.cv_folds = in_stage("evaluate", [&] { return cross_validate(e.spec, p.x_train, p.y_train, p.plan.folds); });
    outcomes.push_back(std::move(o));
  }
  auto report = make_report("Cross-validation on the training set", config, outcomes, false);
  in_stage("write", [&] {
    const auto header = artifact_header(config_hash(config), config.seed);
    write_text(out_dir(config) / "evaluate.txt", header + render_table(report));
    write_text(out_dir(config) / "evaluate.csv", header + render_csv(report));
  });
  return report;
}

std::string cmd_importance(const LoadedModel& model, std::size_t top) {
  std::vector<const TrainedRegressor*> models;
  std::vector<std::string> names;
  if (model.regressor) {
    models.push_back(&*model.regressor);
    names.push_back(to_string(model.regressor->spec().kind));
  } else {
    const auto& arch = model.stack->architecture();
    for (std::size_t b = 0; b < model.stack->bases().size(); ++b) {
      models.push_back(&model.stack->bases()[b]);
      names.push_back(arch.bases[b].name);
    }
    models.push_back(&model.stack->meta());
    names.push_back("meta:" + arch.meta.name);
  }
  std::ostringstream out;
  out << artifact_header(model.config_hash, model.seed) << "model,scope,rank,name,weight\n";
  bool any = false;
  for (std::size_t m = 0; m < models.size(); ++m) {
    if (!is_tree_ensemble(models[m]->spec().kind)) continue;
    any = true;
    const auto w = in_stage("importance", [&] { return feature_importance(*models[m]); });
    const auto cols = top_k(sorted_desc(w), top);
    for (std::size_t i = 0; i < cols.size(); ++i)
      out << names[m] << ",column," << i + 1 << ',' << cols[i].first << ',' << num(cols[i].second) << '\n';
    const auto src = top_k(sorted_desc(aggregate_by_source(w, layout_of(models[m]->columns()))), top);
    for (std::size_t i = 0; i < src.size(); ++i)
      out << names[m] << ",source," << i + 1 << ',' << src[i].first << ',' << num(src[i].second) << '\n';
  }
  if (!any) throw StageError("importance", Error(Errc::Unsupported, "model has no tree-based component"));
  return out.str();
}

}  // namespace phosml
