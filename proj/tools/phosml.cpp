#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "phosml/config.hpp"
#include "phosml/kernels.hpp"
#include "phosml/pipeline.hpp"
#include "phosml/synthetic.hpp"

using nlohmann::json;

namespace {

struct ConfigFlags {
  std::string config_path;
  std::optional<std::string> dataset;
  std::optional<std::string> target;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output;
  std::optional<std::size_t> k;
  std::optional<double> train_fraction;
  std::optional<std::size_t> budget;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& f) {
  cmd->add_option("-c,--config", f.config_path, "JSON config file");
  cmd->add_option("--dataset", f.dataset, "dataset CSV (overrides config)");
  cmd->add_option("--target", f.target, "wavelength | kr | plqy (overrides config)");
  cmd->add_option("--seed", f.seed, "base seed (overrides config)");
  cmd->add_option("-o,--output", f.output, "output directory (overrides config)");
  cmd->add_option("-k,--folds", f.k, "number of CV folds (overrides config)");
  cmd->add_option("--train-fraction", f.train_fraction, "SPXY training fraction (overrides config)");
  cmd->add_option("--budget", f.budget, "random-search trials per learner (overrides config)");
}

phosml::PipelineConfig resolve_config(const ConfigFlags& f) {
  json doc = json::object();
  std::filesystem::path base;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw phosml::Error(phosml::Errc::Io, "cannot open config " + f.config_path);
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw phosml::Error(phosml::Errc::Config, f.config_path + ": " + e.what());
    }
    base = std::filesystem::path(f.config_path).parent_path();
    if (doc.contains("dataset") && doc["dataset"].is_string()) {
      std::filesystem::path data = doc["dataset"].get<std::string>();
      if (data.is_relative() && !base.empty()) doc["dataset"] = (base / data).lexically_normal().string();
    }
  }
  if (f.dataset) doc["dataset"] = *f.dataset;
  if (f.target) doc["target"] = *f.target;
  if (f.seed) doc["seed"] = *f.seed;
  if (f.output) doc["output_dir"] = *f.output;
  if (f.k) doc["split"]["k"] = *f.k;
  if (f.train_fraction) doc["split"]["train_fraction"] = *f.train_fraction;
  if (f.budget) {
    doc["tuning"]["budget"] = *f.budget;
    if (doc.contains("learners"))
      for (auto& e : doc["learners"]) e["budget"] = *f.budget;
    doc["stack"]["meta_budget"] = *f.budget;
  }
  return phosml::config_from_json(doc);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phosml: stacked-ensemble property prediction for Pt(II) phosphorescent emitters"};
  app.require_subcommand(1);
  std::optional<int> threads;
  app.add_option("--threads", threads, "worker threads (default: PHOSML_THREADS or all cores)");

  ConfigFlags flags;
  auto* run = app.add_subcommand("run", "split, tune, cross-validate, stack and report");
  auto* split = app.add_subcommand("split", "write the SPXY split and CV folds");
  auto* tune = app.add_subcommand("tune", "random search for one roster learner");
  auto* train = app.add_subcommand("train", "fit one roster learner on the training split");
  auto* stack = app.add_subcommand("stack", "fit the configured stack on the training split");
  auto* evaluate = app.add_subcommand("evaluate", "cross-validate the roster with configured parameters");
  for (auto* cmd : {run, split, tune, train, stack, evaluate}) add_config_flags(cmd, flags);
  std::string learner;
  tune->add_option("-l,--learner", learner, "roster label, e.g. GBM")->required();
  train->add_option("-l,--learner", learner, "roster label, e.g. GBM")->required();

  std::string model_path, data_path, out_path;
  auto* predict = app.add_subcommand("predict", "predict a dataset with a saved model");
  predict->add_option("-m,--model", model_path, "model JSON")->required();
  predict->add_option("-d,--data", data_path, "dataset CSV")->required();
  predict->add_option("-o,--out", out_path, "predictions CSV (default: stdout)");

  std::size_t top = 10;
  auto* importance = app.add_subcommand("importance", "feature importance of a saved tree model or stack");
  importance->add_option("-m,--model", model_path, "model JSON")->required();
  importance->add_option("--top", top, "entries per table");

  std::size_t rows = 206;
  std::uint64_t synth_seed = 7;
  auto* synth = app.add_subcommand("synth", "write a synthetic demo dataset");
  synth->add_option("-n,--rows", rows, "number of emitters");
  synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("-o,--out", out_path, "CSV path")->required();

  CLI11_PARSE(app, argc, argv);
  if (threads) phosml::kernels::set_thread_count(*threads);

  try {
    if (synth->parsed()) {
      std::ofstream out(out_path, std::ios::binary);
      if (!out) throw phosml::Error(phosml::Errc::Io, "cannot write " + out_path);
      phosml::write_dataset(out, phosml::synthetic_emitters(rows, synth_seed));
      return 0;
    }
    if (predict->parsed()) {
      const auto result = phosml::cmd_predict(model_path, data_path);
      if (out_path.empty()) {
        std::cout << result.csv;
      } else {
        phosml::write_text(out_path, result.csv);
        if (result.report) phosml::write_text(out_path + ".report.txt", *result.report);
      }
      if (result.report) std::cerr << *result.report;
      return 0;
    }
    if (importance->parsed()) {
      std::cout << phosml::cmd_importance(phosml::load_model(std::filesystem::path(model_path)), top);
      return 0;
    }

    phosml::PipelineConfig config;
    try {
      config = resolve_config(flags);
    } catch (const phosml::Error& e) {
      throw phosml::StageError("config", e);
    }
    if (run->parsed()) {
      const auto r = phosml::cmd_run(config);
      std::cout << phosml::render_report(config, r);
      std::cerr << "artifacts written to " << config.output_dir << "\n";
    } else if (split->parsed()) {
      const auto plan = phosml::cmd_split(config);
      std::cout << "train " << plan.train_indices.size() << ", test " << plan.test_indices.size() << ", "
                << plan.folds.size() << " folds\n";
    } else if (tune->parsed()) {
      const auto result = phosml::cmd_tune(config, learner);
      json best = json::object();
      for (const auto& [k, v] : result.best.params) best[k] = phosml::to_json(v);
      std::cout << "best trial " << result.best.index << ": CV RMSE " << phosml::format_pm(result.best.rmse) << "\n"
                << best.dump(2) << "\n";
    } else if (train->parsed()) {
      phosml::cmd_train(config, learner);
      std::cout << "model written to " << config.output_dir << "\n";
    } else if (stack->parsed()) {
      phosml::cmd_stack(config);
      std::cout << "stack written to " << config.output_dir << "/stack_model.json\n";
    } else if (evaluate->parsed()) {
      std::cout << phosml::render_table(phosml::cmd_evaluate(config));
    }
  } catch (const phosml::StageError& e) {
    std::cerr << "phosml: " << e.what() << "\n";
    return phosml::stage_exit_code(e.stage());
  } catch (const phosml::Error& e) {
    std::cerr << "phosml: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
