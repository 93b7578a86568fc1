#include "phosml/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "phosml/error.hpp"

namespace phosml {

using nlohmann::json;

TargetSpec PipelineConfig::target_spec() const {
  return TargetSpec::make(target, std::set<std::string>(extra_feature_mask.begin(), extra_feature_mask.end()));
}

FeatureSchema PipelineConfig::schema() const { return FeatureSchema::pt_emitters(excited_states); }

const LearnerEntry& PipelineConfig::learner(const std::string& label) const {
  auto it = std::find_if(learners.begin(), learners.end(), [&](const LearnerEntry& e) { return e.label == label; });
  if (it == learners.end()) throw Error(Errc::Config, "no learner labelled '" + label + "' in the roster");
  return *it;
}

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(Errc::Config, std::string("key '") + key + "': " + e.what());
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
      throw Error(Errc::Config, "unknown key '" + key + "' in " + where);
}

std::string preset_name(TargetKind t) { return to_string(t); }

PipelineConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw Error(Errc::Config, "config must be a JSON object");
  reject_unknown(doc,
                 {"dataset", "target", "extra_feature_mask", "excited_states", "seed", "split", "tuning", "learners", "stack",
                  "importance", "r2_definition", "output_dir", "config_version", "config_hash"},
                 "config");
  PipelineConfig c;
  c.dataset = get_or<std::string>(doc, "dataset", "");
  c.target = parse_target_kind(get_or<std::string>(doc, "target", "wavelength"));
  c.extra_feature_mask = get_or(doc, "extra_feature_mask", std::vector<std::string>{});
  c.excited_states = get_or(doc, "excited_states", c.excited_states);
  c.seed = get_or<std::uint64_t>(doc, "seed", 42);
  c.r2_definition = parse_r2_definition(get_or<std::string>(doc, "r2_definition", "determination"));
  c.output_dir = get_or<std::string>(doc, "output_dir", c.output_dir);

  const json split = doc.value("split", json::object());
  reject_unknown(split, {"train_fraction", "spxy_on_standardized", "k", "seed"}, "split");
  c.split.train_fraction = get_or(split, "train_fraction", 0.8);
  c.split.spxy_on_standardized = get_or(split, "spxy_on_standardized", true);
  c.split.k = get_or<std::size_t>(split, "k", 10);
  c.split.seed = get_or<std::uint64_t>(split, "seed", c.seed);
  if (!(c.split.train_fraction > 0 && c.split.train_fraction < 1)) throw Error(Errc::Config, "split.train_fraction must be in (0, 1)");
  if (c.split.k < 2) throw Error(Errc::Config, "split.k must be at least 2");

  const json tuning = doc.value("tuning", json::object());
  reject_unknown(tuning, {"budget"}, "tuning");
  const auto default_budget = get_or<std::size_t>(tuning, "budget", 0);

  if (doc.contains("learners")) {
    for (const auto& e : doc.at("learners")) {
      reject_unknown(e, {"label", "kind", "params", "search", "budget", "seed"}, "learner entry");
      LearnerEntry entry;
      entry.label = e.at("label").get<std::string>();
      if (e.contains("kind")) {
        entry.spec = learner_spec_from_json(e);
        if (!e.contains("seed")) entry.spec.seed = c.seed;
      } else {
        entry.spec = default_learner(entry.label, get_or<std::uint64_t>(e, "seed", c.seed)).spec;
        if (e.contains("params"))
          for (const auto& [k, v] : e.at("params").items()) entry.spec.params[k] = param_from_json(v);
      }
      entry.spec.params = resolve_params(entry.spec.kind, entry.spec.params);
      if (e.contains("search")) entry.space = search_space_from_json(e.at("search"));
      else if (!e.contains("kind")) entry.space = default_search_space(entry.label);
      entry.budget = get_or<std::size_t>(e, "budget", entry.space.empty() ? 0 : default_budget);
      for (const auto& [name, _] : entry.space)
        if (std::none_of(param_space(entry.spec.kind).begin(), param_space(entry.spec.kind).end(),
                         [&](const ParamDecl& d) { return d.name == name; }))
          throw Error(Errc::Config, "search space of '" + entry.label + "' names unknown parameter '" + name + "'");
      c.learners.push_back(std::move(entry));
    }
  } else {
    for (const auto& label : roster_labels(c.target)) {
      LearnerEntry entry{label, default_learner(label, c.seed).spec, default_search_space(label), default_budget};
      entry.spec.params = resolve_params(entry.spec.kind, entry.spec.params);
      c.learners.push_back(std::move(entry));
    }
  }
  for (std::size_t i = 0; i < c.learners.size(); ++i)
    for (std::size_t j = i + 1; j < c.learners.size(); ++j)
      if (c.learners[i].label == c.learners[j].label) throw Error(Errc::Config, "duplicate learner label " + c.learners[i].label);

  const json stack = doc.value("stack", json::object());
  reject_unknown(stack, {"preset", "bases", "meta", "meta_features", "oof", "meta_candidates", "meta_budget"}, "stack");
  c.stack.preset = get_or<std::string>(stack, "preset", preset_name(c.target));
  if (c.stack.preset == "custom") {
    c.stack.bases = stack.at("bases").get<std::vector<std::string>>();
    c.stack.meta = stack.at("meta").get<std::string>();
    c.stack.meta_features = parse_meta_features(get_or<std::string>(stack, "meta_features", "features_plus_base_predictions"));
    if (c.stack.bases.empty()) throw Error(Errc::Config, "custom stack needs bases");
  } else {
    parse_target_kind(c.stack.preset);
    if (stack.contains("bases") || stack.contains("meta"))
      throw Error(Errc::Config, "stack.bases / stack.meta require preset \"custom\"");
  }
  c.stack.oof = parse_oof_mode(get_or<std::string>(stack, "oof", "out_of_fold"));
  c.stack.meta_candidates = get_or(stack, "meta_candidates", meta_candidate_labels(c.target));
  c.stack.meta_budget = get_or<std::size_t>(stack, "meta_budget", default_budget);

  const json importance = doc.value("importance", json::object());
  reject_unknown(importance, {"model", "top"}, "importance");
  c.importance_model = get_or<std::string>(importance, "model", c.target == TargetKind::Wavelength ? "GBM" : "RF");
  c.importance_top = get_or<std::size_t>(importance, "top", 10);
  return c;
}

}  // namespace

PipelineConfig config_from_json(const json& doc) {
  try {
    return parse_config(doc);
  } catch (const json::exception& e) {
    throw Error(Errc::Config, e.what());
  }
}

json to_json(const PipelineConfig& c) {
  json learners = json::array();
  for (const auto& e : c.learners) {
    json entry = to_json(e.spec);
    entry["label"] = e.label;
    entry["search"] = to_json(e.space);
    entry["budget"] = e.budget;
    learners.push_back(std::move(entry));
  }
  json stack{{"preset", c.stack.preset}, {"oof", to_string(c.stack.oof)}, {"meta_candidates", c.stack.meta_candidates},
             {"meta_budget", c.stack.meta_budget}};
  if (c.stack.preset == "custom") {
    stack["bases"] = c.stack.bases;
    stack["meta"] = c.stack.meta;
    stack["meta_features"] = to_string(c.stack.meta_features);
  }
  return json{{"config_version", 1},
              {"dataset", c.dataset},
              {"target", to_string(c.target)},
              {"extra_feature_mask", c.extra_feature_mask},
              {"excited_states", c.excited_states},
              {"seed", c.seed},
              {"split",
               {{"train_fraction", c.split.train_fraction},
                {"spxy_on_standardized", c.split.spxy_on_standardized},
                {"k", c.split.k},
                {"seed", c.split.seed}}},
              {"learners", learners},
              {"stack", stack},
              {"importance", {{"model", c.importance_model}, {"top", c.importance_top}}},
              {"r2_definition", to_string(c.r2_definition)},
              {"output_dir", c.output_dir}};
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::Config, path.string() + ": " + e.what());
  }
  auto config = config_from_json(doc);
  // relative dataset paths resolve against the config file's directory
  if (!config.dataset.empty() && std::filesystem::path(config.dataset).is_relative() && path.has_parent_path())
    config.dataset = (path.parent_path() / config.dataset).lexically_normal().string();
  return config;
}

std::string config_hash(const PipelineConfig& config) {
  json doc = to_json(config);
  doc.erase("output_dir");
  const std::string text = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace phosml
