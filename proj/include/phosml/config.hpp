#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "phosml/dataset.hpp"
#include "phosml/learners.hpp"
#include "phosml/metrics.hpp"
#include "phosml/stacking.hpp"
#include "phosml/tuning.hpp"

namespace phosml {

struct SplitConfig {
  double train_fraction = 0.8;
  bool spxy_on_standardized = true;
  std::size_t k = 10;
  std::uint64_t seed = 42;
};

struct LearnerEntry {
  std::string label;
  LearnerSpec spec;
  SearchSpace space;
  std::size_t budget = 0;  // 0 = use spec.params as given
};

struct StackConfig {
  std::string preset;                      // wavelength | kr | plqy | custom
  std::vector<std::string> bases;          // custom only: roster labels
  std::string meta;                        // custom only
  MetaFeatures meta_features = MetaFeatures::FeaturesPlusBasePredictions;  // custom only
  OofMode oof = OofMode::OutOfFold;
  std::vector<std::string> meta_candidates;
  std::size_t meta_budget = 0;  // random-search trials per meta candidate
};

// Everything a run needs. Missing keys take documented defaults and the
// canonical form (to_json) spells every key out, so the config hash covers
// defaults too.
struct PipelineConfig {
  std::string dataset;
  TargetKind target = TargetKind::Wavelength;
  std::vector<std::string> extra_feature_mask;
  std::vector<std::string> excited_states = {"S1", "T1", "T2", "T3"};
  std::uint64_t seed = 42;
  SplitConfig split;
  std::vector<LearnerEntry> learners;
  StackConfig stack;
  std::string importance_model;  // roster label
  std::size_t importance_top = 10;
  R2Definition r2_definition = R2Definition::Determination;
  std::string output_dir = "phosml-out";

  TargetSpec target_spec() const;
  FeatureSchema schema() const;
  const LearnerEntry& learner(const std::string& label) const;
};

PipelineConfig config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const PipelineConfig& config);
PipelineConfig load_config(const std::filesystem::path& path);

// FNV-1a 64 of the canonical JSON dump without output_dir, as 16 hex digits.
std::string config_hash(const PipelineConfig& config);

}  // namespace phosml
