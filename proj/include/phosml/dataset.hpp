#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "phosml/matrix.hpp"

namespace phosml {

enum class FeatureKind { Numeric, Categorical };

struct FeatureDef {
  std::string name;
  FeatureKind kind = FeatureKind::Numeric;
  std::vector<std::string> levels;  // categorical only, in one-hot order
  std::string unit;
  bool required = true;
};

// Ordered descriptor table. The encoded column order depends only on the
// feature order and the level order.
class FeatureSchema {
 public:
  FeatureSchema(std::vector<FeatureDef> features, std::vector<std::string> excited_state_labels);

  // The Pt(II) emitter descriptor set: emission energy, coordination
  // geometry and bond types, electron densities, spin-orbit couplings,
  // charge-transfer descriptors per excited state, frontier orbitals,
  // dipole, oscillator strength, calculated wavelength/k_r, refractive index.
  static FeatureSchema pt_emitters(std::vector<std::string> excited_state_labels = {"S1", "T1", "T2", "T3"});

  const std::vector<FeatureDef>& features() const noexcept { return features_; }
  const std::vector<std::string>& excited_state_labels() const noexcept { return labels_; }
  std::optional<std::size_t> index_of(const std::string& name) const;

 private:
  std::vector<FeatureDef> features_;
  std::vector<std::string> labels_;
};

inline const std::vector<std::string> kCoordinationTypes = {"Pt-C", "Pt-N", "Pt-O", "Pt-Cl"};
inline constexpr const char* kCalcWavelength = "Calc_lambda";
inline constexpr const char* kCalcKr = "Calc_kr";

using FeatureValue = std::variant<double, std::string>;

struct Targets {
  std::optional<double> wavelength_nm;
  std::optional<double> kr_per_s;
  std::optional<double> plqy;
};

struct Sample {
  std::string id;
  std::vector<FeatureValue> values;  // aligned with schema.features()
  Targets targets;
};

class Dataset {
 public:
  // Validates ids, value kinds, levels and target ranges.
  Dataset(FeatureSchema schema, std::vector<Sample> samples);

  const FeatureSchema& schema() const noexcept { return schema_; }
  const std::vector<Sample>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }

 private:
  FeatureSchema schema_;
  std::vector<Sample> samples_;
};

Dataset load_dataset(const std::filesystem::path& path, const FeatureSchema& schema);
Dataset parse_dataset(std::istream& in, const FeatureSchema& schema, const std::string& source = "<stream>");
void write_dataset(std::ostream& out, const Dataset& dataset);

enum class TargetKind { Wavelength, Kr, Plqy };
enum class TargetTransform { Identity, Log10 };

std::string to_string(TargetKind kind);
TargetKind parse_target_kind(const std::string& text);

struct TargetSpec {
  TargetKind kind = TargetKind::Wavelength;
  TargetTransform transform = TargetTransform::Identity;
  std::set<std::string> feature_mask;

  // Enforces Kr => log10 and Plqy => {Calc_lambda, Calc_kr} masked.
  static TargetSpec make(TargetKind kind, std::set<std::string> extra_mask = {});

  double forward(double natural) const;
  double inverse(double transformed) const;
  std::optional<double> target_of(const Sample& sample) const;
  // Natural-unit label for reports.
  std::string unit() const;
};

struct DesignMatrix {
  Matrix data;
  std::vector<std::string> columns;
  std::vector<std::string> provenance;  // source feature of each column

  std::size_t rows() const noexcept { return data.rows(); }
  std::size_t cols() const noexcept { return data.cols(); }
  DesignMatrix select_rows(std::span<const std::size_t> indices) const;
};

struct Encoded {
  DesignMatrix x;
  std::vector<double> y;
};

// Numeric features pass through, categorical ones become one-hot groups in
// level order, masked features are dropped.
DesignMatrix encode_features(const Dataset& dataset, const std::set<std::string>& mask);
Encoded encode(const Dataset& dataset, const TargetSpec& target);

struct ScalerStats {
  std::vector<double> mean;
  std::vector<double> scale;  // population std, 1 for zero-variance columns
};

ScalerStats fit_scaler(const Matrix& matrix);
Matrix apply_scaler(const Matrix& matrix, const ScalerStats& stats);
DesignMatrix apply_scaler(const DesignMatrix& matrix, const ScalerStats& stats);

}  // namespace phosml
