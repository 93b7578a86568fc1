#include "phosml/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "phosml/error.hpp"

namespace phosml {

FeatureSchema::FeatureSchema(std::vector<FeatureDef> features, std::vector<std::string> excited_state_labels)
    : features_(std::move(features)), labels_(std::move(excited_state_labels)) {
  std::unordered_set<std::string> names;
  for (const auto& f : features_) {
    if (f.name.empty()) throw Error(Errc::Config, "feature with empty name");
    if (f.name == "id") throw Error(Errc::Config, "'id' is reserved");
    if (!names.insert(f.name).second) throw Error(Errc::Config, "duplicate feature name " + f.name);
    if (f.kind == FeatureKind::Categorical) {
      if (f.levels.empty()) throw Error(Errc::Config, "categorical feature " + f.name + " has no levels");
      std::unordered_set<std::string> levels(f.levels.begin(), f.levels.end());
      if (levels.size() != f.levels.size())
        throw Error(Errc::Config, "duplicate level in categorical feature " + f.name);
    } else if (!f.levels.empty()) {
      throw Error(Errc::Config, "numeric feature " + f.name + " declares levels");
    }
  }
}

FeatureSchema FeatureSchema::pt_emitters(std::vector<std::string> labels) {
  std::vector<FeatureDef> f;
  auto numeric = [&](std::string name, std::string unit) {
    f.push_back({std::move(name), FeatureKind::Numeric, {}, std::move(unit), true});
  };
  numeric("nu", "cm^-1");
  for (int i = 1; i <= 4; ++i) numeric("coor_bond_length" + std::to_string(i), "angstrom");
  for (int i = 1; i <= 4; ++i)
    f.push_back({"coor_bond_type" + std::to_string(i), FeatureKind::Categorical, kCoordinationTypes, "", true});
  numeric("rho_Pt", "e/bohr^3");
  for (int i = 1; i <= 4; ++i) numeric("rho_coor" + std::to_string(i), "e/bohr^3");
  numeric("H_T1_S0", "cm^-1");
  numeric("H_T1_S1", "cm^-1");
  for (const auto& s : labels) {
    numeric("R_EH_" + s + "_a", "angstrom");
    numeric("R_EH_" + s + "_b", "angstrom");
  }
  for (const auto& s : labels) numeric("LAMBDA_" + s, "");
  for (const auto& s : labels) numeric("CT_" + s, "");
  numeric("HOMO", "eV");
  numeric("LUMO", "eV");
  numeric("mu", "debye");
  numeric("f", "");
  numeric(kCalcWavelength, "nm");
  numeric(kCalcKr, "s^-1");
  numeric("refractive_index", "");
  return FeatureSchema(std::move(f), std::move(labels));
}

std::optional<std::size_t> FeatureSchema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < features_.size(); ++i)
    if (features_[i].name == name) return i;
  return std::nullopt;
}

namespace {

void check_targets(const Sample& s) {
  const auto& t = s.targets;
  auto bad = [&](const char* col, double v, const char* rule) {
    std::ostringstream msg;
    msg << "row '" << s.id << "' column " << col << " = " << v << " (must be " << rule << ")";
    throw Error(Errc::OutOfRange, msg.str());
  };
  if (t.wavelength_nm && !(*t.wavelength_nm > 0 && std::isfinite(*t.wavelength_nm)))
    bad("wavelength_nm", *t.wavelength_nm, "> 0");
  if (t.kr_per_s && !(*t.kr_per_s > 0 && std::isfinite(*t.kr_per_s))) bad("kr_per_s", *t.kr_per_s, "> 0");
  if (t.plqy && !(*t.plqy >= 0 && *t.plqy <= 1)) bad("plqy", *t.plqy, "in [0, 1]");
}

}  // namespace

Dataset::Dataset(FeatureSchema schema, std::vector<Sample> samples)
    : schema_(std::move(schema)), samples_(std::move(samples)) {
  std::unordered_set<std::string> ids;
  const auto& features = schema_.features();
  for (const auto& s : samples_) {
    if (s.id.empty()) throw Error(Errc::Parse, "sample with empty id");
    if (!ids.insert(s.id).second) throw Error(Errc::DuplicateId, "id '" + s.id + "' appears more than once");
    if (s.values.size() != features.size())
      throw Error(Errc::MissingColumn, "row '" + s.id + "' has " + std::to_string(s.values.size()) +
                                           " values, schema has " + std::to_string(features.size()));
    for (std::size_t j = 0; j < features.size(); ++j) {
      const auto& def = features[j];
      if (def.kind == FeatureKind::Numeric) {
        const auto* v = std::get_if<double>(&s.values[j]);
        if (!v) throw Error(Errc::Parse, "row '" + s.id + "' column " + def.name + " is not numeric");
        if (std::isnan(*v) && !def.required) continue;
        if (!std::isfinite(*v)) throw Error(Errc::NonFinite, "row '" + s.id + "' column " + def.name);
      } else {
        const auto* v = std::get_if<std::string>(&s.values[j]);
        if (!v || std::find(def.levels.begin(), def.levels.end(), *v) == def.levels.end())
          throw Error(Errc::BadLevel, "row '" + s.id + "' column " + def.name + " value '" +
                                          (v ? *v : std::string("<number>")) + "'");
      }
    }
    check_targets(s);
  }
}

// --- delimited text -------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cells.push_back(trim(cur));
  return cells;
}

std::optional<double> parse_number(const std::string& cell) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

}  // namespace

Dataset parse_dataset(std::istream& in, const FeatureSchema& schema, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::Parse, source + ": empty input, header row expected");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_csv_line(line);
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (!col.emplace(header[i], i).second) throw Error(Errc::Parse, source + ": duplicate header " + header[i]);

  if (!col.count("id")) throw Error(Errc::MissingColumn, source + ": column id");
  const auto& features = schema.features();
  std::vector<std::optional<std::size_t>> feature_col(features.size());
  for (std::size_t j = 0; j < features.size(); ++j) {
    auto it = col.find(features[j].name);
    if (it != col.end()) feature_col[j] = it->second;
    else if (features[j].required) throw Error(Errc::MissingColumn, source + ": column " + features[j].name);
  }
  auto optional_col = [&](const char* name) -> std::optional<std::size_t> {
    auto it = col.find(name);
    return it == col.end() ? std::nullopt : std::optional(it->second);
  };
  const auto wl_col = optional_col("wavelength_nm");
  const auto kr_col = optional_col("kr_per_s");
  const auto qy_col = optional_col("plqy");

  std::vector<Sample> samples;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw Error(Errc::Parse, source + ": line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                                   " cells, header has " + std::to_string(header.size()));
    Sample s;
    s.id = cells[col.at("id")];
    if (s.id.empty()) throw Error(Errc::Parse, source + ": line " + std::to_string(line_no) + " has an empty id");
    s.values.resize(features.size());
    for (std::size_t j = 0; j < features.size(); ++j) {
      const auto& def = features[j];
      const std::string cell = feature_col[j] ? cells[*feature_col[j]] : std::string();
      if (cell.empty()) {
        // Schema-level optional features are still stored; NaN marks them absent.
        if (def.required || def.kind == FeatureKind::Categorical)
          throw Error(Errc::MissingColumn, "row '" + s.id + "' column " + def.name + " is empty");
        s.values[j] = std::nan("");
        continue;
      }
      if (def.kind == FeatureKind::Categorical) {
        if (std::find(def.levels.begin(), def.levels.end(), cell) == def.levels.end())
          throw Error(Errc::BadLevel, "row '" + s.id + "' column " + def.name + " value '" + cell + "'");
        s.values[j] = cell;
      } else {
        auto v = parse_number(cell);
        if (!v) throw Error(Errc::Parse, "row '" + s.id + "' column " + def.name + " value '" + cell + "'");
        if (!std::isfinite(*v)) throw Error(Errc::NonFinite, "row '" + s.id + "' column " + def.name);
        s.values[j] = *v;
      }
    }
    auto read_target = [&](std::optional<std::size_t> c, const char* name) -> std::optional<double> {
      if (!c || cells[*c].empty()) return std::nullopt;
      auto v = parse_number(cells[*c]);
      if (!v) throw Error(Errc::Parse, "row '" + s.id + "' column " + name + " value '" + cells[*c] + "'");
      return v;
    };
    s.targets.wavelength_nm = read_target(wl_col, "wavelength_nm");
    s.targets.kr_per_s = read_target(kr_col, "kr_per_s");
    s.targets.plqy = read_target(qy_col, "plqy");
    check_targets(s);
    samples.push_back(std::move(s));
  }
  return Dataset(schema, std::move(samples));
}

Dataset load_dataset(const std::filesystem::path& path, const FeatureSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  return parse_dataset(in, schema, path.string());
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
  const auto& features = dataset.schema().features();
  out << "id";
  for (const auto& f : features) out << ',' << f.name;
  out << ",wavelength_nm,kr_per_s,plqy\n";
  auto num = [](double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
  };
  for (const auto& s : dataset.samples()) {
    out << s.id;
    for (const auto& v : s.values) {
      out << ',';
      if (const auto* d = std::get_if<double>(&v)) {
        if (!std::isnan(*d)) out << num(*d);
      } else {
        out << std::get<std::string>(v);
      }
    }
    for (const auto& t : {s.targets.wavelength_nm, s.targets.kr_per_s, s.targets.plqy}) {
      out << ',';
      if (t) out << num(*t);
    }
    out << '\n';
  }
}

// --- targets ----------------------------------------------------------------

std::string to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::Wavelength: return "wavelength";
    case TargetKind::Kr: return "kr";
    case TargetKind::Plqy: return "plqy";
  }
  return "?";
}

TargetKind parse_target_kind(const std::string& text) {
  if (text == "wavelength") return TargetKind::Wavelength;
  if (text == "kr") return TargetKind::Kr;
  if (text == "plqy") return TargetKind::Plqy;
  throw Error(Errc::Config, "unknown target '" + text + "' (expected wavelength, kr or plqy)");
}

TargetSpec TargetSpec::make(TargetKind kind, std::set<std::string> extra_mask) {
  TargetSpec spec;
  spec.kind = kind;
  spec.transform = kind == TargetKind::Kr ? TargetTransform::Log10 : TargetTransform::Identity;
  spec.feature_mask = std::move(extra_mask);
  if (kind == TargetKind::Plqy) {
    spec.feature_mask.insert(kCalcWavelength);
    spec.feature_mask.insert(kCalcKr);
  }
  return spec;
}

double TargetSpec::forward(double natural) const {
  if (transform == TargetTransform::Identity) return natural;
  if (!(natural > 0)) throw Error(Errc::NonPositive, "log10 of non-positive target");
  return std::log10(natural);
}

double TargetSpec::inverse(double transformed) const {
  return transform == TargetTransform::Identity ? transformed : std::pow(10.0, transformed);
}

std::optional<double> TargetSpec::target_of(const Sample& sample) const {
  switch (kind) {
    case TargetKind::Wavelength: return sample.targets.wavelength_nm;
    case TargetKind::Kr: return sample.targets.kr_per_s;
    case TargetKind::Plqy: return sample.targets.plqy;
  }
  return std::nullopt;
}

std::string TargetSpec::unit() const {
  switch (kind) {
    case TargetKind::Wavelength: return "nm";
    case TargetKind::Kr: return "log10(s^-1)";
    case TargetKind::Plqy: return "fraction";
  }
  return "";
}

// --- encoding ---------------------------------------------------------------

DesignMatrix DesignMatrix::select_rows(std::span<const std::size_t> indices) const {
  return DesignMatrix{data.select_rows(indices), columns, provenance};
}

DesignMatrix encode_features(const Dataset& dataset, const std::set<std::string>& mask) {
  const auto& features = dataset.schema().features();
  DesignMatrix out;
  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < features.size(); ++j) {
    const auto& f = features[j];
    if (mask.count(f.name)) continue;
    kept.push_back(j);
    if (f.kind == FeatureKind::Numeric) {
      out.columns.push_back(f.name);
      out.provenance.push_back(f.name);
    } else {
      for (const auto& level : f.levels) {
        out.columns.push_back(f.name + "=" + level);
        out.provenance.push_back(f.name);
      }
    }
  }
  out.data = Matrix(dataset.size(), out.columns.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& s = dataset.samples()[i];
    std::size_t c = 0;
    for (auto j : kept) {
      const auto& f = features[j];
      if (f.kind == FeatureKind::Numeric) {
        const double v = std::get<double>(s.values[j]);
        if (std::isnan(v)) throw Error(Errc::MissingColumn, "row '" + s.id + "' has no value for " + f.name);
        out.data(i, c++) = v;
      } else {
        const auto& v = std::get<std::string>(s.values[j]);
        for (const auto& level : f.levels) out.data(i, c++) = level == v ? 1.0 : 0.0;
      }
    }
  }
  return out;
}

Encoded encode(const Dataset& dataset, const TargetSpec& target) {
  if (target.kind == TargetKind::Kr && target.transform != TargetTransform::Log10)
    throw Error(Errc::Config, "k_r targets are modelled in log10 space");
  if (target.kind == TargetKind::Plqy && (!target.feature_mask.count(kCalcWavelength) || !target.feature_mask.count(kCalcKr)))
    throw Error(Errc::Config, "PLQY models must mask Calc_lambda and Calc_kr");
  std::vector<double> y;
  y.reserve(dataset.size());
  for (const auto& s : dataset.samples()) {
    auto t = target.target_of(s);
    if (!t) throw Error(Errc::MissingTarget, "sample '" + s.id + "' has no " + to_string(target.kind) + " value");
    y.push_back(target.forward(*t));
  }
  return Encoded{encode_features(dataset, target.feature_mask), std::move(y)};
}

// --- scaling ----------------------------------------------------------------

ScalerStats fit_scaler(const Matrix& matrix) {
  if (matrix.rows() < 2) throw Error(Errc::EmptyMatrix, "scaler needs at least 2 rows");
  const std::size_t n = matrix.rows();
  ScalerStats stats{std::vector<double>(matrix.cols()), std::vector<double>(matrix.cols(), 1.0)};
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    double lo = matrix(0, c), hi = matrix(0, c), sum = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double v = matrix(r, c);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    if (lo == hi) {
      stats.mean[c] = lo;
      continue;
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double d = matrix(r, c) - mean;
      ss += d * d;
    }
    stats.mean[c] = mean;
    const double sd = std::sqrt(ss / static_cast<double>(n));
    stats.scale[c] = sd > 0 ? sd : 1.0;
  }
  return stats;
}

Matrix apply_scaler(const Matrix& matrix, const ScalerStats& stats) {
  if (stats.mean.size() != matrix.cols())
    throw Error(Errc::ColumnMismatch, "scaler fitted on " + std::to_string(stats.mean.size()) + " columns, got " +
                                          std::to_string(matrix.cols()));
  Matrix out(matrix.rows(), matrix.cols());
  for (std::size_t r = 0; r < matrix.rows(); ++r)
    for (std::size_t c = 0; c < matrix.cols(); ++c) out(r, c) = (matrix(r, c) - stats.mean[c]) / stats.scale[c];
  return out;
}

DesignMatrix apply_scaler(const DesignMatrix& matrix, const ScalerStats& stats) {
  return DesignMatrix{apply_scaler(matrix.data, stats), matrix.columns, matrix.provenance};
}

}  // namespace phosml
