#include "phosml/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "phosml/error.hpp"

namespace phosml {

namespace {

void check(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size())
    throw Error(Errc::LengthMismatch, "truth has " + std::to_string(a.size()) + " values, prediction " + std::to_string(b.size()));
  if (a.empty()) throw Error(Errc::LengthMismatch, "metrics need at least one value");
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) throw Error(Errc::NonFinite, "non-finite value at index " + std::to_string(i));
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double mae(std::span<const double> t, std::span<const double> p) {
  check(t, p);
  double s = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) s += std::abs(t[i] - p[i]);
  return s / static_cast<double>(t.size());
}

double rmse(std::span<const double> t, std::span<const double> p) {
  check(t, p);
  double s = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) s += (t[i] - p[i]) * (t[i] - p[i]);
  return std::sqrt(s / static_cast<double>(t.size()));
}

double r2(std::span<const double> t, std::span<const double> p) {
  check(t, p);
  const double m = mean_of(t);
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    ss_res += (t[i] - p[i]) * (t[i] - p[i]);
    ss_tot += (t[i] - m) * (t[i] - m);
  }
  if (!(ss_tot > 0)) throw Error(Errc::ConstantTruth, "R^2 is undefined for constant y_true");
  return 1.0 - ss_res / ss_tot;
}

double pearson_r2(std::span<const double> t, std::span<const double> p) {
  check(t, p);
  const double mt = mean_of(t), mp = mean_of(p);
  double stt = 0.0, spp = 0.0, stp = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    stt += (t[i] - mt) * (t[i] - mt);
    spp += (p[i] - mp) * (p[i] - mp);
    stp += (t[i] - mt) * (p[i] - mp);
  }
  if (!(stt > 0)) throw Error(Errc::ConstantTruth, "R^2 is undefined for constant y_true");
  if (!(spp > 0)) return 0.0;
  return stp * stp / (stt * spp);
}

std::string to_string(R2Definition def) {
  return def == R2Definition::Determination ? "determination" : "pearson";
}

R2Definition parse_r2_definition(const std::string& text) {
  if (text == "determination") return R2Definition::Determination;
  if (text == "pearson") return R2Definition::PearsonSquared;
  throw Error(Errc::Config, "unknown r2 definition '" + text + "' (determination | pearson)");
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) return {std::nan(""), std::nan("")};
  const double m = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss / static_cast<double>(values.size()))};
}

std::string format_pm(const MeanStd& v, int decimals) {
  if (!std::isfinite(v.mean)) return "n/a";
  // values that round to zero print without a sign
  const double half_ulp = 0.5 * std::pow(10.0, -decimals);
  const double mean = std::abs(v.mean) < half_ulp ? 0.0 : v.mean;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f±%.*f", decimals, mean, decimals, v.std);
  return buf;
}

EvalRow cv_report(const std::string& model, std::span<const FoldPrediction> folds, R2Definition def) {
  if (folds.size() < 2) throw Error(Errc::EmptyFold, "cross-validated report needs at least 2 folds");
  EvalRow row;
  row.model = model;
  row.folds = folds.size();
  std::vector<double> maes, rmses, r2s;
  for (const auto& f : folds) {
    FoldScore s;
    s.samples = f.y_true.size();
    s.mae = mae(f.y_true, f.y_pred);
    s.rmse = rmse(f.y_true, f.y_pred);
    const bool constant = std::all_of(f.y_true.begin(), f.y_true.end(), [&](double v) { return v == f.y_true.front(); });
    if (s.samples >= 2 && !constant) {
      s.r2 = def == R2Definition::Determination ? r2(f.y_true, f.y_pred) : pearson_r2(f.y_true, f.y_pred);
      r2s.push_back(*s.r2);
    } else {
      row.fold_too_small = true;
    }
    maes.push_back(s.mae);
    rmses.push_back(s.rmse);
    row.per_fold.push_back(s);
  }
  row.mae = mean_std(maes);
  row.rmse = mean_std(rmses);
  row.r2 = mean_std(r2s);
  row.r2_folds = r2s.size();
  return row;
}

namespace {

// Display width, counting each UTF-8 code point once.
std::size_t width(const std::string& s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::string pad(const std::string& s, std::size_t w) { return s + std::string(w > width(s) ? w - width(s) : 0, ' '); }

}  // namespace

std::string render_table(const EvalReport& report) {
  const std::string unit = report.unit.empty() ? "" : " (" + report.unit + ")";
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"Model", "MAE" + unit, "RMSE" + unit, report.r2_definition == R2Definition::Determination ? "R2" : "R2 (pearson)"});
  for (const auto& r : report.rows) {
    std::string r2cell = format_pm(r.r2);
    if (r.fold_too_small) r2cell += " *";
    cells.push_back({r.model, format_pm(r.mae), format_pm(r.rmse), r2cell});
  }
  std::vector<std::size_t> widths(4, 0);
  for (const auto& row : cells)
    for (std::size_t c = 0; c < 4; ++c) widths[c] = std::max(widths[c], width(row[c]));
  std::ostringstream out;
  if (!report.title.empty()) out << report.title << '\n';
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t c = 0; c < 4; ++c) {
      out << pad(cells[i][c], widths[c]);
      out << (c + 1 < 4 ? "  " : "");
    }
    out << '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (auto w : widths) total += w;
      out << std::string(total + 6, '-') << '\n';
    }
  }
  if (!report.rows.empty()) {
    out << "mean±std over " << report.rows.front().folds << " folds";
    if (std::any_of(report.rows.begin(), report.rows.end(), [](const EvalRow& r) { return r.fold_too_small; }))
      out << "; * = some folds too small or constant for R2";
    out << '\n';
  }
  return out.str();
}

std::string render_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "model,folds,mae,rmse,r2,mae_mean,mae_std,rmse_mean,rmse_std,r2_mean,r2_std,r2_folds\n";
  auto num = [](double v) { return nlohmann::json(v).dump(); };
  for (const auto& r : report.rows)
    out << r.model << ',' << r.folds << ',' << format_pm(r.mae) << ',' << format_pm(r.rmse) << ',' << format_pm(r.r2) << ','
        << num(r.mae.mean) << ',' << num(r.mae.std) << ',' << num(r.rmse.mean) << ',' << num(r.rmse.std) << ','
        << num(r.r2.mean) << ',' << num(r.r2.std) << ',' << r.r2_folds << '\n';
  return out.str();
}

nlohmann::json to_json(const EvalReport& report) {
  using nlohmann::json;
  json rows = json::array();
  auto ms = [](const MeanStd& v) { return json{{"mean", v.mean}, {"std", v.std}}; };
  for (const auto& r : report.rows) {
    json folds = json::array();
    for (const auto& f : r.per_fold)
      folds.push_back({{"samples", f.samples}, {"mae", f.mae}, {"rmse", f.rmse}, {"r2", f.r2 ? json(*f.r2) : json(nullptr)}});
    rows.push_back({{"model", r.model}, {"folds", r.folds}, {"mae", ms(r.mae)}, {"rmse", ms(r.rmse)}, {"r2", ms(r.r2)},
                    {"r2_folds", r.r2_folds}, {"fold_too_small", r.fold_too_small}, {"per_fold", folds}});
  }
  return json{{"title", report.title}, {"target", report.target}, {"unit", report.unit},
              {"r2_definition", to_string(report.r2_definition)}, {"columns", {"MAE", "RMSE", "R2"}}, {"rows", rows}};
}

}  // namespace phosml
