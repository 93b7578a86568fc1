#include "phosml/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <map>

#include "phosml/error.hpp"
#include "phosml/physics.hpp"
#include "phosml/rng.hpp"

namespace phosml {

namespace {

double gaussian(Rng& rng) {
  // Box-Muller; uniform01 can return 0, so flip it.
  const double u1 = 1.0 - rng.uniform01();
  const double u2 = rng.uniform01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace

Dataset synthetic_emitters(std::size_t n, std::uint64_t seed, const FeatureSchema& schema) {
  if (n == 0) throw Error(Errc::InvalidParam, "synthetic_emitters: n must be positive");
  Rng rng(seed);
  std::vector<Sample> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::map<std::string, FeatureValue> v;
    const double calc_lambda = rng.uniform(430.0, 660.0);
    const double f = std::pow(10.0, rng.uniform(-4.0, -1.3));
    v["nu"] = 1e7 / (calc_lambda + 5.0 * gaussian(rng));
    for (int k = 1; k <= 4; ++k) {
      const auto type = kCoordinationTypes[rng.below(kCoordinationTypes.size())];
      v["coor_bond_type" + std::to_string(k)] = type;
      v["coor_bond_length" + std::to_string(k)] = rng.uniform(1.95, 2.35) + (type == "Pt-Cl" ? 0.25 : 0.0);
      v["rho_coor" + std::to_string(k)] = rng.uniform(0.05, 0.12);
    }
    v["rho_Pt"] = rng.uniform(0.08, 0.14);
    v["H_T1_S0"] = rng.uniform(0.0, 800.0);
    v["H_T1_S1"] = rng.uniform(0.0, 400.0);
    for (const auto& s : schema.excited_state_labels()) {
      v["R_EH_" + s + "_a"] = rng.uniform(0.5, 6.0);
      v["R_EH_" + s + "_b"] = rng.uniform(0.5, 6.0);
      v["LAMBDA_" + s] = rng.uniform(0.2, 0.9);
      v["CT_" + s] = rng.uniform(0.0, 1.0);
    }
    const double homo = rng.uniform(-6.0, -4.8);
    const double lumo = rng.uniform(-3.0, -1.8);
    v["HOMO"] = homo;
    v["LUMO"] = lumo;
    v["mu"] = rng.uniform(0.0, 12.0);
    v["f"] = f;
    v[kCalcWavelength] = calc_lambda;
    const double calc_kr = physics::kr_from_transition(physics::TransitionRecord::from_wavelength_nm(calc_lambda, f));
    v[kCalcKr] = calc_kr;
    v["refractive_index"] = rng.uniform(1.4, 1.6);

    auto num = [&](const std::string& key) { return v.count(key) ? std::get<double>(v[key]) : 0.0; };
    const double pt_n = std::get<std::string>(v["coor_bond_type1"]) == "Pt-N" ? 1.0 : 0.0;

    Sample s;
    char id[32];
    std::snprintf(id, sizeof(id), "syn%04zu", i + 1);
    s.id = id;
    for (const auto& def : schema.features()) {
      auto it = v.find(def.name);
      s.values.push_back(it == v.end() ? FeatureValue{0.0} : it->second);
    }
    s.targets.wavelength_nm = 0.85 * calc_lambda + 75.0 + 12.0 * std::sin(3.0 * (lumo + 2.4)) + 9.0 * pt_n -
                              6.0 * num("CT_T1") + 4.0 * gaussian(rng);
    const double log_kr = 0.7 * std::log10(calc_kr) + 1.8 + 0.25 * std::tanh(num("H_T1_S0") / 300.0 - 1.0) +
                          0.15 * num("LAMBDA_T1") + 0.08 * gaussian(rng);
    s.targets.kr_per_s = std::pow(10.0, log_kr);
    const double logit = 1.5 * (num("CT_T1") - 0.5) + 40.0 * (num("rho_Pt") - 0.11) - 0.8 * (num("LAMBDA_S1") - 0.5) +
                         0.3 * gaussian(rng);
    s.targets.plqy = 1.0 / (1.0 + std::exp(-logit));
    samples.push_back(std::move(s));
  }
  return Dataset(schema, std::move(samples));
}

}  // namespace phosml
