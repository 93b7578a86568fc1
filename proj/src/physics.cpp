#include "phosml/physics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "phosml/error.hpp"

namespace phosml::physics {

namespace {

constexpr double kNmPerM = 1e9;

void require_positive(double v, const char* what) {
  if (!(v > 0) || !std::isfinite(v)) throw Error(Errc::NonPositive, std::string(what) + " must be positive and finite");
}

}  // namespace

double wavelength_to_frequency(double wavelength_nm) {
  require_positive(wavelength_nm, "wavelength");
  return PhysicalConstants::speed_of_light * kNmPerM / wavelength_nm;
}

double frequency_to_wavelength(double frequency_hz) {
  require_positive(frequency_hz, "frequency");
  return PhysicalConstants::speed_of_light * kNmPerM / frequency_hz;
}

TransitionRecord TransitionRecord::from_wavelength_nm(double wavelength_nm, double f) {
  if (!(f >= 0) || !std::isfinite(f)) throw Error(Errc::OutOfRange, "oscillator strength must be >= 0");
  return TransitionRecord(wavelength_to_frequency(wavelength_nm), f);
}

TransitionRecord TransitionRecord::from_frequency_hz(double frequency_hz, double f) {
  if (!(frequency_hz > 0) || !std::isfinite(frequency_hz))
    throw Error(Errc::NonPositiveFrequency, "emission frequency must be positive");
  if (!(f >= 0) || !std::isfinite(f)) throw Error(Errc::OutOfRange, "oscillator strength must be >= 0");
  return TransitionRecord(frequency_hz, f);
}

double TransitionRecord::wavelength_nm() const { return frequency_to_wavelength(frequency_hz_); }

double kr_from_transition(const TransitionRecord& t) {
  using C = PhysicalConstants;
  const double nu = t.frequency_hz();
  if (!(nu > 0)) throw Error(Errc::NonPositiveFrequency, "emission frequency must be positive");
  constexpr double prefactor = 2.0 * std::numbers::pi * C::elementary_charge * C::elementary_charge /
                               (C::vacuum_permittivity * C::electron_mass * C::speed_of_light * C::speed_of_light *
                                C::speed_of_light);
  return prefactor * nu * nu * t.oscillator_strength();
}

double log10_rate(double kr_per_s) {
  require_positive(kr_per_s, "k_r");
  return std::log10(kr_per_s);
}

double rate_from_log10(double log10_kr) {
  if (!std::isfinite(log10_kr)) throw Error(Errc::NonFinite, "log10 k_r must be finite");
  return std::pow(10.0, log10_kr);
}

}  // namespace phosml::physics
