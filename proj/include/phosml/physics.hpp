#pragma once

namespace phosml::physics {

// CODATA 2018 exact / recommended values, SI units.
struct PhysicalConstants {
  static constexpr double elementary_charge = 1.602176634e-19;     // C (exact)
  static constexpr double vacuum_permittivity = 8.8541878128e-12;  // F m^-1
  static constexpr double electron_mass = 9.1093837015e-31;        // kg
  static constexpr double speed_of_light = 299792458.0;            // m s^-1 (exact)
};

// A T1 -> S0 transition. The spectral coordinate is stored as a vacuum
// frequency in Hz whichever way it was given.
class TransitionRecord {
 public:
  static TransitionRecord from_wavelength_nm(double wavelength_nm, double oscillator_strength);
  static TransitionRecord from_frequency_hz(double frequency_hz, double oscillator_strength);

  double frequency_hz() const noexcept { return frequency_hz_; }
  double wavelength_nm() const;
  double oscillator_strength() const noexcept { return f_; }

 private:
  TransitionRecord(double frequency_hz, double f) : frequency_hz_(frequency_hz), f_(f) {}
  double frequency_hz_;
  double f_;
};

// Radiative rate constant k_r = 2 pi nu^2 e^2 / (eps0 m_e c^3) * f, in s^-1,
// with nu the emission frequency in Hz. No refractive-index correction.
double kr_from_transition(const TransitionRecord& t);

// nu = c / lambda (vacuum).
double wavelength_to_frequency(double wavelength_nm);
double frequency_to_wavelength(double frequency_hz);

double log10_rate(double kr_per_s);
double rate_from_log10(double log10_kr);

}  // namespace phosml::physics
