#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "phosml/error.hpp"
#include "phosml/physics.hpp"

using namespace phosml;
using namespace phosml::physics;

TEST_CASE("k_r at 500 nm and f = 1e-3 matches the directly evaluated formula") {
  const double kr = kr_from_transition(TransitionRecord::from_wavelength_nm(500.0, 1e-3));
  const double expected = static_cast<double>(oracle::kr(500.0L, 1e-3L));
  CHECK(std::abs(expected - 266810.0711882463) / expected < 1e-12);
  CHECK(std::abs(kr - expected) / expected < 1e-12);
  CHECK(kr == doctest::Approx(2.67e5).epsilon(0.001));
}

TEST_CASE("k_r is linear in f and quadratic in frequency") {
  const auto base = TransitionRecord::from_frequency_hz(4e14, 2e-3);
  const double k0 = kr_from_transition(base);
  CHECK(kr_from_transition(TransitionRecord::from_frequency_hz(4e14, 0.0)) == 0.0);
  for (double scale : {0.5, 3.0, 7.25}) {
    const double kf = kr_from_transition(TransitionRecord::from_frequency_hz(4e14, 2e-3 * scale));
    CHECK(std::abs(kf / k0 - scale) / scale < 1e-12);
  }
  const double k2 = kr_from_transition(TransitionRecord::from_frequency_hz(8e14, 2e-3));
  CHECK(std::abs(k2 / k0 - 4.0) < 4e-12);
}

TEST_CASE("wavelength and frequency conversions") {
  CHECK(wavelength_to_frequency(599.58) == doctest::Approx(5.0e14).epsilon(1e-4));
  CHECK(std::abs(wavelength_to_frequency(599.58) - 5.00004099536342e14) / 5e14 < 1e-12);
  for (double nm : {250.0, 431.7, 599.58, 661.0, 1500.0}) {
    const double back = frequency_to_wavelength(wavelength_to_frequency(nm));
    CHECK(std::abs(back - nm) / nm < 1e-12);
    CHECK(TransitionRecord::from_wavelength_nm(nm, 0.1).wavelength_nm() == doctest::Approx(nm).epsilon(1e-12));
  }
  CHECK_THROWS_AS(wavelength_to_frequency(0.0), Error);
  CHECK_THROWS_AS(frequency_to_wavelength(-1.0), Error);
  try {
    kr_from_transition(TransitionRecord::from_frequency_hz(0.0, 1e-3));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonPositiveFrequency);
  }
}

TEST_CASE("log10 rates") {
  CHECK(log10_rate(1.0e5) == 5.0);
  CHECK(std::abs(log10_rate(1.2e5) - 5.079181246047625) < 1e-12);
  for (double k : {1.0, 3.3e3, 1.2e5, 7.7e6}) CHECK(std::abs(rate_from_log10(log10_rate(k)) - k) / k < 1e-12);
  try {
    log10_rate(0.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NonPositive);
  }
}
