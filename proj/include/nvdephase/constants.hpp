#pragma once

#include <numbers>

namespace nvd {

namespace constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Vacuum permeability over 4π [T·m/A].
inline constexpr double mu0_over_4pi = 1.0e-7;
/// Bohr magneton [J/T].
inline constexpr double bohr_magneton = 9.2740100783e-24;
/// Planck constant [J·s].
inline constexpr double planck = 6.62607015e-34;
/// Reduced Planck constant [J·s].
inline constexpr double hbar = planck / two_pi;
/// Bohr magneton over h [Hz/T].
inline constexpr double bohr_magneton_hz_per_t = bohr_magneton / planck;
/// Free electron g-factor.
inline constexpr double electron_g = 2.00231930436256;

/// NV zero-field splitting D [Hz].
inline constexpr double nv_zero_field_splitting_hz = 2.870e9;
/// NV gyromagnetic ratio γ/2π [Hz/T].
inline constexpr double nv_gyromagnetic_hz_per_t = 28.025e9;
/// dD/dT [Hz/K].
inline constexpr double nv_dd_dt_hz_per_k = -74.0e3;

/// Nitrogen number density per ppm of diamond [m^-3] (1 ppm = 1.76e17 cm^-3).
inline constexpr double ppm_number_density_m3 = 1.76e23;

/// Default ¹⁴N NV hyperfine triplet spacing [Hz] used as Ramsey line spacing.
inline constexpr double nv_n14_hyperfine_spacing_hz = 2.158e6;

}  // namespace constants

/// NV spin constants that a scenario may override.
struct NvConstants {
  double zero_field_splitting_hz = constants::nv_zero_field_splitting_hz;
  double gyromagnetic_hz_per_t = constants::nv_gyromagnetic_hz_per_t;
};

/// Empirical and estimated NV coupling coefficients, all angular rates.
struct CouplingConstants {
  /// Dipolar N–N estimate γ_e-e per ppm [rad/s/ppm].
  double dipolar_nn_rad_s_per_ppm = constants::two_pi * 9.1e3;
  /// Fitted NV–N coupling per ppm, SQ basis [rad/s/ppm].
  double nv_n_rad_s_per_ppm = constants::two_pi * 16.6e3;
  /// NV–NV coupling per ppm of NV [rad/s/ppm].
  double nv_nv_rad_s_per_ppm = constants::two_pi * 33.0e3;
  /// NV–¹³C coupling per percent abundance [rad/s/%].
  double nv_c13_rad_s_per_percent = constants::two_pi * 160.0e3;
};

inline double ppm_to_per_m3(double ppm) { return ppm * constants::ppm_number_density_m3; }
inline double per_m3_to_ppm(double n) { return n / constants::ppm_number_density_m3; }

}  // namespace nvd
