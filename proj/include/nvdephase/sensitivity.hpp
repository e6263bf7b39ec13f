#pragma once

// Ramsey DC sensitivity with dead time, optimal sensing time, the η_N
// concentration figure of merit, and overlapping Allan deviation.

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

#include "nvdephase/constants.hpp"
#include "nvdephase/errors.hpp"

namespace nvd {

/// γ/2π used by the sensitivity formula [Hz/T].
inline constexpr double kSensitivityGyromagneticHzPerT = 28.0e9;

struct SensitivityParams {
  double sigma = 0.0;
  double tau = 0.0;
  double tau_d = 0.0;
  double contrast = 0.0;
  int dm = 1;
};

/// Throws std::invalid_argument unless sigma, tau, contrast > 0, tau_d >= 0, dm ∈ {1,2}.
void validate(const SensitivityParams& p);

/// η = σ·sqrt(τ + τ_D)/(Δm·C·γ·τ) [T/√Hz], γ = 2π·28 GHz/T.
double ramsey_sensitivity(const SensitivityParams& p);

/// C(τ) as a function of sensing time.
using ContrastFunction = std::function<double(double)>;

ContrastFunction constant_contrast(double c);
/// C0·exp[-(τ/T2*)^p].
ContrastFunction stretched_contrast(double c0, double t2star, double p);

/// η(τ) with C taken from `contrast`.
double ramsey_sensitivity(double sigma, double tau, double tau_d, const ContrastFunction& contrast, int dm);

/// τ minimizing η for a stretched-exponential contrast (independent of C0 and σ).
double optimal_tau(double t2star, double p_exponent, double tau_d);

struct FomSetting {
  int dm = 1;
  double omega_n_hz = 0.0;
  std::string label;
};

struct FomSpec {
  std::vector<double> n_ppm;
  double n_nv = 0.4;
  /// SQ-only strain limit; +inf removes the channel.
  double strain_t2 = 5e-6;
  double c13_t2 = 100e-6;
  CouplingConstants couplings{};
  /// δ_N = delta_ref_hz·[N]/delta_ref_ppm.
  double delta_ref_hz = 80e3;
  double delta_ref_ppm = 0.75;
  /// η_N is normalized to 1 for SQ, Ω = 0 at this concentration.
  double normalization_ppm = 0.1;
  std::vector<FomSetting> settings{{1, 0.0, "SQ"}, {2, 0.0, "DQ"}, {2, 2.0e6, "DQ+drive"}};
};

/// Throws std::invalid_argument on an empty or non-positive grid, n_nv ∉ (0,1] or invalid settings.
void validate(const FomSpec& spec);

/// Default grid: 121 log-spaced points over [0.01, 1000] ppm.
std::vector<double> default_fom_grid();

struct FomCurve {
  FomSetting setting;
  Eigen::VectorXd n_ppm;
  Eigen::VectorXd t2star;
  Eigen::VectorXd eta;
};

/// T2* at one concentration from the ¹³C, strain, NV-N (with drive) and NV-NV channels.
double fom_t2star(const FomSpec& spec, double n_ppm, int dm, double omega_n_hz);

/// η_N = 1/(Δm·sqrt(n_NV·[N]·T2*)) in normalized units, one curve per setting.
std::vector<FomCurve> eta_n_sweep(const FomSpec& spec);

/// Concentration where the SQ strain rate equals the SQ dipolar (NV-N + NV-NV,
/// Ω = 0) rate, log-interpolated on the spec grid. NaN if the grid never crosses.
double fom_crossover_ppm(const FomSpec& spec);

struct AllanPoint {
  double tau = 0.0;
  double adev = 0.0;
};

/// Overlapping Allan deviation of a series sampled every `cadence` seconds.
/// Each τ is rounded to a whole number of samples; τ values needing more than
/// half the series are dropped with a warning.
std::vector<AllanPoint> allan_deviation(const Eigen::VectorXd& series, double cadence, const std::vector<double>& taus,
                                        Warnings* warnings = nullptr);

}  // namespace nvd
