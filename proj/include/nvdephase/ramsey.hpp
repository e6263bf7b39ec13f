#pragma once

// Ramsey free-induction decay: synthesis, fitting, spectrum, DC fringes.
//
// s(τ) = C0·exp[-(τ/T2*)^p]·Σ_i cos(2π·Δm·f_i·(τ - τ0_i))
//
// f_i is the physical detuning; the accumulated phase runs Δm times faster.

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nvdephase/constants.hpp"
#include "nvdephase/errors.hpp"

namespace nvd {

struct RamseyLine {
  double f_hz = 0.0;
  double tau0_s = 0.0;
};

struct RamseyParams {
  double c0 = 1.0;
  double t2star = 1e-6;
  double p = 1.0;
  std::vector<RamseyLine> lines;
  int dm = 1;

  /// Frequency of line i as seen in the signal, Δm·f_i.
  double observed_frequency(std::size_t i) const { return dm * lines.at(i).f_hz; }
};

/// Throws std::invalid_argument when c0 ∉ (0,1], t2star <= 0, p ∉ [0.5,3],
/// line count ∉ [1,3] or dm ∉ {1,2}.
void validate(const RamseyParams& params);

/// Noiseless model evaluated at `times` [s].
Eigen::VectorXd ramsey_model(const RamseyParams& params, const Eigen::VectorXd& times);

/// Model plus white Gaussian noise of standard deviation `noise_sd`,
/// deterministic for a given seed.
Eigen::VectorXd synthesize_ramsey(const RamseyParams& params, const Eigen::VectorXd& times,
                                  double noise_sd = 0.0, std::uint64_t seed = 0);

struct RamseyFitOptions {
  int dm = 1;
  std::optional<RamseyParams> initial_guess;
  /// Per-sample standard deviations; empty means unweighted.
  Eigen::VectorXd sigma;
  int max_iterations = 400;
};

struct RamseyFitResult {
  RamseyParams params;
  /// Standard errors in the same units as params.
  double c0_se = 0.0;
  double t2star_se = 0.0;
  double p_se = 0.0;
  std::vector<RamseyLine> line_se;
  double residual_norm = 0.0;
  double reduced_chi2 = 0.0;
  bool converged = false;
  bool p_at_bound = false;
  int iterations = 0;
  std::string message;
};

/// Nonlinear least squares over {C0, T2*, p, f_i, τ0_i}.
/// Throws std::invalid_argument with fewer than 10 samples per free parameter.
RamseyFitResult fit_ramsey(const Eigen::VectorXd& times, const Eigen::VectorXd& signal, int n_lines,
                           const RamseyFitOptions& options = {}, Warnings* warnings = nullptr);

struct Spectrum {
  Eigen::VectorXd frequency_hz;
  Eigen::VectorXd magnitude;
};

/// One-sided DFT magnitude of the mean-removed signal, zero padded to
/// `pad_factor` times the sample count. Throws on a non-uniform grid.
Spectrum ramsey_spectrum(const Eigen::VectorXd& times, const Eigen::VectorXd& signal, int pad_factor = 1);

/// Frequencies of the `count` largest local maxima, ascending.
std::vector<double> spectrum_peaks(const Spectrum& spectrum, int count, double min_separation_hz = 0.0);

/// S(B) = C·sin(Δm·γ·B·τ) with γ = 2π·gyromagnetic ratio.
Eigen::VectorXd dc_fringe(double contrast, int dm, double tau, const Eigen::VectorXd& b_values,
                          const NvConstants& c = {});

/// Fringe period ΔB = 2π/(Δm·γ·τ) [T].
double fringe_period(int dm, double tau, const NvConstants& c = {});

}  // namespace nvd
