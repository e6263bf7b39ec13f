#pragma once

// Spin-bath driving: NV-N dephasing suppressed by a resonant bath drive.
//
// 1/T2*(Ω) = Δm·γ·δ²/(δ² + Ω²) + 1/T2,other*
//
// γ is an angular rate [rad/s]; Ω and δ are ordinary frequencies [Hz].

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "nvdephase/errors.hpp"

namespace nvd {

struct DriveModel {
  double gamma_nvn = 0.0;
  double delta_n = 1.0;
  int dm = 1;
  double t2_other = 1.0;
};

/// Throws std::invalid_argument when gamma_nvn < 0, delta_n <= 0, t2_other <= 0 or dm ∉ {1,2}.
void validate(const DriveModel& model);

/// Δm·γ·δ²/(δ² + Ω²) [1/s]. Throws if omega_n < 0.
double drive_limited_rate(const DriveModel& model, double omega_n);

/// 1/(drive_limited_rate + 1/t2_other) [s].
double total_t2_with_drive(const DriveModel& model, double omega_n);

struct DrivePoint {
  double omega_n = 0.0;
  double t2star = 0.0;
  /// Zero means unknown; the fit is unweighted unless every point has sigma > 0.
  double sigma_t2 = 0.0;
};

struct DriveFitOptions {
  DriveModel initial_guess{};
  bool use_initial_guess = false;
  int max_iterations = 500;
};

struct DriveFitResult {
  DriveModel model;
  double gamma_se = 0.0;
  double delta_se = 0.0;
  double t2_other_se = 0.0;
  double chi2 = 0.0;
  double reduced_chi2 = 0.0;
  bool converged = false;
  bool delta_at_lower_bound = false;
  /// Set when the data do not constrain δ (near-singular Jacobian or SE > δ/2).
  bool delta_unidentifiable = false;
  /// Per point: Ω <= δ, where the coherent-drive picture is questionable.
  std::vector<bool> incoherent_regime;
  std::string message;
};

/// Least squares over {γ, δ, T2,other*} with weights 1/σ² when all σ > 0.
/// Throws std::invalid_argument for fewer than 4 points or invalid values.
DriveFitResult fit_drive_model(const std::vector<DrivePoint>& data, int dm,
                               const DriveFitOptions& options = {}, Warnings* warnings = nullptr);

/// T2* sampled at each Ω.
Eigen::VectorXd drive_curve(const DriveModel& model, const Eigen::VectorXd& omega_n);

}  // namespace nvd
