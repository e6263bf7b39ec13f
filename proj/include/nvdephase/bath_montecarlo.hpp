#pragma once

// Random dipolar nitrogen baths around a single NV, per-configuration
// second-moment linewidths, ensemble T2*, and the through-origin ODR fit used
// for concentration series.

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "nvdephase/constants.hpp"
#include "nvdephase/errors.hpp"

namespace nvd {

/// Spin-1/2 prefactor s of the dipolar coupling, fixed once so that the
/// ensemble T2* at 1 ppm equals 9.6 µs (median statistic, 10⁴ configurations,
/// seed kCalibrationSeed). Scaling results do not depend on it.
inline constexpr double kCalibratedPrefactor = 0.30916521775671;
inline constexpr std::uint64_t kCalibrationSeed = 20240611;
inline constexpr double kCalibrationT2PerPpm = 9.6e-6;

/// Minimum NV–spin and spin–spin distance [m].
inline constexpr double kDefaultExclusionRadius = 0.15e-9;

struct BathConfig {
  std::vector<Eigen::Vector3d> positions;
  double density_ppm = 0.0;
  double region_radius = 0.0;
  std::uint64_t seed = 0;
};

/// 64-bit mixer used to derive independent per-configuration seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of configuration `index` under root seed `seed`.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

/// round(n·V) spins uniform in a sphere of `region_radius` [m] around the NV
/// at the origin, none closer than `exclusion_radius` to the NV or each other.
/// Throws std::invalid_argument when the expected count is positive but below
/// one, or the exclusion volume cannot hold the spins.
BathConfig sample_bath(double density_ppm, double region_radius, std::uint64_t seed,
                       double exclusion_radius = kDefaultExclusionRadius, Warnings* warnings = nullptr);

/// μ0/4π · g²μB²/ħ [rad/s · m³].
double dipolar_constant(double g = constants::electron_g);

/// Δω = sqrt(Σ b_j²), b_j = s·C·(1 - 3cos²θ_j)/r_j³ [rad/s].
double config_linewidth(const BathConfig& config, const Eigen::Vector3d& nv_axis = Eigen::Vector3d::UnitZ(),
                        double prefactor = kCalibratedPrefactor, double g = constants::electron_g);

struct EnsembleOptions {
  int threads = 1;
  double prefactor = kCalibratedPrefactor;
  /// Expected spin count used to size the region when region_radius is 0.
  double expected_count = 1000.0;
  double region_radius = 0.0;
  Eigen::Vector3d nv_axis = Eigen::Vector3d::UnitZ();
  bool keep_linewidths = false;
};

struct EnsembleResult {
  double t2 = 0.0;
  /// Linewidth quantiles [rad/s].
  double q10 = 0.0;
  double q50 = 0.0;
  double q90 = 0.0;
  double region_radius = 0.0;
  int n_configs = 0;
  std::vector<double> linewidths;
};

/// Sphere radius holding `expected_count` spins on average [m].
double region_radius_for_count(double density_ppm, double expected_count);

/// T2* = 1/median(Δω) over `n_configs` configurations. Results are identical
/// for any thread count. Throws when n_configs < 100 or density <= 0.
EnsembleResult ensemble_t2(double density_ppm, int n_configs, std::uint64_t seed,
                           const EnsembleOptions& options = {});

/// Prefactor s that makes ensemble_t2 at `density_ppm` equal `target_t2`.
double calibrate_prefactor(double density_ppm, double target_t2, int n_configs, std::uint64_t seed,
                           int threads = 1);

struct ConcentrationPoint {
  double n_ppm = 0.0;
  double sigma_n = 0.0;
  double t2star = 0.0;
  double sigma_t2 = 0.0;
};

struct OdrResult {
  /// Slope of 1/T2* [rad/s] against [N] [ppm].
  double slope = 0.0;
  double slope_se = 0.0;
  double chi2 = 0.0;
  bool weighted = true;
};

/// One-parameter errors-in-variables fit of y = A·x with y = 1/T2*,
/// minimizing Σ (y - A·x)²/(σy² + A²σx²). Standard error from the curvature,
/// scaled by the reduced χ². With all uncertainties zero it falls back to
/// unweighted total least squares. Throws for < 2 points, non-positive
/// values, or a point with zero uncertainty among weighted ones.
OdrResult odr_fit_linear(const std::vector<ConcentrationPoint>& points);

/// Same objective on raw (x, σx, y, σy) columns.
OdrResult odr_fit_through_origin(const Eigen::VectorXd& x, const Eigen::VectorXd& sx, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& sy);

}  // namespace nvd
