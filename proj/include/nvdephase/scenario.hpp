#pragma once

// Scenario files: JSON trees whose physical keys carry unit suffixes
// (_mhz, _ppm, _us, ...). Exactly one task block per scenario.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nvdephase/constants.hpp"
#include "nvdephase/dephasing_budget.hpp"
#include "nvdephase/p1_spectrum.hpp"
#include "nvdephase/ramsey.hpp"
#include "nvdephase/sensitivity.hpp"

namespace nvd {

/// Constant overrides in the units people quote them in.
struct ConstantsSpec {
  double zero_field_splitting_mhz = 2870.0;
  double gyromagnetic_ghz_per_t = 28.025;
  /// Couplings as γ/2π.
  double dipolar_nn_khz_per_ppm = 9.1;
  double nv_n_khz_per_ppm = 16.6;
  double nv_nv_khz_per_ppm = 33.0;
  double nv_c13_khz_per_percent = 160.0;

  NvConstants nv() const;
  CouplingConstants couplings() const;
};

struct SpectrumTask {
  NitrogenIsotope isotope = NitrogenIsotope::N14;
  double field_mt = 8.5;
  double misalignment_deg = 0.0;
  double tilt_azimuth_deg = 0.0;
  double hwhm_khz = 500.0;
  double forbidden_amplitude = 0.1;
  double f_min_mhz = 100.0;
  double f_max_mhz = 500.0;
  int points = 8001;
};

struct BudgetTask {
  std::vector<Basis> bases{Basis::SQ, Basis::DQ};
};

struct RamseyTask {
  /// When set, fit this two-column file instead of synthesizing.
  std::string data_file;
  int n_lines = 1;
  int dm = 1;
  double c0 = 0.5;
  double t2star_us = 5.0;
  double p = 1.0;
  struct Line {
    double f_mhz = 1.0;
    double tau0_ns = 0.0;
  };
  std::vector<Line> lines;
  double t_max_us = 15.0;
  int points = 600;
  double noise_sd = 0.0;
  int spectrum_pad = 8;
};

struct DriveTask {
  int dm = 2;
  double gamma_khz = 7.0;  // γ/2π
  double delta_khz = 80.0;
  double t2_other_us = 27.0;
  double omega_min_khz = 1.0;
  double omega_max_khz = 3000.0;
  int points = 200;
  /// Optional (Ω_kHz, T2*_µs, σ_µs) file to fit.
  std::string data_file;
};

struct MonteCarloTask {
  std::vector<double> densities_ppm{1.0};
  int n_configs = 10000;
  double expected_count = 1000.0;
  double prefactor = 0.0;  // 0 selects the calibrated value
  /// Optional (n_ppm, σ_n, T2*_µs, σ_T2_µs) file for the ODR fit.
  std::string odr_file;
};

struct SensitivityTask {
  struct Point {
    double sigma = 0.0;
    double tau_us = 0.0;
    double tau_dead_us = 0.0;
    double contrast = 0.0;
    int dm = 1;
  };
  struct Setting {
    int dm = 1;
    double omega_mhz = 0.0;
    std::string label;
  };
  struct Fom {
    double n_min_ppm = 0.01;
    double n_max_ppm = 1000.0;
    int points = 121;
    double n_nv = 0.4;
    /// Absent (infinite) removes the strain channel.
    double strain_t2_us = 5.0;
    double c13_t2_us = 100.0;
    double delta_ref_khz = 80.0;
    double delta_ref_ppm = 0.75;
    double normalization_ppm = 0.1;
    std::vector<Setting> settings{{1, 0.0, "SQ"}, {2, 0.0, "DQ"}, {2, 2.0, "DQ+drive"}};
  };
  std::optional<Point> point;
  std::optional<Fom> fom;
  /// Optional one-column series for the Allan deviation.
  std::string allan_file;
  double allan_cadence_s = 1.0;
  std::vector<double> allan_taus_s;
};

/// One reproduction check against a named metric.
struct Check {
  std::string metric;
  std::optional<double> expected;
  std::optional<double> rel_tol;
  std::optional<double> abs_tol;
  std::optional<double> min;
  std::optional<double> max;
  std::string note;
};

struct Scenario {
  std::string name;
  std::uint64_t seed = 0;
  ConstantsSpec constants{};
  std::optional<SampleSpec> sample;
  std::optional<SpectrumTask> spectrum;
  std::optional<BudgetTask> budget;
  std::optional<RamseyTask> ramsey;
  std::optional<DriveTask> drive;
  std::optional<MonteCarloTask> montecarlo;
  std::optional<SensitivityTask> sensitivity;
  std::vector<Check> checks;
  /// Directory relative file references are resolved against.
  std::string base_dir;

  /// Name of the single task block, or empty if none.
  std::string task() const;
};

struct ScenarioReport {
  std::vector<std::string> violations;
  std::vector<std::string> warnings;
  bool ok() const { return violations.empty(); }
};

/// Parses scenario text. Violations name the offending field path; unknown
/// keys become warnings. The returned scenario is meaningful only if report.ok().
Scenario parse_scenario(const std::string& text, ScenarioReport& report);
Scenario load_scenario(const std::string& path, ScenarioReport& report);

/// Canonical JSON text of a scenario (every field, fixed key order).
std::string serialize_scenario(const Scenario& scenario);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace nvd
