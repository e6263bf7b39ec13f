#pragma once

// Substitutional nitrogen (P1) spin Hamiltonian and NV-detected DEER spectra.

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "nvdephase/spin_models.hpp"

namespace nvd {

enum class NitrogenIsotope { N14, N15 };

struct NitrogenSpecies {
  NitrogenIsotope isotope = NitrogenIsotope::N14;
  double electron_spin = 0.5;
  double nuclear_spin = 1.0;
  double g = 2.0025;
  double a_par_hz = 0.0;
  double a_perp_hz = 0.0;
  /// Quadrupole coupling P_par; zero for I = 1/2.
  double p_par_hz = 0.0;

  int nuclear_dimension() const { return static_cast<int>(2.0 * nuclear_spin + 1.0 + 0.5); }
  int dimension() const { return 2 * nuclear_dimension(); }

  /// g = 2.0025, A_par = 114 MHz, A_perp = 81.3 MHz, P_par = -3.97 MHz.
  static NitrogenSpecies n14();
  /// g = 2.0025, A_par = -159.7 MHz, A_perp = -113.83 MHz, P_par = 0.
  static NitrogenSpecies n15();
};

/// Throws std::invalid_argument when the isotope/spin/quadrupole combination is inconsistent.
void validate(const NitrogenSpecies& species);

std::string to_string(NitrogenIsotope isotope);

/// Number of Jahn-Teller orientations.
inline constexpr int kJahnTellerAxes = 4;

/// Unit vector of Jahn-Teller axis `index` (0..3) in the lab frame, where z is
/// the [111] axis the bias field is aligned to. Axis 0 is z; axes 1..3 sit at
/// 109.471° with azimuths 0°, 120°, 240°.
Eigen::Vector3d jahn_teller_axis(int index);

/// Rotation taking lab-frame vectors into the frame where jahn_teller_axis(index) is z.
Eigen::Matrix3d jahn_teller_frame(int index);

/// H/h in hertz for one P1 center, product basis |m_S> ⊗ |m_I> with both
/// projections in descending order. `b` is the lab-frame field; it is rotated
/// into the Jahn-Teller frame of `jt_axis`. Nuclear Zeeman is omitted.
Eigen::MatrixXcd build_p1_hamiltonian(const FieldVector& b, const NitrogenSpecies& species,
                                      int jt_axis);

struct SpectralLine {
  double frequency_hz = 0.0;
  double relative_amplitude = 0.0;
  std::string label;
  bool allowed = false;
  int orientation = 0;
  /// Nuclear projections of the lower and upper state along the hyperfine axis.
  double m_i_lower = 0.0;
  double m_i_upper = 0.0;
  /// |<upper|S_perp|lower>|^2 summed over both transverse components.
  double transition_strength = 0.0;
};

/// All electron-spin-flip lines of the four orientations for a lab-frame field.
/// Allowed lines (Δm_I = 0) get amplitude 1 per orientation; |Δm_I| = 1 lines
/// are emitted with allowed = false and amplitude `forbidden_amplitude`.
std::vector<SpectralLine> p1_lines(const FieldVector& b, const NitrogenSpecies& species,
                                   double forbidden_amplitude = 0.1);

struct DeerOptions {
  double forbidden_amplitude = 0.1;
  double f_min_hz = 100.0e6;
  double f_max_hz = 500.0e6;
  int points = 8001;
  /// Azimuth of the field tilt in the lab frame.
  double tilt_azimuth_deg = 0.0;
};

struct DeerSpectrum {
  std::vector<SpectralLine> lines;
  Eigen::VectorXd frequency_hz;
  Eigen::VectorXd amplitude;
};

/// Field of magnitude `b0` tilted `misalignment_deg` from the [111] axis.
FieldVector tilted_field(double b0, double misalignment_deg, double azimuth_deg = 0.0);

/// Line table plus a sum of Lorentzians (half width `hwhm_hz`) sampled on the
/// options' frequency grid. Throws std::invalid_argument if hwhm_hz <= 0.
DeerSpectrum p1_deer_spectrum(double b0, double misalignment_deg, const NitrogenSpecies& species,
                              double hwhm_hz, const DeerOptions& options = {});

struct LineGroup {
  double center_hz = 0.0;
  double min_hz = 0.0;
  double max_hz = 0.0;
  /// Summed relative amplitude of member lines.
  double weight = 0.0;
  std::vector<SpectralLine> lines;

  double width_hz() const { return max_hz - min_hz; }
};

/// Clusters the allowed lines: consecutive lines closer than `gap_hz` share a group.
std::vector<LineGroup> group_allowed_lines(const std::vector<SpectralLine>& lines,
                                           double gap_hz = 3.0e6);

/// Sub-cluster sizes inside a group at resolution `resolution_hz`, e.g. {1, 2}.
std::vector<int> group_pattern(const LineGroup& group, double resolution_hz = 1.0e3);

}  // namespace nvd
