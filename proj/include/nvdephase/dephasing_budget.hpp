#pragma once

// Per-mechanism dephasing rates and their linear sum.
//
// Conventions differ by channel: dipolar channels use 1/T2* = γ [rad/s],
// strain uses 1/T2* = π·Δf, field gradients use 1/T2* = Δf.

#include <string>
#include <vector>

#include "nvdephase/constants.hpp"
#include "nvdephase/errors.hpp"

namespace nvd {

enum class ChannelKind { Nitrogen, Carbon13, OtherSpins, StrainGradient, FieldGradient, TempFluctuation, NVNV };

std::string to_string(ChannelKind kind);

/// Factor applied to a channel's rate in the DQ basis: 2 for magnetic kinds,
/// 0 for strain and temperature.
double dq_basis_scaling(ChannelKind kind);

struct DephasingChannel {
  ChannelKind kind = ChannelKind::OtherSpins;
  std::string label;
  double magnitude = 0.0;
  std::string magnitude_unit;
  /// SQ-basis rate [1/s].
  double rate = 0.0;
  double basis_scaling = 2.0;
  std::string method;

  double t2() const;  // +inf for a zero rate
};

/// Makes a channel with the basis scaling of its kind. Throws on rate < 0.
DephasingChannel make_channel(ChannelKind kind, std::string label, double rate,
                              double magnitude = 0.0, std::string magnitude_unit = {},
                              std::string method = {});

/// 2π·9.1 kHz·[N] [1/s].
double dipolar_rate_nn(double n_ppm, const CouplingConstants& k = {});

/// 2π·160 kHz·c13 [1/s]. Above natural abundance a warning is emitted.
double rate_13c(double c13_percent, const CouplingConstants& k = {}, Warnings* warnings = nullptr);

/// ¹³C coefficient [rad/s per %] from a measured DQ dephasing time, after
/// removing the nitrogen contribution. Throws InconsistentInputsError when
/// nitrogen alone exceeds the measured rate.
double calibrate_13c(double t2_dq_seconds, double n_ppm, double c13_percent,
                     const CouplingConstants& k = {});

/// Strain-gradient T2* limit 1/(π·gradient·length) [s]; +inf for zero gradient.
double strain_limit(double gradient_hz_per_um, double length_um);

/// Field-gradient rate coeff·bias, in MHz, read directly as 1/µs [1/s].
double field_gradient_limit(double coeff_mhz_per_gauss, double bias_gauss);

/// 2π·16.6 kHz·[N] [1/s], SQ basis.
double empirical_nvn_rate(double n_ppm, const CouplingConstants& k = {});

/// A_NV-NV·n_NV·[N]/4 [1/s], SQ basis.
double nvnv_rate(double n_ppm, double n_nv_fraction, const CouplingConstants& k = {});

/// π·|dD/dT|·ΔT [1/s].
double temperature_rate(double fluctuation_k);

enum class NitrogenModel { Dipolar, Empirical, None };

std::string to_string(NitrogenModel model);
NitrogenModel nitrogen_model_from_string(const std::string& name);

struct ExtraChannel {
  std::string label;
  double rate_per_us = 0.0;
  ChannelKind kind = ChannelKind::OtherSpins;
  std::string method = "SEDOR";
};

struct SampleSpec {
  std::string name;
  double n_ppm = 0.0;
  double c13_percent = 0.0;
  double strain_gradient_hz_per_um = 0.0;
  double spot_length_um = 0.0;
  double grad_coeff_mhz_per_gauss = 0.0;
  double bias_gauss = 0.0;
  double temperature_fluctuation_k = 0.0;
  NitrogenModel nitrogen_model = NitrogenModel::Dipolar;
  std::vector<ExtraChannel> extra_channels;
};

/// Throws std::invalid_argument naming the first negative or non-finite field.
void validate(const SampleSpec& spec);

/// Channels implied by a sample. Zero-rate channels are omitted.
std::vector<DephasingChannel> build_channels(const SampleSpec& spec, const CouplingConstants& k = {},
                                             Warnings* warnings = nullptr);

enum class Basis { SQ, DQ };

std::string to_string(Basis basis);

struct BudgetReport {
  Basis basis = Basis::SQ;
  std::vector<DephasingChannel> channels;
  /// SQ: sum of all rates. DQ: sum of magnetic SQ rates (the "DQ ×2" row).
  double total_rate = 0.0;
  double total_t2 = 0.0;
  /// DQ only: T2,DQ* = 1/(2·total_rate) and 2·T2,DQ*.
  double dq_t2 = 0.0;
  double dq_t2_doubled = 0.0;
};

/// Throws std::invalid_argument for an empty channel set.
BudgetReport combine_budget(const std::vector<DephasingChannel>& channels, Basis basis);
BudgetReport combine_budget(const SampleSpec& spec, Basis basis, const CouplingConstants& k = {},
                            Warnings* warnings = nullptr);

/// Aligned plain-text table: channel, magnitude, rate [1/µs], T2* [µs], method.
std::string format_budget(const BudgetReport& report);

}  // namespace nvd
