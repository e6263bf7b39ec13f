#include "nvdephase/dephasing_budget.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nvd {

namespace {

void require_nonnegative(double value, const char* name) {
  if (!std::isfinite(value) || value < 0.0) {
    throw std::invalid_argument(std::string(name) + " must be finite and >= 0");
  }
}

std::string format_magnitude(double value, const std::string& unit) {
  if (unit.empty()) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%g %s", value, unit.c_str());
  return buf;
}

}  // namespace

std::string to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::Nitrogen: return "nitrogen";
    case ChannelKind::Carbon13: return "carbon13";
    case ChannelKind::OtherSpins: return "other_spins";
    case ChannelKind::StrainGradient: return "strain_gradient";
    case ChannelKind::FieldGradient: return "field_gradient";
    case ChannelKind::TempFluctuation: return "temperature";
    case ChannelKind::NVNV: return "nv_nv";
  }
  return "unknown";
}

double dq_basis_scaling(ChannelKind kind) {
  return kind == ChannelKind::StrainGradient || kind == ChannelKind::TempFluctuation ? 0.0 : 2.0;
}

double DephasingChannel::t2() const {
  return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

DephasingChannel make_channel(ChannelKind kind, std::string label, double rate, double magnitude,
                              std::string magnitude_unit, std::string method) {
  require_nonnegative(rate, "channel rate");
  DephasingChannel c;
  c.kind = kind;
  c.label = std::move(label);
  c.rate = rate;
  c.magnitude = magnitude;
  c.magnitude_unit = std::move(magnitude_unit);
  c.basis_scaling = dq_basis_scaling(kind);
  c.method = std::move(method);
  return c;
}

double dipolar_rate_nn(double n_ppm, const CouplingConstants& k) {
  require_nonnegative(n_ppm, "n_ppm");
  return k.dipolar_nn_rad_s_per_ppm * n_ppm;
}

double rate_13c(double c13_percent, const CouplingConstants& k, Warnings* warnings) {
  require_nonnegative(c13_percent, "c13_percent");
  if (c13_percent > 1.1) {
    warn(warnings, "13C abundance above natural abundance; dilute-limit coefficient is out of regime");
  }
  return k.nv_c13_rad_s_per_percent * c13_percent;
}

double calibrate_13c(double t2_dq_seconds, double n_ppm, double c13_percent,
                     const CouplingConstants& k) {
  if (!(t2_dq_seconds > 0.0) || !(c13_percent > 0.0)) {
    throw std::invalid_argument("calibrate_13c needs positive t2 and 13C abundance");
  }
  require_nonnegative(n_ppm, "n_ppm");
  const double numerator = 1.0 / (2.0 * t2_dq_seconds) - k.nv_n_rad_s_per_ppm * n_ppm;
  if (numerator < 0.0) {
    throw InconsistentInputsError("nitrogen contribution exceeds the measured dephasing rate");
  }
  return numerator / c13_percent;
}

double strain_limit(double gradient_hz_per_um, double length_um) {
  require_nonnegative(gradient_hz_per_um, "strain gradient");
  require_nonnegative(length_um, "spot length");
  const double rate = constants::pi * gradient_hz_per_um * length_um;
  return rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
}

double field_gradient_limit(double coeff_mhz_per_gauss, double bias_gauss) {
  require_nonnegative(coeff_mhz_per_gauss, "gradient coefficient");
  require_nonnegative(bias_gauss, "bias field");
  return 1.0e6 * coeff_mhz_per_gauss * bias_gauss;
}

double empirical_nvn_rate(double n_ppm, const CouplingConstants& k) {
  require_nonnegative(n_ppm, "n_ppm");
  return k.nv_n_rad_s_per_ppm * n_ppm;
}

double nvnv_rate(double n_ppm, double n_nv_fraction, const CouplingConstants& k) {
  require_nonnegative(n_ppm, "n_ppm");
  require_nonnegative(n_nv_fraction, "n_nv");
  return k.nv_nv_rad_s_per_ppm * n_nv_fraction * n_ppm / 4.0;
}

double temperature_rate(double fluctuation_k) {
  require_nonnegative(fluctuation_k, "temperature fluctuation");
  return constants::pi * std::abs(constants::nv_dd_dt_hz_per_k) * fluctuation_k;
}

std::string to_string(NitrogenModel model) {
  switch (model) {
    case NitrogenModel::Dipolar: return "dipolar";
    case NitrogenModel::Empirical: return "empirical";
    case NitrogenModel::None: return "none";
  }
  return "unknown";
}

NitrogenModel nitrogen_model_from_string(const std::string& name) {
  if (name == "dipolar") return NitrogenModel::Dipolar;
  if (name == "empirical") return NitrogenModel::Empirical;
  if (name == "none") return NitrogenModel::None;
  throw std::invalid_argument("unknown nitrogen model '" + name + "'");
}

void validate(const SampleSpec& spec) {
  require_nonnegative(spec.n_ppm, "n_ppm");
  require_nonnegative(spec.c13_percent, "c13_percent");
  require_nonnegative(spec.strain_gradient_hz_per_um, "strain_gradient_hz_per_um");
  require_nonnegative(spec.spot_length_um, "spot_length_um");
  require_nonnegative(spec.grad_coeff_mhz_per_gauss, "grad_coeff_mhz_per_gauss");
  require_nonnegative(spec.bias_gauss, "bias_gauss");
  require_nonnegative(spec.temperature_fluctuation_k, "temperature_fluctuation_k");
  for (const auto& extra : spec.extra_channels) {
    require_nonnegative(extra.rate_per_us, ("extra channel '" + extra.label + "' rate").c_str());
  }
}

std::vector<DephasingChannel> build_channels(const SampleSpec& spec, const CouplingConstants& k,
                                             Warnings* warnings) {
  validate(spec);
  std::vector<DephasingChannel> out;
  const double strain_t2 = strain_limit(spec.strain_gradient_hz_per_um, spec.spot_length_um);
  if (std::isfinite(strain_t2)) {
    out.push_back(make_channel(ChannelKind::StrainGradient, "strain", 1.0 / strain_t2,
                               spec.strain_gradient_hz_per_um * 1e-6, "MHz/um", "estimate"));
  }
  if (spec.n_ppm > 0.0 && spec.nitrogen_model != NitrogenModel::None) {
    const bool dipolar = spec.nitrogen_model == NitrogenModel::Dipolar;
    out.push_back(make_channel(ChannelKind::Nitrogen, "14N",
                               dipolar ? dipolar_rate_nn(spec.n_ppm, k) : empirical_nvn_rate(spec.n_ppm, k),
                               spec.n_ppm, "ppm", dipolar ? "dipolar estimate" : "empirical"));
  }
  for (const auto& extra : spec.extra_channels) {
    out.push_back(make_channel(extra.kind, extra.label, extra.rate_per_us * 1e6, 0.0, {}, extra.method));
  }
  if (spec.c13_percent > 0.0) {
    out.push_back(make_channel(ChannelKind::Carbon13, "13C", rate_13c(spec.c13_percent, k, warnings),
                               spec.c13_percent, "%", "calibration"));
  }
  const double gradient = field_gradient_limit(spec.grad_coeff_mhz_per_gauss, spec.bias_gauss);
  if (gradient > 0.0) {
    out.push_back(make_channel(ChannelKind::FieldGradient, "field gradient", gradient,
                               spec.grad_coeff_mhz_per_gauss, "MHz/G", "estimate"));
  }
  if (spec.temperature_fluctuation_k > 0.0) {
    out.push_back(make_channel(ChannelKind::TempFluctuation, "temperature",
                               temperature_rate(spec.temperature_fluctuation_k),
                               spec.temperature_fluctuation_k, "K", "estimate"));
  }
  return out;
}

std::string to_string(Basis basis) { return basis == Basis::SQ ? "SQ" : "DQ"; }

BudgetReport combine_budget(const std::vector<DephasingChannel>& channels, Basis basis) {
  if (channels.empty()) throw std::invalid_argument("budget needs at least one channel");
  BudgetReport report;
  report.basis = basis;
  report.channels = channels;
  for (const auto& c : channels) {
    if (basis == Basis::SQ || c.basis_scaling > 0.0) report.total_rate += c.rate;
  }
  const double inf = std::numeric_limits<double>::infinity();
  report.total_t2 = report.total_rate > 0.0 ? 1.0 / report.total_rate : inf;
  if (basis == Basis::DQ) {
    report.dq_t2_doubled = report.total_t2;
    report.dq_t2 = report.total_t2 / 2.0;
  }
  return report;
}

BudgetReport combine_budget(const SampleSpec& spec, Basis basis, const CouplingConstants& k,
                            Warnings* warnings) {
  return combine_budget(build_channels(spec, k, warnings), basis);
}

std::string format_budget(const BudgetReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-22s %-18s %12s %12s  %s\n", "channel", "magnitude", "rate_per_us",
                "t2_us", "method");
  out << line;
  for (const auto& c : report.channels) {
    std::snprintf(line, sizeof line, "%-22s %-18s %12.6g %12.6g  %s\n", c.label.c_str(),
                  format_magnitude(c.magnitude, c.magnitude_unit).c_str(), c.rate * 1e-6, c.t2() * 1e6,
                  c.method.c_str());
    out << line;
  }
  const char* total = report.basis == Basis::SQ ? "total SQ" : "total DQ x2 (no strain)";
  std::snprintf(line, sizeof line, "%-22s %-18s %12.6g %12.6g\n", total, "", report.total_rate * 1e-6,
                report.total_t2 * 1e6);
  out << line;
  return out.str();
}

}  // namespace nvd
