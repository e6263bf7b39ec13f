#include "nvdephase/run.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>

#include "nvdephase/bath_drive.hpp"
#include "nvdephase/bath_montecarlo.hpp"
#include "nvdephase/delimited.hpp"

namespace nvd {

namespace {

using ordered = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string resolve(const Scenario& sc, const std::string& file) {
  if (file.empty() || fs::path(file).is_absolute() || sc.base_dir.empty()) return file;
  return (fs::path(sc.base_dir) / file).string();
}

std::string table_text(const std::vector<std::string>& header, const Eigen::MatrixXd& rows) {
  std::ostringstream out;
  write_table(out, header, rows);
  return out.str();
}

std::string json_text(const ordered& j) { return j.dump(2) + "\n"; }

ordered metrics_json(const std::map<std::string, double>& metrics) {
  ordered j = ordered::object();
  for (const auto& [k, v] : metrics) j[k] = std::isfinite(v) ? ordered(v) : ordered(nullptr);
  return j;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

TaskResult run_spectrum(const Scenario& sc) {
  const SpectrumTask& t = *sc.spectrum;
  const NitrogenSpecies species = t.isotope == NitrogenIsotope::N14 ? NitrogenSpecies::n14() : NitrogenSpecies::n15();
  DeerOptions options;
  options.forbidden_amplitude = t.forbidden_amplitude;
  options.f_min_hz = t.f_min_mhz * 1e6;
  options.f_max_hz = t.f_max_mhz * 1e6;
  options.points = t.points;
  options.tilt_azimuth_deg = t.tilt_azimuth_deg;
  const DeerSpectrum spec = p1_deer_spectrum(t.field_mt * 1e-3, t.misalignment_deg, species, t.hwhm_khz * 1e3, options);

  TaskResult r;
  Eigen::MatrixXd curve(spec.frequency_hz.size(), 2);
  curve << spec.frequency_hz, spec.amplitude;
  r.files.push_back({"spectrum.tsv", table_text({"frequency_hz", "amplitude"}, curve)});

  Eigen::MatrixXd lines(static_cast<Eigen::Index>(spec.lines.size()), 6);
  ordered records = ordered::array();
  int allowed = 0;
  for (std::size_t i = 0; i < spec.lines.size(); ++i) {
    const SpectralLine& l = spec.lines[i];
    lines.row(static_cast<Eigen::Index>(i)) << l.frequency_hz, l.relative_amplitude, l.allowed ? 1.0 : 0.0,
        l.orientation, l.m_i_lower, l.m_i_upper;
    records.push_back({{"frequency_hz", l.frequency_hz},
                       {"weight", l.relative_amplitude},
                       {"label", l.label},
                       {"allowed", l.allowed}});
    allowed += l.allowed;
  }
  r.files.push_back({"lines.tsv", table_text({"frequency_hz", "amplitude", "allowed", "orientation", "m_i_lower",
                                              "m_i_upper"},
                                             lines)});
  r.files.push_back({"lines.json", json_text(records)});

  const auto groups = group_allowed_lines(spec.lines);
  r.metrics["allowed_lines"] = allowed;
  r.metrics["forbidden_lines"] = static_cast<double>(spec.lines.size()) - allowed;
  r.metrics["groups"] = static_cast<double>(groups.size());
  std::ostringstream text;
  text << "group  center_mhz  weight  width_khz  pattern\n";
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const std::string key = "group" + std::to_string(g + 1);
    r.metrics[key + ".center_mhz"] = groups[g].center_hz * 1e-6;
    r.metrics[key + ".weight"] = groups[g].weight;
    r.metrics[key + ".width_khz"] = groups[g].width_hz() * 1e-3;
    text << std::setw(5) << g + 1 << "  " << std::setw(10) << std::fixed << std::setprecision(4)
         << groups[g].center_hz * 1e-6 << "  " << std::setw(6) << std::setprecision(0) << groups[g].weight << "  "
         << std::setw(9) << std::setprecision(3) << groups[g].width_hz() * 1e-3 << " ";
    for (int n : group_pattern(groups[g])) text << " " << n;
    text << "\n";
  }
  double w3_min = std::numeric_limits<double>::infinity(), w3_max = 0.0;
  for (const auto& g : groups) {
    if (std::abs(g.weight - 3.0) > 0.5) continue;
    w3_min = std::min(w3_min, g.width_hz() * 1e-3);
    w3_max = std::max(w3_max, g.width_hz() * 1e-3);
  }
  if (std::isfinite(w3_min)) {
    r.metrics["weight3.min_width_khz"] = w3_min;
    r.metrics["weight3.max_width_khz"] = w3_max;
  }
  if (!groups.empty()) r.metrics["outer_split_mhz"] = (groups.back().center_hz - groups.front().center_hz) * 1e-6;
  r.text = text.str();
  return r;
}

TaskResult run_budget(const Scenario& sc) {
  TaskResult r;
  const CouplingConstants k = sc.constants.couplings();
  ordered reports = ordered::array();
  std::ostringstream text;
  for (Basis basis : sc.budget->bases) {
    const BudgetReport rep = combine_budget(*sc.sample, basis, k, &r.warnings);
    const std::string tag = basis == Basis::SQ ? "sq" : "dq2";
    text << format_budget(rep) << "\n";
    ordered channels = ordered::array();
    for (const auto& c : rep.channels) {
      const bool counted = basis == Basis::SQ || c.basis_scaling > 0.0;
      channels.push_back({{"channel", c.label},
                          {"kind", to_string(c.kind)},
                          {"magnitude", c.magnitude},
                          {"magnitude_unit", c.magnitude_unit},
                          {"rate_per_us", c.rate * 1e-6},
                          {"t2_us", std::isfinite(c.t2()) ? ordered(c.t2() * 1e6) : ordered(nullptr)},
                          {"counted", counted},
                          {"method", c.method}});
      if (basis == Basis::SQ) r.metrics["rate_per_us:" + c.label] = c.rate * 1e-6;
    }
    ordered j = {{"basis", to_string(basis)},
                 {"channels", channels},
                 {"total_rate_per_us", rep.total_rate * 1e-6},
                 {"total_t2_us", rep.total_t2 * 1e6}};
    if (basis == Basis::DQ) {
      j["dq_t2_us"] = rep.dq_t2 * 1e6;
      r.metrics["dq.t2_us"] = rep.dq_t2 * 1e6;
    }
    reports.push_back(j);
    r.metrics[tag + ".total_rate_per_us"] = rep.total_rate * 1e-6;
    r.metrics[tag + ".total_t2_us"] = rep.total_t2 * 1e6;
    r.files.push_back({"budget_" + tag + ".txt", format_budget(rep)});
  }
  r.files.push_back({"budget.json", json_text(reports)});
  r.text = text.str();
  return r;
}

TaskResult run_ramsey(const Scenario& sc, std::uint64_t seed) {
  const RamseyTask& t = *sc.ramsey;
  TaskResult r;
  Eigen::VectorXd times, signal;
  RamseyFitOptions fit_options;
  fit_options.dm = t.dm;
  int n_lines = t.n_lines;
  if (!t.data_file.empty()) {
    const Eigen::MatrixXd data = read_table_file(resolve(sc, t.data_file), 2);
    times = data.col(0);
    signal = data.col(1);
  } else {
    RamseyParams p;
    p.c0 = t.c0;
    p.t2star = t.t2star_us * 1e-6;
    p.p = t.p;
    p.dm = t.dm;
    for (const auto& l : t.lines) p.lines.push_back({l.f_mhz * 1e6, l.tau0_ns * 1e-9});
    n_lines = static_cast<int>(p.lines.size());
    times = Eigen::VectorXd::LinSpaced(t.points, 0.0, t.t_max_us * 1e-6);
    signal = synthesize_ramsey(p, times, t.noise_sd, seed);
    Eigen::MatrixXd rows(times.size(), 2);
    rows << times, signal;
    r.files.push_back({"signal.tsv", table_text({"time_s", "signal"}, rows)});
  }
  const Spectrum spectrum = ramsey_spectrum(times, signal, t.spectrum_pad);
  Eigen::MatrixXd spec_rows(spectrum.frequency_hz.size(), 2);
  spec_rows << spectrum.frequency_hz, spectrum.magnitude;
  r.files.push_back({"spectrum.tsv", table_text({"frequency_hz", "magnitude"}, spec_rows)});
  const auto peaks = spectrum_peaks(spectrum, n_lines);
  for (std::size_t i = 0; i < peaks.size(); ++i) r.metrics["peak" + std::to_string(i + 1) + "_mhz"] = peaks[i] * 1e-6;

  const RamseyFitResult fit = fit_ramsey(times, signal, n_lines, fit_options, &r.warnings);
  ordered lines = ordered::array();
  for (std::size_t i = 0; i < fit.params.lines.size(); ++i) {
    const auto& l = fit.params.lines[i];
    const auto& e = fit.line_se[i];
    lines.push_back({{"f_hz", l.f_hz}, {"f_se_hz", e.f_hz}, {"observed_f_hz", fit.params.observed_frequency(i)},
                     {"tau0_s", l.tau0_s}, {"tau0_se_s", e.tau0_s}});
    r.metrics["fit.f" + std::to_string(i + 1) + "_mhz"] = l.f_hz * 1e-6;
    r.metrics["fit.observed_f" + std::to_string(i + 1) + "_mhz"] = fit.params.observed_frequency(i) * 1e-6;
    r.metrics["fit.tau0" + std::to_string(i + 1) + "_ns"] = l.tau0_s * 1e9;
  }
  ordered j = {{"dm", fit.params.dm},
               {"c0", fit.params.c0},         {"c0_se", fit.c0_se},
               {"t2star_s", fit.params.t2star}, {"t2star_se_s", fit.t2star_se},
               {"p", fit.params.p},           {"p_se", fit.p_se},
               {"lines", lines},
               {"residual_norm", fit.residual_norm},
               {"reduced_chi2", fit.reduced_chi2},
               {"converged", fit.converged},
               {"p_at_bound", fit.p_at_bound},
               {"message", fit.message}};
  r.files.push_back({"fit.json", json_text(j)});
  r.metrics["fit.c0"] = fit.params.c0;
  r.metrics["fit.t2star_us"] = fit.params.t2star * 1e6;
  r.metrics["fit.p"] = fit.params.p;
  r.metrics["fit.converged"] = fit.converged ? 1.0 : 0.0;
  std::ostringstream text;
  text << "C0 = " << fit.params.c0 << " ± " << fit.c0_se << "\nT2* = " << fit.params.t2star * 1e6 << " ± "
       << fit.t2star_se * 1e6 << " us\np = " << fit.params.p << " ± " << fit.p_se << "\n";
  for (std::size_t i = 0; i < fit.params.lines.size(); ++i) {
    text << "f" << i + 1 << " = " << fit.params.lines[i].f_hz * 1e-6 << " MHz (observed "
         << fit.params.observed_frequency(i) * 1e-6 << " MHz), tau0 = " << fit.params.lines[i].tau0_s * 1e9 << " ns\n";
  }
  r.text = text.str();
  return r;
}

TaskResult run_drive(const Scenario& sc) {
  const DriveTask& t = *sc.drive;
  TaskResult r;
  DriveModel model;
  model.dm = t.dm;
  model.gamma_nvn = constants::two_pi * t.gamma_khz * 1e3;
  model.delta_n = t.delta_khz * 1e3;
  model.t2_other = t.t2_other_us * 1e-6;
  validate(model);

  Eigen::VectorXd omega(t.points);
  for (int i = 0; i < t.points; ++i) {
    omega(i) = 1e3 * t.omega_min_khz * std::pow(t.omega_max_khz / t.omega_min_khz, i / double(t.points - 1));
  }
  const Eigen::VectorXd curve = drive_curve(model, omega);
  Eigen::MatrixXd rows(t.points, 2);
  rows << omega, curve;
  r.files.push_back({"model_curve.tsv", table_text({"omega_hz", "t2star_s"}, rows)});
  r.metrics["model.t2_at_omega_max_us"] = curve(t.points - 1) * 1e6;
  r.metrics["model.t2_at_zero_us"] = total_t2_with_drive(model, 0.0) * 1e6;
  std::ostringstream text;
  text << "model T2*(0) = " << r.metrics["model.t2_at_zero_us"] << " us, T2*(" << t.omega_max_khz
       << " kHz) = " << r.metrics["model.t2_at_omega_max_us"] << " us\n";

  if (!t.data_file.empty()) {
    const Eigen::MatrixXd data = read_table_file(resolve(sc, t.data_file), 3);
    std::vector<DrivePoint> points;
    double max_dev = 0.0;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      const DrivePoint p{data(i, 0) * 1e3, data(i, 1) * 1e-6, data(i, 2) * 1e-6};
      points.push_back(p);
      const double m = total_t2_with_drive(model, p.omega_n);
      max_dev = std::max(max_dev, std::abs(m - p.t2star) / p.t2star);
    }
    r.metrics["model.max_rel_dev_to_data"] = max_dev;
    const DriveFitResult fit = fit_drive_model(points, t.dm, {}, &r.warnings);
    r.metrics["fit.gamma_khz"] = fit.model.gamma_nvn / (constants::two_pi * 1e3);
    r.metrics["fit.gamma_se_khz"] = fit.gamma_se / (constants::two_pi * 1e3);
    r.metrics["fit.delta_khz"] = fit.model.delta_n * 1e-3;
    r.metrics["fit.delta_se_khz"] = fit.delta_se * 1e-3;
    r.metrics["fit.t2_other_us"] = fit.model.t2_other * 1e6;
    r.metrics["fit.t2_other_se_us"] = fit.t2_other_se * 1e6;
    r.metrics["fit.delta_unidentifiable"] = fit.delta_unidentifiable ? 1.0 : 0.0;
    r.metrics["fit.converged"] = fit.converged ? 1.0 : 0.0;
    ordered regime = ordered::array();
    for (bool b : fit.incoherent_regime) regime.push_back(b);
    ordered j = {{"dm", fit.model.dm},
                 {"gamma_rad_s", fit.model.gamma_nvn},
                 {"gamma_se_rad_s", fit.gamma_se},
                 {"delta_hz", fit.model.delta_n},
                 {"delta_se_hz", fit.delta_se},
                 {"t2_other_s", fit.model.t2_other},
                 {"t2_other_se_s", fit.t2_other_se},
                 {"chi2", fit.chi2},
                 {"reduced_chi2", fit.reduced_chi2},
                 {"converged", fit.converged},
                 {"delta_at_lower_bound", fit.delta_at_lower_bound},
                 {"delta_unidentifiable", fit.delta_unidentifiable},
                 {"incoherent_regime", regime},
                 {"model_max_rel_dev_to_data", max_dev}};
    r.files.push_back({"fit.json", json_text(j)});
    const Eigen::VectorXd fit_curve = drive_curve(fit.model, omega);
    Eigen::MatrixXd fit_rows(t.points, 2);
    fit_rows << omega, fit_curve;
    r.files.push_back({"fit_curve.tsv", table_text({"omega_hz", "t2star_s"}, fit_rows)});
    text << "fit gamma = 2pi x " << r.metrics["fit.gamma_khz"] << " ± " << r.metrics["fit.gamma_se_khz"]
         << " kHz, delta = " << r.metrics["fit.delta_khz"] << " ± " << r.metrics["fit.delta_se_khz"]
         << " kHz, T2_other = " << r.metrics["fit.t2_other_us"] << " us\n"
         << "forward model max deviation from data: " << max_dev * 100.0 << " %\n";
  }
  r.text = text.str();
  return r;
}

TaskResult run_montecarlo(const Scenario& sc, std::uint64_t seed, int threads) {
  const MonteCarloTask& t = *sc.montecarlo;
  TaskResult r;
  EnsembleOptions options;
  options.threads = threads;
  options.expected_count = t.expected_count;
  if (t.prefactor > 0.0) options.prefactor = t.prefactor;
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(t.densities_ppm.size()), 4);
  std::vector<double> rates;
  double max_dev = 0.0;
  std::ostringstream text;
  text << "density_ppm  t2_us  q10_rad_s  q90_rad_s\n";
  for (std::size_t i = 0; i < t.densities_ppm.size(); ++i) {
    const double n = t.densities_ppm[i];
    const EnsembleResult e = ensemble_t2(n, t.n_configs, substream_seed(seed, i), options);
    rows.row(static_cast<Eigen::Index>(i)) << n, e.t2 * 1e6, e.q10, e.q90;
    rates.push_back(1.0 / e.t2);
    r.metrics["mc.t2_us@" + format_double(n)] = e.t2 * 1e6;
    max_dev = std::max(max_dev, std::abs(e.t2 * n / kCalibrationT2PerPpm - 1.0));
    text << n << "  " << e.t2 * 1e6 << "  " << e.q10 << "  " << e.q90 << "\n";
  }
  r.files.push_back({"sweep.tsv", table_text({"density_ppm", "t2_us", "q10_rad_s", "q90_rad_s"}, rows)});
  r.metrics["mc.max_rel_dev_vs_reference"] = max_dev;
  if (t.densities_ppm.size() >= 2) {
    r.metrics["mc.loglog_slope"] = loglog_slope(t.densities_ppm, rates);
    text << "log-log slope of 1/T2* vs density: " << r.metrics["mc.loglog_slope"] << "\n";
  }
  if (!t.odr_file.empty()) {
    const Eigen::MatrixXd data = read_table_file(resolve(sc, t.odr_file), 4);
    std::vector<ConcentrationPoint> points;
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
      points.push_back({data(i, 0), data(i, 1), data(i, 2) * 1e-6, data(i, 3) * 1e-6});
    }
    const OdrResult odr = odr_fit_linear(points);
    const double unit = constants::two_pi * 1e3;
    r.metrics["odr.slope_khz_per_ppm"] = odr.slope / unit;
    r.metrics["odr.slope_se_khz_per_ppm"] = odr.slope_se / unit;
    r.metrics["odr.inverse_us_ppm"] = 1e6 / odr.slope;
    r.files.push_back({"odr.json", json_text({{"slope_rad_s_per_ppm", odr.slope},
                                              {"slope_se_rad_s_per_ppm", odr.slope_se},
                                              {"slope_khz_per_ppm", odr.slope / unit},
                                              {"slope_se_khz_per_ppm", odr.slope_se / unit},
                                              {"chi2", odr.chi2},
                                              {"weighted", odr.weighted}})});
    text << "ODR: A = 2pi x " << odr.slope / unit << " ± " << odr.slope_se / unit << " kHz/ppm\n";
  }
  r.text = text.str();
  return r;
}

TaskResult run_sensitivity(const Scenario& sc) {
  const SensitivityTask& t = *sc.sensitivity;
  TaskResult r;
  std::ostringstream text;
  ordered j = ordered::object();
  if (t.point) {
    const SensitivityParams p{t.point->sigma, t.point->tau_us * 1e-6, t.point->tau_dead_us * 1e-6, t.point->contrast,
                              t.point->dm};
    const double eta = ramsey_sensitivity(p);
    r.metrics["eta_nt_per_rthz"] = eta * 1e9;
    j["eta_t_per_rthz"] = eta;
    text << "eta = " << eta * 1e9 << " nT/sqrt(Hz)\n";
  }
  if (t.fom) {
    const auto& f = *t.fom;
    FomSpec spec;
    spec.couplings = sc.constants.couplings();
    spec.n_nv = f.n_nv;
    spec.strain_t2 = f.strain_t2_us * 1e-6;
    spec.c13_t2 = f.c13_t2_us * 1e-6;
    spec.delta_ref_hz = f.delta_ref_khz * 1e3;
    spec.delta_ref_ppm = f.delta_ref_ppm;
    spec.normalization_ppm = f.normalization_ppm;
    spec.settings.clear();
    for (const auto& s : f.settings) spec.settings.push_back({s.dm, s.omega_mhz * 1e6, s.label});
    for (int i = 0; i < f.points; ++i) {
      spec.n_ppm.push_back(f.n_min_ppm * std::pow(f.n_max_ppm / f.n_min_ppm, i / double(f.points - 1)));
    }
    const auto curves = eta_n_sweep(spec);
    Eigen::MatrixXd rows(f.points, 1 + 2 * static_cast<Eigen::Index>(curves.size()));
    std::vector<std::string> header{"n_ppm"};
    rows.col(0) = Eigen::Map<const Eigen::VectorXd>(spec.n_ppm.data(), f.points);
    for (std::size_t c = 0; c < curves.size(); ++c) {
      const std::string label = curves[c].setting.label.empty() ? "setting" + std::to_string(c) : curves[c].setting.label;
      rows.col(1 + 2 * static_cast<Eigen::Index>(c)) = curves[c].eta;
      rows.col(2 + 2 * static_cast<Eigen::Index>(c)) = curves[c].t2star;
      header.push_back("eta_" + label);
      header.push_back("t2_s_" + label);
    }
    r.files.push_back({"fom.tsv", table_text(header, rows)});
    r.metrics["fom.crossover_ppm"] = fom_crossover_ppm(spec);
    auto eta_at = [&](double n, int dm, double omega) {
      return 1.0 / (dm * std::sqrt(spec.n_nv * n * fom_t2star(spec, n, dm, omega)));
    };
    r.metrics["fom.dq_sq_ratio_100ppm"] = eta_at(100.0, 2, 0.0) / eta_at(100.0, 1, 0.0);
    // ordering DQ+drive <= DQ <= SQ at every grid point, for every driven DQ setting
    int violations = 0;
    for (double n : spec.n_ppm) {
      const double sq = eta_at(n, 1, 0.0), dq = eta_at(n, 2, 0.0);
      if (dq > sq) ++violations;
      for (const auto& s : spec.settings) {
        if (s.dm == 2 && s.omega_n_hz > 0.0 && eta_at(n, 2, s.omega_n_hz) > dq) ++violations;
      }
    }
    r.metrics["fom.order_violations"] = violations;
    text << "strain/dipolar crossover at " << r.metrics["fom.crossover_ppm"] << " ppm; DQ/SQ eta ratio at 100 ppm = "
         << r.metrics["fom.dq_sq_ratio_100ppm"] << "\n";
  }
  if (!t.allan_file.empty()) {
    const Eigen::MatrixXd series = read_table_file(resolve(sc, t.allan_file), 1);
    const auto adev = allan_deviation(series.col(0), t.allan_cadence_s, t.allan_taus_s, &r.warnings);
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(adev.size()), 2);
    std::vector<double> taus, devs;
    for (std::size_t i = 0; i < adev.size(); ++i) {
      rows.row(static_cast<Eigen::Index>(i)) << adev[i].tau, adev[i].adev;
      taus.push_back(adev[i].tau);
      devs.push_back(adev[i].adev);
    }
    r.files.push_back({"allan.tsv", table_text({"tau_s", "adev"}, rows)});
    if (adev.size() >= 2) r.metrics["allan.loglog_slope"] = loglog_slope(taus, devs);
  }
  if (!j.empty()) r.files.push_back({"sensitivity.json", json_text(j)});
  r.text = text.str();
  return r;
}

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

}  // namespace

TaskResult execute_task(const Scenario& sc, const RunOptions& options) {
  const std::uint64_t seed = options.seed.value_or(sc.seed);
  const std::string task = sc.task();
  TaskResult r;
  if (task == "spectrum") r = run_spectrum(sc);
  else if (task == "budget") r = run_budget(sc);
  else if (task == "ramsey") r = run_ramsey(sc, seed);
  else if (task == "drive-fit") r = run_drive(sc);
  else if (task == "montecarlo") r = run_montecarlo(sc, seed, options.threads);
  else if (task == "sensitivity") r = run_sensitivity(sc);
  else throw std::invalid_argument("scenario has no task block");
  r.files.push_back({"metrics.json", json_text(metrics_json(r.metrics))});
  return r;
}

std::vector<CheckOutcome> evaluate_checks(const std::vector<Check>& checks,
                                          const std::map<std::string, double>& metrics) {
  std::vector<CheckOutcome> out;
  for (const auto& c : checks) {
    CheckOutcome o;
    o.check = c;
    std::ostringstream line;
    const auto it = metrics.find(c.metric);
    if (it != metrics.end()) o.value = it->second;
    bool pass = o.value.has_value() && std::isfinite(*o.value);
    line << std::setprecision(6);
    if (!o.value) {
      line << c.metric << ": metric not produced";
    } else {
      const double v = *o.value;
      line << c.metric << " = " << v;
      if (c.expected) {
        double tol = 0.0;
        if (c.rel_tol) tol = std::max(tol, *c.rel_tol * std::abs(*c.expected));
        if (c.abs_tol) tol = std::max(tol, *c.abs_tol);
        pass = pass && std::abs(v - *c.expected) <= tol;
        line << " (expected " << *c.expected << " ± " << tol;
        if (*c.expected != 0.0) line << ", deviation " << 100.0 * (v - *c.expected) / std::abs(*c.expected) << " %";
        line << ")";
      }
      if (c.min) {
        pass = pass && v >= *c.min;
        line << " [min " << *c.min << "]";
      }
      if (c.max) {
        pass = pass && v <= *c.max;
        line << " [max " << *c.max << "]";
      }
    }
    if (!c.note.empty()) line << "  -- " << c.note;
    o.pass = pass;
    o.line = (pass ? "PASS  " : "FAIL  ") + line.str();
    out.push_back(o);
  }
  return out;
}

std::string outputs_manifest(const TaskResult& result) {
  std::ostringstream out;
  for (const auto& f : result.files) out << f.name << " " << hex64(fnv1a(f.contents)) << " " << f.contents.size() << "\n";
  return out.str();
}

void write_outputs(const Scenario& sc, const std::string& command, const RunOptions& options, const TaskResult& result) {
  if (options.out_dir.empty()) return;
  fs::create_directories(options.out_dir);
  ordered manifest = ordered::array();
  for (const auto& f : result.files) {
    std::ofstream out(fs::path(options.out_dir) / f.name, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (fs::path(options.out_dir) / f.name).string());
    out << f.contents;
    manifest.push_back({{"file", f.name}, {"fnv1a", hex64(fnv1a(f.contents))}, {"bytes", f.contents.size()}});
  }
  const std::string canonical = serialize_scenario(sc);
  ordered record = {{"command", command},
                    {"scenario", sc.name},
                    {"scenario_hash", hex64(fnv1a(canonical))},
                    {"seed", options.seed.value_or(sc.seed)},
                    {"threads", options.threads},
                    {"tool_version", kToolVersion},
                    {"timestamp", timestamp_utc()},
                    {"outputs", manifest}};
  std::ofstream out(fs::path(options.out_dir) / "run_record.json");
  out << record.dump(2) << "\n";
}

int validate_command(const std::string& scenario_path, std::ostream& out, std::ostream& err) {
  ScenarioReport report;
  load_scenario(scenario_path, report);
  for (const auto& w : report.warnings) err << "warning: " << w << "\n";
  for (const auto& v : report.violations) out << "violation: " << v << "\n";
  if (!report.ok()) return kExitInputError;
  out << scenario_path << ": ok\n";
  return kExitOk;
}

int run_command(const std::string& subcommand, const std::string& scenario_path, const RunOptions& options,
                std::ostream& out, std::ostream& err) {
  ScenarioReport report;
  const Scenario sc = load_scenario(scenario_path, report);
  for (const auto& w : report.warnings) err << "warning: " << w << "\n";
  if (!report.ok()) {
    for (const auto& v : report.violations) err << "error: " << v << "\n";
    return kExitInputError;
  }
  if (sc.task() != subcommand) {
    err << "error: subcommand '" << subcommand << "' does not match the scenario task '" << sc.task() << "'\n";
    return kExitInputError;
  }
  TaskResult result;
  try {
    result = execute_task(sc, options);
    write_outputs(sc, subcommand, options, result);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }
  for (const auto& w : result.warnings) err << "warning: " << w << "\n";
  if (options.records) {
    out << metrics_json(result.metrics).dump(2) << "\n";
  } else {
    out << result.text;
  }
  int code = kExitOk;
  if (!sc.checks.empty()) {
    for (const auto& o : evaluate_checks(sc.checks, result.metrics)) {
      out << o.line << "\n";
      if (!o.pass) code = kExitToleranceFailure;
    }
  }
  return code;
}

}  // namespace nvd
