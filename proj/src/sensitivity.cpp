#include "nvdephase/sensitivity.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "nvdephase/minimize.hpp"

namespace nvd {

void validate(const SensitivityParams& p) {
  if (!(p.sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (!(p.tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (!(p.tau_d >= 0.0)) throw std::invalid_argument("tau_d must be >= 0");
  if (!(p.contrast > 0.0)) throw std::invalid_argument("contrast must be positive");
  if (p.dm != 1 && p.dm != 2) throw std::invalid_argument("dm must be 1 or 2");
}

double ramsey_sensitivity(const SensitivityParams& p) {
  validate(p);
  const double gamma = constants::two_pi * kSensitivityGyromagneticHzPerT;
  return p.sigma * std::sqrt(p.tau + p.tau_d) / (p.dm * p.contrast * gamma * p.tau);
}

ContrastFunction constant_contrast(double c) {
  if (!(c > 0.0)) throw std::invalid_argument("contrast must be positive");
  return [c](double) { return c; };
}

ContrastFunction stretched_contrast(double c0, double t2star, double p) {
  if (!(c0 > 0.0) || !(t2star > 0.0) || !(p > 0.0)) {
    throw std::invalid_argument("stretched contrast needs positive c0, t2star and p");
  }
  return [=](double tau) { return c0 * std::exp(-std::pow(tau / t2star, p)); };
}

double ramsey_sensitivity(double sigma, double tau, double tau_d, const ContrastFunction& contrast, int dm) {
  return ramsey_sensitivity(SensitivityParams{sigma, tau, tau_d, contrast(tau), dm});
}

double optimal_tau(double t2star, double p_exponent, double tau_d) {
  if (!(t2star > 0.0) || !(p_exponent > 0.0) || !(tau_d >= 0.0)) {
    throw std::invalid_argument("optimal_tau needs positive t2star and p, and tau_d >= 0");
  }
  // log η up to constants
  auto log_eta = [&](double tau) {
    return 0.5 * std::log(tau + tau_d) - std::log(tau) + std::pow(tau / t2star, p_exponent);
  };
  return log_scan_minimize(log_eta, 1e-4 * t2star, 10.0 * t2star, 400);
}

void validate(const FomSpec& spec) {
  if (spec.n_ppm.empty()) throw std::invalid_argument("FoM grid is empty");
  for (double n : spec.n_ppm) {
    if (!(n > 0.0) || !std::isfinite(n)) throw std::invalid_argument("FoM concentrations must be positive");
  }
  if (!(spec.n_nv > 0.0 && spec.n_nv <= 1.0)) throw std::invalid_argument("n_nv must lie in (0, 1]");
  if (!(spec.strain_t2 > 0.0) || !(spec.c13_t2 > 0.0)) throw std::invalid_argument("channel T2* must be positive");
  if (!(spec.delta_ref_hz > 0.0) || !(spec.delta_ref_ppm > 0.0)) throw std::invalid_argument("delta rule must be positive");
  if (!(spec.normalization_ppm > 0.0)) throw std::invalid_argument("normalization concentration must be positive");
  for (const auto& s : spec.settings) {
    if (s.dm != 1 && s.dm != 2) throw std::invalid_argument("setting dm must be 1 or 2");
    if (!(s.omega_n_hz >= 0.0)) throw std::invalid_argument("setting drive must be >= 0");
  }
}

std::vector<double> default_fom_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 120; ++i) grid.push_back(std::pow(10.0, -2.0 + 5.0 * i / 120.0));
  return grid;
}

double fom_t2star(const FomSpec& spec, double n_ppm, int dm, double omega_n_hz) {
  const double delta = spec.delta_ref_hz * n_ppm / spec.delta_ref_ppm;
  const double lorentz = delta * delta / (delta * delta + omega_n_hz * omega_n_hz);
  double rate = dm / spec.c13_t2;
  if (dm == 1 && std::isfinite(spec.strain_t2)) rate += 1.0 / spec.strain_t2;
  rate += dm * spec.couplings.nv_n_rad_s_per_ppm * n_ppm * lorentz;
  rate += dm * spec.couplings.nv_nv_rad_s_per_ppm * spec.n_nv * n_ppm / 4.0;
  return 1.0 / rate;
}

std::vector<FomCurve> eta_n_sweep(const FomSpec& spec) {
  validate(spec);
  auto raw_eta = [&](double n, int dm, double omega) {
    return 1.0 / (dm * std::sqrt(spec.n_nv * n * fom_t2star(spec, n, dm, omega)));
  };
  const double norm = raw_eta(spec.normalization_ppm, 1, 0.0);
  std::vector<FomCurve> curves;
  const auto m = static_cast<Eigen::Index>(spec.n_ppm.size());
  for (const auto& setting : spec.settings) {
    FomCurve c;
    c.setting = setting;
    c.n_ppm.resize(m);
    c.t2star.resize(m);
    c.eta.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double n = spec.n_ppm[static_cast<std::size_t>(i)];
      c.n_ppm(i) = n;
      c.t2star(i) = fom_t2star(spec, n, setting.dm, setting.omega_n_hz);
      c.eta(i) = raw_eta(n, setting.dm, setting.omega_n_hz) / norm;
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

double fom_crossover_ppm(const FomSpec& spec) {
  validate(spec);
  if (!std::isfinite(spec.strain_t2)) return std::numeric_limits<double>::quiet_NaN();
  auto excess = [&](double n) {
    const double dipolar = spec.couplings.nv_n_rad_s_per_ppm * n + spec.couplings.nv_nv_rad_s_per_ppm * spec.n_nv * n / 4.0;
    return std::log(dipolar * spec.strain_t2);  // zero where the rates match
  };
  for (std::size_t i = 1; i < spec.n_ppm.size(); ++i) {
    const double a = spec.n_ppm[i - 1], b = spec.n_ppm[i];
    const double fa = excess(a), fb = excess(b);
    if (fa == 0.0) return a;
    if ((fa < 0.0) != (fb < 0.0)) {
      const double t = fa / (fa - fb);
      return std::exp(std::log(a) + t * (std::log(b) - std::log(a)));
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::vector<AllanPoint> allan_deviation(const Eigen::VectorXd& series, double cadence, const std::vector<double>& taus,
                                        Warnings* warnings) {
  if (!(cadence > 0.0)) throw std::invalid_argument("cadence must be positive");
  const Eigen::Index n = series.size();
  if (n < 2) throw std::invalid_argument("Allan deviation needs at least two samples");
  Eigen::Matrix<long double, Eigen::Dynamic, 1> cum(n + 1);
  cum(0) = 0.0L;
  for (Eigen::Index i = 0; i < n; ++i) cum(i + 1) = cum(i) + static_cast<long double>(series(i));

  std::vector<AllanPoint> out;
  for (double tau : taus) {
    const auto m = static_cast<Eigen::Index>(std::llround(tau / cadence));
    if (m < 1 || 2 * m > n) {
      warn(warnings, "averaging time " + std::to_string(tau) + " s is outside the series span; dropped");
      continue;
    }
    long double acc = 0.0L;
    const Eigen::Index terms = n - 2 * m + 1;
    for (Eigen::Index j = 0; j < terms; ++j) {
      const long double d = cum(j + 2 * m) - 2.0L * cum(j + m) + cum(j);
      acc += d * d;
    }
    const long double var = acc / (2.0L * m * m * terms);
    out.push_back({static_cast<double>(m) * cadence, std::sqrt(static_cast<double>(var))});
  }
  return out;
}

}  // namespace nvd
