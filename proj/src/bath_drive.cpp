#include "nvdephase/bath_drive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "nvdephase/constants.hpp"
#include "nvdephase/least_squares.hpp"

namespace nvd {

namespace {

constexpr double kGammaUnit = constants::two_pi * 1e3;  // fit γ in 2π·kHz
constexpr double kDeltaUnit = 1e3;                      // fit δ, Ω in kHz
constexpr double kTimeUnit = 1e-6;                      // fit times in µs

// x = [γ / 2π kHz, δ / kHz, t2_other / µs]; residuals in µs, optionally weighted.
struct DriveProblem {
  const Eigen::VectorXd& omega;  // kHz
  const Eigen::VectorXd& t2;     // µs
  const Eigen::VectorXd& inv_sigma;
  int dm;

  void operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac) const {
    const double g = x(0), d = x(1), tau = x(2);
    const double gamma = g * kGammaUnit;  // rad/s
    r.resize(omega.size());
    if (jac) jac->resize(omega.size(), 3);
    for (Eigen::Index k = 0; k < omega.size(); ++k) {
      const double w2 = omega(k) * omega(k);
      const double den = d * d + w2;
      const double lorentz = d * d / den;
      const double rate = dm * gamma * lorentz + 1.0 / (tau * kTimeUnit);
      const double model = 1.0 / (rate * kTimeUnit);
      r(k) = inv_sigma(k) * (model - t2(k));
      if (!jac) continue;
      const double dmodel_drate = -model / rate;
      (*jac)(k, 0) = inv_sigma(k) * dmodel_drate * dm * kGammaUnit * lorentz;
      (*jac)(k, 1) = inv_sigma(k) * dmodel_drate * dm * gamma * 2.0 * d * w2 / (den * den);
      (*jac)(k, 2) = inv_sigma(k) * dmodel_drate * (-1.0 / (tau * tau * kTimeUnit));
    }
  }
};

}  // namespace

void validate(const DriveModel& model) {
  if (!(model.gamma_nvn >= 0.0) || !std::isfinite(model.gamma_nvn)) {
    throw std::invalid_argument("gamma_nvn must be finite and >= 0");
  }
  if (!(model.delta_n > 0.0) || !std::isfinite(model.delta_n)) throw std::invalid_argument("delta_n must be positive");
  if (!(model.t2_other > 0.0)) throw std::invalid_argument("t2_other must be positive");
  if (model.dm != 1 && model.dm != 2) throw std::invalid_argument("dm must be 1 or 2");
}

double drive_limited_rate(const DriveModel& model, double omega_n) {
  validate(model);
  if (!(omega_n >= 0.0)) throw std::invalid_argument("drive frequency must be >= 0");
  const double d2 = model.delta_n * model.delta_n;
  return model.dm * model.gamma_nvn * d2 / (d2 + omega_n * omega_n);
}

double total_t2_with_drive(const DriveModel& model, double omega_n) {
  return 1.0 / (drive_limited_rate(model, omega_n) + 1.0 / model.t2_other);
}

Eigen::VectorXd drive_curve(const DriveModel& model, const Eigen::VectorXd& omega_n) {
  Eigen::VectorXd out(omega_n.size());
  for (Eigen::Index k = 0; k < omega_n.size(); ++k) out(k) = total_t2_with_drive(model, omega_n(k));
  return out;
}

DriveFitResult fit_drive_model(const std::vector<DrivePoint>& data, int dm, const DriveFitOptions& options,
                               Warnings* warnings) {
  if (dm != 1 && dm != 2) throw std::invalid_argument("dm must be 1 or 2");
  if (data.size() < 4) throw std::invalid_argument("drive fit needs at least 4 points");
  const Eigen::Index m = static_cast<Eigen::Index>(data.size());
  Eigen::VectorXd omega(m), t2(m), inv_sigma(m);
  bool weighted = true;
  for (Eigen::Index k = 0; k < m; ++k) {
    const DrivePoint& p = data[static_cast<std::size_t>(k)];
    if (!(p.omega_n >= 0.0) || !(p.t2star > 0.0) || !(p.sigma_t2 >= 0.0)) {
      throw std::invalid_argument("drive point " + std::to_string(k) + " has invalid values");
    }
    omega(k) = p.omega_n / kDeltaUnit;
    t2(k) = p.t2star / kTimeUnit;
    weighted = weighted && p.sigma_t2 > 0.0;
  }
  for (Eigen::Index k = 0; k < m; ++k) {
    inv_sigma(k) = weighted ? kTimeUnit / data[static_cast<std::size_t>(k)].sigma_t2 : 1.0;
  }

  std::vector<Eigen::Vector3d> starts;
  if (options.use_initial_guess) {
    validate(options.initial_guess);
    starts.emplace_back(options.initial_guess.gamma_nvn / kGammaUnit, options.initial_guess.delta_n / kDeltaUnit,
                        options.initial_guess.t2_other / kTimeUnit);
  } else {
    Eigen::Index lowest = 0;
    omega.minCoeff(&lowest);
    const double t2_other = 1.05 * t2.maxCoeff();
    const double positive_min = std::max(omega.minCoeff(), 1e-3);
    for (double frac : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      const double d = frac * std::sqrt(positive_min * std::max(omega.maxCoeff(), positive_min));
      const double lorentz = d * d / (d * d + omega(lowest) * omega(lowest));
      const double excess = 1.0 / (t2(lowest) * kTimeUnit) - 1.0 / (t2_other * kTimeUnit);
      const double g = excess > 0.0 ? excess / (dm * lorentz * kGammaUnit) : 1.0;
      starts.emplace_back(g, d, t2_other);
    }
  }

  const Eigen::Vector3d lower(0.0, 1e-3, 1e-6);
  const Eigen::Vector3d upper(1e7, 1e7, 1e9);
  LmOptions lm;
  lm.max_iterations = options.max_iterations;
  const DriveProblem problem{omega, t2, inv_sigma, dm};
  LmResult best;
  bool have = false;
  for (const auto& s : starts) {
    LmResult r = levenberg_marquardt(problem, Eigen::VectorXd(s), lower, upper, lm);
    if (!have || r.chi2 < best.chi2) {
      best = std::move(r);
      have = true;
    }
  }

  DriveFitResult out;
  out.model.gamma_nvn = best.x(0) * kGammaUnit;
  out.model.delta_n = best.x(1) * kDeltaUnit;
  out.model.t2_other = best.x(2) * kTimeUnit;
  out.model.dm = dm;
  out.chi2 = best.chi2;
  out.reduced_chi2 = best.chi2 / static_cast<double>(std::max<Eigen::Index>(1, m - 3));
  const double scale = weighted ? 1.0 : out.reduced_chi2;
  const Eigen::Vector3d se = (best.covariance.diagonal() * scale).cwiseMax(0.0).cwiseSqrt();
  out.gamma_se = se(0) * kGammaUnit;
  out.delta_se = se(1) * kDeltaUnit;
  out.t2_other_se = se(2) * kTimeUnit;
  out.converged = best.converged;
  out.message = best.message;
  out.delta_at_lower_bound = std::abs(best.x(1) - lower(1)) <= 1e-9;

  Eigen::MatrixXd jn = best.jacobian;
  for (Eigen::Index j = 0; j < jn.cols(); ++j) {
    const double norm = jn.col(j).norm();
    if (norm > 0.0) jn.col(j) /= norm;
  }
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(jn).singularValues();
  const double conditioning = sv(0) > 0.0 ? sv(sv.size() - 1) / sv(0) : 0.0;
  out.delta_unidentifiable = conditioning < 1e-2 || out.delta_se > 0.5 * out.model.delta_n ||
                             out.delta_at_lower_bound;

  for (const auto& p : data) out.incoherent_regime.push_back(p.omega_n <= out.model.delta_n);
  if (out.delta_at_lower_bound) warn(warnings, "delta_n ended at its lower bound");
  if (out.delta_unidentifiable) warn(warnings, "delta_n is not constrained by the data");
  if (!out.converged) warn(warnings, "drive fit did not converge: " + best.message);
  return out;
}

}  // namespace nvd
