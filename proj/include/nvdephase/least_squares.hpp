#pragma once

// Bounded Levenberg-Marquardt for small dense problems.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace nvd {

struct LmOptions {
  int max_iterations = 500;
  /// Stop when the relative step norm falls below this.
  double xtol = 1e-12;
  /// Stop when an accepted step lowers the cost by less than this fraction.
  double ftol = 1e-15;
  double gtol = 1e-14;
  double initial_lambda = 1e-3;
};

struct LmResult {
  Eigen::VectorXd x;
  Eigen::VectorXd residual;
  Eigen::MatrixXd jacobian;
  /// Sum of squared residuals.
  double chi2 = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string message;
  /// (JᵀJ)⁻¹ at the solution (pseudo-inverse if singular), not scaled by χ².
  Eigen::MatrixXd covariance;
  std::vector<bool> at_bound;
};

/// Pseudo-inverse of a symmetric positive semidefinite matrix.
inline Eigen::MatrixXd spd_pseudo_inverse(const Eigen::MatrixXd& a, double rcond = 1e-14) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  const Eigen::VectorXd& w = es.eigenvalues();
  const double cutoff = rcond * std::max(w.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) > cutoff) inv(i) = 1.0 / w(i);
  }
  return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

/// Minimizes ||r(x)||² subject to lower <= x <= upper.
///
/// `model(x, r, J)` fills the residual vector r and, when J is non-null, the
/// Jacobian dr/dx. Bounds are enforced by projecting each trial point.
template <typename Model>
LmResult levenberg_marquardt(Model&& model, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                             const Eigen::VectorXd& upper, const LmOptions& options = {}) {
  const Eigen::Index n = x0.size();
  auto project = [&](Eigen::VectorXd x) { return x.cwiseMax(lower).cwiseMin(upper); };

  LmResult out;
  Eigen::VectorXd x = project(std::move(x0));
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  model(x, r, &jac);
  double cost = r.squaredNorm();
  if (!std::isfinite(cost)) {
    out.x = x;
    out.message = "non-finite residual at the initial point";
    return out;
  }
  double lambda = options.initial_lambda;
  Eigen::VectorXd r_trial;

  int it = 0;
  for (; it < options.max_iterations; ++it) {
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    Eigen::VectorXd scale = jtj.diagonal().cwiseMax(1e-300);
    if (g.cwiseAbs().maxCoeff() <= options.gtol * std::max(cost, 1e-300)) {
      out.converged = true;
      out.message = "gradient below tolerance";
      break;
    }
    bool accepted = false;
    bool small_step = false;
    for (int inner = 0; inner < 60; ++inner) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += lambda * scale;
      const Eigen::VectorXd delta = a.ldlt().solve(-g);
      const Eigen::VectorXd trial = project(x + delta);
      const Eigen::VectorXd step = trial - x;
      if (step.norm() <= options.xtol * (x.norm() + options.xtol)) {
        small_step = true;
        break;
      }
      model(trial, r_trial, nullptr);
      const double trial_cost = r_trial.squaredNorm();
      if (std::isfinite(trial_cost) && trial_cost < cost) {
        const double reduction = (cost - trial_cost) / std::max(cost, 1e-300);
        x = trial;
        cost = trial_cost;
        model(x, r, &jac);
        lambda = std::max(lambda / 3.0, 1e-12);
        accepted = true;
        if (reduction < options.ftol) small_step = true;
        break;
      }
      lambda *= 4.0;
      if (lambda > 1e16) break;
    }
    if (small_step) {
      out.converged = true;
      out.message = "step below tolerance";
      ++it;
      break;
    }
    if (!accepted) {
      out.converged = true;
      out.message = "no further descent";
      ++it;
      break;
    }
    if (cost == 0.0) {
      out.converged = true;
      out.message = "zero residual";
      ++it;
      break;
    }
  }
  if (!out.converged) out.message = "iteration limit reached";

  out.x = x;
  out.residual = r;
  out.jacobian = jac;
  out.chi2 = cost;
  out.iterations = it;
  out.covariance = spd_pseudo_inverse(jac.transpose() * jac);
  out.at_bound.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double tol = 1e-9 * std::max(1.0, std::abs(x(i)));
    out.at_bound[i] = std::abs(x(i) - lower(i)) <= tol || std::abs(x(i) - upper(i)) <= tol;
  }
  return out;
}

}  // namespace nvd
