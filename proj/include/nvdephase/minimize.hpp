#pragma once

#include <cmath>
#include <stdexcept>

namespace nvd {

/// Golden-section search for a minimum of a unimodal f on [a, b].
template <typename F>
double golden_section_minimize(F&& f, double a, double b, double tol = 1e-12, int max_iterations = 500) {
  if (!(b > a)) throw std::invalid_argument("golden section needs a < b");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < max_iterations && (b - a) > tol * (std::abs(c) + std::abs(d) + tol); ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? c : d;
}

/// Scans `points` log-spaced samples of f on [lo, hi] (lo > 0), then refines
/// around the best sample by golden section in log space.
template <typename F>
double log_scan_minimize(F&& f, double lo, double hi, int points = 200, double tol = 1e-13) {
  if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("log scan needs 0 < lo < hi");
  const double a = std::log(lo), b = std::log(hi);
  const double step = (b - a) / (points - 1);
  int best = 0;
  double best_f = f(lo);
  for (int i = 1; i < points; ++i) {
    const double v = f(std::exp(a + i * step));
    if (v < best_f) {
      best_f = v;
      best = i;
    }
  }
  const double left = a + std::max(0, best - 1) * step;
  const double right = a + std::min(points - 1, best + 1) * step;
  const double u = golden_section_minimize([&](double s) { return f(std::exp(s)); }, left, right, tol);
  return std::exp(u);
}

}  // namespace nvd
