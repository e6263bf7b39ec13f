#include "nvdephase/bath_montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

#include "nvdephase/minimize.hpp"

namespace nvd {

namespace {

// Uniform double in [0, 1) from the top 53 bits, independent of the standard library.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

Eigen::Vector3d random_in_sphere(std::mt19937_64& rng, double radius) {
  const double r = radius * std::cbrt(uniform01(rng));
  const double cos_theta = 2.0 * uniform01(rng) - 1.0;
  const double phi = constants::two_pi * uniform01(rng);
  const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
  return {r * sin_theta * std::cos(phi), r * sin_theta * std::sin(phi), r * cos_theta};
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

// Indices of spins that sit too close to an earlier spin (sorted-x sweep).
std::vector<std::size_t> crowded(const std::vector<Eigen::Vector3d>& pos, double exclusion) {
  std::vector<std::size_t> order(pos.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pos[a].x() < pos[b].x(); });
  std::vector<char> flagged(pos.size(), 0);
  const double ex2 = exclusion * exclusion;
  for (std::size_t a = 0; a < order.size(); ++a) {
    const Eigen::Vector3d& p = pos[order[a]];
    for (std::size_t b = a + 1; b < order.size() && pos[order[b]].x() - p.x() < exclusion; ++b) {
      if ((pos[order[b]] - p).squaredNorm() < ex2) flagged[std::max(order[a], order[b])] = 1;
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < flagged.size(); ++i) {
    if (flagged[i]) out.push_back(i);
  }
  return out;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(splitmix64(seed) ^ (index * 0xd1b54a32d192ed03ULL + 1));
}

BathConfig sample_bath(double density_ppm, double region_radius, std::uint64_t seed, double exclusion_radius,
                       Warnings* warnings) {
  if (!(density_ppm >= 0.0) || !std::isfinite(density_ppm)) throw std::invalid_argument("density must be >= 0");
  if (!(region_radius > 0.0)) throw std::invalid_argument("region radius must be positive");
  if (!(exclusion_radius >= 0.0) || exclusion_radius >= region_radius) {
    throw std::invalid_argument("exclusion radius must lie in [0, region radius)");
  }
  BathConfig config;
  config.density_ppm = density_ppm;
  config.region_radius = region_radius;
  config.seed = seed;
  if (density_ppm == 0.0) return config;

  const double volume = 4.0 / 3.0 * constants::pi * std::pow(region_radius, 3);
  const double expected = ppm_to_per_m3(density_ppm) * volume;
  if (expected < 1.0) throw std::invalid_argument("expected spin count below one; enlarge the region");
  if (expected < 100.0) warn(warnings, "fewer than 100 spins expected; near-field statistics are unconverged");
  const auto count = static_cast<std::size_t>(std::llround(expected));
  const double packing = count * std::pow(exclusion_radius / region_radius, 3);
  if (packing > 0.2) throw std::invalid_argument("exclusion radius too large for the requested density");

  std::mt19937_64 rng(seed);
  const double ex2 = exclusion_radius * exclusion_radius;
  auto draw = [&] {
    Eigen::Vector3d p;
    do {
      p = random_in_sphere(rng, region_radius);
    } while (p.squaredNorm() < ex2);
    return p;
  };
  config.positions.resize(count);
  for (auto& p : config.positions) p = draw();
  if (exclusion_radius > 0.0) {
    for (auto bad = crowded(config.positions, exclusion_radius); !bad.empty();
         bad = crowded(config.positions, exclusion_radius)) {
      for (std::size_t i : bad) config.positions[i] = draw();
    }
  }
  return config;
}

double dipolar_constant(double g) {
  return constants::mu0_over_4pi * g * g * constants::bohr_magneton * constants::bohr_magneton / constants::hbar;
}

double config_linewidth(const BathConfig& config, const Eigen::Vector3d& nv_axis, double prefactor, double g) {
  const double axis_norm = nv_axis.norm();
  if (!(axis_norm > 0.0)) throw std::invalid_argument("nv_axis must be nonzero");
  const Eigen::Vector3d axis = nv_axis / axis_norm;
  const double c = prefactor * dipolar_constant(g);
  double sum = 0.0;
  for (const auto& p : config.positions) {
    const double r2 = p.squaredNorm();
    const double cos2 = std::pow(p.dot(axis), 2) / r2;
    const double b = c * (1.0 - 3.0 * cos2) / (r2 * std::sqrt(r2));
    sum += b * b;
  }
  return std::sqrt(sum);
}

double region_radius_for_count(double density_ppm, double expected_count) {
  if (!(density_ppm > 0.0) || !(expected_count > 0.0)) {
    throw std::invalid_argument("density and expected count must be positive");
  }
  return std::cbrt(3.0 * expected_count / (4.0 * constants::pi * ppm_to_per_m3(density_ppm)));
}

EnsembleResult ensemble_t2(double density_ppm, int n_configs, std::uint64_t seed, const EnsembleOptions& options) {
  if (n_configs < 100) throw std::invalid_argument("ensemble_t2 needs at least 100 configurations");
  if (!(density_ppm > 0.0)) throw std::invalid_argument("ensemble_t2 needs a positive density");
  if (options.threads < 1) throw std::invalid_argument("threads must be >= 1");
  const double radius = options.region_radius > 0.0 ? options.region_radius
                                                    : region_radius_for_count(density_ppm, options.expected_count);

  std::vector<double> widths(static_cast<std::size_t>(n_configs));
  auto work = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      const BathConfig config = sample_bath(density_ppm, radius, substream_seed(seed, static_cast<std::uint64_t>(i)));
      widths[static_cast<std::size_t>(i)] = config_linewidth(config, options.nv_axis, options.prefactor);
    }
  };
  const int threads = std::min(options.threads, n_configs);
  if (threads == 1) {
    work(0, n_configs);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back(work, n_configs * t / threads, n_configs * (t + 1) / threads);
    }
    for (auto& th : pool) th.join();
  }

  EnsembleResult out;
  out.region_radius = radius;
  out.n_configs = n_configs;
  if (options.keep_linewidths) out.linewidths = widths;
  std::sort(widths.begin(), widths.end());
  out.q10 = quantile_sorted(widths, 0.10);
  out.q50 = quantile_sorted(widths, 0.50);
  out.q90 = quantile_sorted(widths, 0.90);
  out.t2 = 1.0 / out.q50;
  return out;
}

double calibrate_prefactor(double density_ppm, double target_t2, int n_configs, std::uint64_t seed, int threads) {
  if (!(target_t2 > 0.0)) throw std::invalid_argument("target T2 must be positive");
  EnsembleOptions options;
  options.threads = threads;
  options.prefactor = 1.0;
  const EnsembleResult unit = ensemble_t2(density_ppm, n_configs, seed, options);
  return unit.t2 / target_t2;
}

OdrResult odr_fit_through_origin(const Eigen::VectorXd& x, const Eigen::VectorXd& sx, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& sy) {
  const Eigen::Index m = x.size();
  if (sx.size() != m || y.size() != m || sy.size() != m) throw std::invalid_argument("ODR columns differ in length");
  if (m < 2) throw std::invalid_argument("ODR needs at least 2 points");
  if (!x.allFinite() || !y.allFinite() || !sx.allFinite() || !sy.allFinite()) {
    throw std::invalid_argument("ODR inputs must be finite");
  }
  if ((sx.array() < 0.0).any() || (sy.array() < 0.0).any()) {
    throw std::invalid_argument("ODR uncertainties must be >= 0");
  }
  OdrResult out;
  const bool all_zero = (sx.array() == 0.0).all() && (sy.array() == 0.0).all();
  if (all_zero) {
    // total least squares through the origin: principal axis of the raw scatter matrix
    Eigen::Matrix2d scatter;
    scatter << x.squaredNorm(), x.dot(y), x.dot(y), y.squaredNorm();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(scatter);
    const Eigen::Vector2d v = es.eigenvectors().col(1);
    if (v(0) == 0.0) throw std::invalid_argument("TLS direction is vertical");
    out.slope = v(1) / v(0);
    out.weighted = false;
    const double a = out.slope;
    out.chi2 = (y - a * x).squaredNorm() / (1.0 + a * a);
    const double var = out.chi2 / static_cast<double>(m - 1);
    // curvature of Σ(y-Ax)²/(1+A²) at the minimum, numerically
    auto s = [&](double aa) { return (y - aa * x).squaredNorm() / (1.0 + aa * aa); };
    const double h = 1e-4 * std::max(std::abs(a), 1e-12);
    const double curvature = (s(a + h) - 2.0 * s(a) + s(a - h)) / (h * h);
    out.slope_se = curvature > 0.0 ? std::sqrt(2.0 * var / curvature) : 0.0;
    return out;
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (sx(i) == 0.0 && sy(i) == 0.0) {
      throw std::invalid_argument("point " + std::to_string(i) + " has zero uncertainty on both axes");
    }
  }
  auto objective = [&](double a) {
    return ((y - a * x).array().square() / (sy.array().square() + a * a * sx.array().square())).sum();
  };
  const double guess = std::abs(x.dot(y) / x.squaredNorm());
  if (!(guess > 0.0)) throw std::invalid_argument("ODR needs data with a positive slope");
  const double a = log_scan_minimize(objective, guess * 1e-3, guess * 1e3);
  out.slope = a;
  out.chi2 = objective(a);
  const double h = 1e-4 * a;
  const double curvature = (objective(a + h) - 2.0 * out.chi2 + objective(a - h)) / (h * h);
  const double reduced = out.chi2 / static_cast<double>(m - 1);
  out.slope_se = curvature > 0.0 ? std::sqrt(2.0 / curvature * reduced) : 0.0;
  return out;
}

OdrResult odr_fit_linear(const std::vector<ConcentrationPoint>& points) {
  const Eigen::Index m = static_cast<Eigen::Index>(points.size());
  Eigen::VectorXd x(m), sx(m), y(m), sy(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& p = points[static_cast<std::size_t>(i)];
    if (!(p.n_ppm > 0.0) || !(p.t2star > 0.0)) {
      throw std::invalid_argument("concentration point " + std::to_string(i) + " must have positive values");
    }
    x(i) = p.n_ppm;
    sx(i) = p.sigma_n;
    y(i) = 1.0 / p.t2star;
    sy(i) = p.sigma_t2 / (p.t2star * p.t2star);
  }
  return odr_fit_through_origin(x, sx, y, sy);
}

}  // namespace nvd
