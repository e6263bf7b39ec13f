#include "nvdephase/ramsey.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "nvdephase/least_squares.hpp"

namespace nvd {

namespace {

constexpr double kTwoPi = constants::two_pi;

// Fit state in µs / MHz: [c0, T, p, f_1..f_n, tau0_1..tau0_n] with observed f.
struct RamseyProblem {
  const Eigen::VectorXd& t;
  const Eigen::VectorXd& y;
  const Eigen::VectorXd& inv_sigma;
  int n_lines;

  void operator()(const Eigen::VectorXd& x, Eigen::VectorXd& r, Eigen::MatrixXd* jac) const {
    const Eigen::Index m = t.size();
    const double c0 = x(0), T = x(1), p = x(2);
    r.resize(m);
    if (jac) jac->resize(m, x.size());
    for (Eigen::Index k = 0; k < m; ++k) {
      const double tk = t(k);
      const double ratio = tk / T;
      const double u = ratio > 0.0 ? std::pow(ratio, p) : 0.0;
      const double env = std::exp(-u);
      double sum = 0.0;
      for (int i = 0; i < n_lines; ++i) {
        sum += std::cos(kTwoPi * x(3 + i) * (tk - x(3 + n_lines + i)));
      }
      const double w = inv_sigma(k);
      r(k) = w * (c0 * env * sum - y(k));
      if (!jac) continue;
      auto row = jac->row(k);
      row(0) = w * env * sum;
      row(1) = w * c0 * sum * env * p * u / T;
      row(2) = ratio > 0.0 ? -w * c0 * sum * env * u * std::log(ratio) : 0.0;
      for (int i = 0; i < n_lines; ++i) {
        const double f = x(3 + i);
        const double dt = tk - x(3 + n_lines + i);
        const double s = std::sin(kTwoPi * f * dt);
        row(3 + i) = -w * c0 * env * s * kTwoPi * dt;
        row(3 + n_lines + i) = w * c0 * env * s * kTwoPi * f;
      }
    }
  }
};

struct LinearSeed {
  double cost = 0.0;
  double c0 = 0.0;
  std::vector<double> tau0;
};

// With T, p and the frequencies fixed, the model is linear in a·cos + b·sin per line.
LinearSeed linear_seed(const Eigen::VectorXd& t, const Eigen::VectorXd& y, const Eigen::VectorXd& w,
                       const std::vector<double>& f, double T, double p) {
  const Eigen::Index m = t.size();
  const int n = static_cast<int>(f.size());
  Eigen::MatrixXd a(m, 2 * n);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double env = std::exp(-std::pow(t(k) / T, p));
    for (int i = 0; i < n; ++i) {
      a(k, 2 * i) = w(k) * env * std::cos(kTwoPi * f[i] * t(k));
      a(k, 2 * i + 1) = w(k) * env * std::sin(kTwoPi * f[i] * t(k));
    }
  }
  const Eigen::VectorXd wy = w.cwiseProduct(y);
  const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(wy);
  LinearSeed seed;
  seed.cost = (a * coef - wy).squaredNorm();
  double amp = 0.0;
  for (int i = 0; i < n; ++i) {
    const double c = coef(2 * i), s = coef(2 * i + 1);
    amp += std::hypot(c, s);
    seed.tau0.push_back(f[i] > 0.0 ? std::atan2(s, c) / (kTwoPi * f[i]) : 0.0);
  }
  seed.c0 = amp / n;
  return seed;
}

double wrap_tau0(double tau0, double f) {
  if (f <= 0.0) return tau0;
  const double period = 1.0 / f;
  double w = std::fmod(tau0, period);
  if (w > 0.5 * period) w -= period;
  if (w <= -0.5 * period) w += period;
  return w;
}

void check_uniform(const Eigen::VectorXd& times) {
  if (times.size() < 2) throw std::invalid_argument("spectrum needs at least two samples");
  const double dt = (times(times.size() - 1) - times(0)) / static_cast<double>(times.size() - 1);
  if (!(dt > 0.0)) throw std::invalid_argument("time grid must be increasing");
  for (Eigen::Index i = 1; i < times.size(); ++i) {
    if (std::abs(times(i) - times(i - 1) - dt) > 1e-6 * dt) {
      throw std::invalid_argument("spectrum requires a uniform time grid");
    }
  }
}

}  // namespace

void validate(const RamseyParams& params) {
  if (!(params.c0 > 0.0 && params.c0 <= 1.0)) throw std::invalid_argument("c0 must lie in (0, 1]");
  if (!(params.t2star > 0.0)) throw std::invalid_argument("t2star must be positive");
  if (!(params.p >= 0.5 && params.p <= 3.0)) throw std::invalid_argument("p must lie in [0.5, 3]");
  if (params.lines.empty() || params.lines.size() > 3) {
    throw std::invalid_argument("Ramsey model takes 1 to 3 lines");
  }
  if (params.dm != 1 && params.dm != 2) throw std::invalid_argument("dm must be 1 or 2");
  for (const auto& line : params.lines) {
    if (!std::isfinite(line.f_hz) || !std::isfinite(line.tau0_s)) {
      throw std::invalid_argument("line parameters must be finite");
    }
  }
}

Eigen::VectorXd ramsey_model(const RamseyParams& params, const Eigen::VectorXd& times) {
  validate(params);
  Eigen::VectorXd out(times.size());
  for (Eigen::Index k = 0; k < times.size(); ++k) {
    const double tau = times(k);
    if (!(tau >= 0.0)) throw std::invalid_argument("Ramsey times must be nonnegative");
    double sum = 0.0;
    for (std::size_t i = 0; i < params.lines.size(); ++i) {
      sum += std::cos(kTwoPi * params.observed_frequency(i) * (tau - params.lines[i].tau0_s));
    }
    out(k) = params.c0 * std::exp(-std::pow(tau / params.t2star, params.p)) * sum;
  }
  return out;
}

Eigen::VectorXd synthesize_ramsey(const RamseyParams& params, const Eigen::VectorXd& times, double noise_sd,
                                  std::uint64_t seed) {
  if (!(noise_sd >= 0.0)) throw std::invalid_argument("noise_sd must be >= 0");
  Eigen::VectorXd s = ramsey_model(params, times);
  if (noise_sd > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sd);
    for (Eigen::Index k = 0; k < s.size(); ++k) s(k) += noise(rng);
  }
  return s;
}

RamseyFitResult fit_ramsey(const Eigen::VectorXd& times, const Eigen::VectorXd& signal, int n_lines,
                           const RamseyFitOptions& options, Warnings* warnings) {
  if (n_lines < 1 || n_lines > 3) throw std::invalid_argument("n_lines must be 1..3");
  if (options.dm != 1 && options.dm != 2) throw std::invalid_argument("dm must be 1 or 2");
  if (times.size() != signal.size()) throw std::invalid_argument("times and signal differ in length");
  const int n_params = 3 + 2 * n_lines;
  if (times.size() < 10 * n_params) {
    throw std::invalid_argument("fit_ramsey needs at least " + std::to_string(10 * n_params) + " samples");
  }
  if (!times.allFinite() || !signal.allFinite()) throw std::invalid_argument("non-finite input samples");
  if (options.sigma.size() != 0 && options.sigma.size() != times.size()) {
    throw std::invalid_argument("sigma length differs from the samples");
  }
  const bool weighted = options.sigma.size() != 0;
  if (weighted && (options.sigma.array() <= 0.0).any()) throw std::invalid_argument("sigma must be positive");

  const Eigen::VectorXd t = times * 1e6;  // µs
  const Eigen::VectorXd& y = signal;
  const Eigen::VectorXd inv_sigma =
      weighted ? Eigen::VectorXd(options.sigma.cwiseInverse()) : Eigen::VectorXd::Ones(t.size());
  const double span = t.maxCoeff() - t.minCoeff();
  if (!(span > 0.0)) throw std::invalid_argument("times must span a positive interval");
  const double dt_min = span / static_cast<double>(t.size() - 1);
  const double f_max = 0.5 / dt_min;

  // Starting points: (T, p, f) candidates scored by the linear sub-problem.
  struct Start {
    double cost;
    Eigen::VectorXd x;
  };
  std::vector<Start> starts;
  auto push_start = [&](const std::vector<double>& f, double T, double p) {
    const LinearSeed s = linear_seed(t, y, inv_sigma, f, T, p);
    Eigen::VectorXd x(n_params);
    x(0) = std::clamp(s.c0, 1e-6, 10.0);
    x(1) = T;
    x(2) = p;
    for (int i = 0; i < n_lines; ++i) {
      x(3 + i) = f[i];
      x(3 + n_lines + i) = s.tau0[i];
    }
    starts.push_back({s.cost, x});
  };

  if (options.initial_guess) {
    const RamseyParams& g = *options.initial_guess;
    if (static_cast<int>(g.lines.size()) != n_lines) {
      throw std::invalid_argument("initial guess line count differs from n_lines");
    }
    Eigen::VectorXd x(n_params);
    x << g.c0, g.t2star * 1e6, g.p, Eigen::VectorXd::Zero(2 * n_lines);
    for (int i = 0; i < n_lines; ++i) {
      x(3 + i) = options.dm * g.lines[i].f_hz * 1e-6;
      x(3 + n_lines + i) = g.lines[i].tau0_s * 1e6;
    }
    starts.push_back({0.0, x});
    if (g.t2star * 1e6 > span) warn(warnings, "time span is shorter than the initial T2* guess");
  } else {
    Eigen::VectorXd uniform_t = Eigen::VectorXd::LinSpaced(t.size(), t(0), t(t.size() - 1));
    std::vector<double> f;
    if ((uniform_t - t).cwiseAbs().maxCoeff() <= 1e-6 * dt_min) {
      const Spectrum sp = ramsey_spectrum(t, y, 16);
      f = spectrum_peaks(sp, n_lines, 0.75 / span);
    }
    if (static_cast<int>(f.size()) < n_lines) {
      throw std::runtime_error("could not locate " + std::to_string(n_lines) + " spectral peaks to seed the fit");
    }
    std::vector<Start> grid;
    for (double p : {0.7, 1.0, 1.5, 2.0, 2.5}) {
      for (int k = 0; k < 36; ++k) {
        const double T = span * std::pow(10.0, -2.0 + 3.0 * k / 35.0);
        push_start(f, T, p);
      }
    }
    std::sort(starts.begin(), starts.end(), [](const Start& a, const Start& b) { return a.cost < b.cost; });
    // keep the best few with distinct (T, p)
    std::vector<Start> kept;
    for (const auto& s : starts) {
      bool distinct = true;
      for (const auto& k : kept) {
        if (std::abs(std::log(s.x(1) / k.x(1))) < 0.15 && std::abs(s.x(2) - k.x(2)) < 0.1) distinct = false;
      }
      if (distinct) kept.push_back(s);
      if (kept.size() == 3) break;
    }
    starts = kept;
  }

  Eigen::VectorXd lower(n_params), upper(n_params);
  lower.head(3) << 1e-9, span * 1e-4, 0.5;
  upper.head(3) << 10.0, span * 1e3, 3.0;
  lower.segment(3, n_lines).setZero();
  upper.segment(3, n_lines).setConstant(f_max);
  lower.tail(n_lines).setConstant(-span);
  upper.tail(n_lines).setConstant(span);

  LmOptions lm;
  lm.max_iterations = options.max_iterations;
  const RamseyProblem problem{t, y, inv_sigma, n_lines};
  LmResult best;
  bool have_best = false;
  for (const auto& s : starts) {
    LmResult r = levenberg_marquardt(problem, s.x, lower, upper, lm);
    if (!have_best || r.chi2 < best.chi2) {
      best = std::move(r);
      have_best = true;
    }
  }

  RamseyFitResult out;
  const Eigen::VectorXd& x = best.x;
  const Eigen::Index dof = std::max<Eigen::Index>(1, t.size() - n_params);
  out.reduced_chi2 = best.chi2 / static_cast<double>(dof);
  const double scale = weighted ? 1.0 : out.reduced_chi2;
  const Eigen::VectorXd se = (best.covariance.diagonal() * scale).cwiseMax(0.0).cwiseSqrt();

  out.params.dm = options.dm;
  out.params.c0 = x(0);
  out.params.t2star = x(1) * 1e-6;
  out.params.p = x(2);
  out.c0_se = se(0);
  out.t2star_se = se(1) * 1e-6;
  out.p_se = se(2);
  for (int i = 0; i < n_lines; ++i) {
    const double f_obs = x(3 + i);
    out.params.lines.push_back({f_obs * 1e6 / options.dm, wrap_tau0(x(3 + n_lines + i), f_obs) * 1e-6});
    out.line_se.push_back({se(3 + i) * 1e6 / options.dm, se(3 + n_lines + i) * 1e-6});
  }
  out.residual_norm = std::sqrt(best.chi2);
  out.converged = best.converged;
  out.iterations = best.iterations;
  out.message = best.message;
  out.p_at_bound = best.at_bound[2];
  if (out.p_at_bound) warn(warnings, "stretch exponent p ended at a bound");
  if (!out.converged) warn(warnings, "Ramsey fit did not converge: " + best.message);
  return out;
}

Spectrum ramsey_spectrum(const Eigen::VectorXd& times, const Eigen::VectorXd& signal, int pad_factor) {
  if (times.size() != signal.size()) throw std::invalid_argument("times and signal differ in length");
  if (pad_factor < 1) throw std::invalid_argument("pad_factor must be >= 1");
  check_uniform(times);
  const Eigen::Index n = times.size();
  const double dt = (times(n - 1) - times(0)) / static_cast<double>(n - 1);
  const Eigen::Index nfft = n * pad_factor;

  std::vector<double> padded(static_cast<std::size_t>(nfft), 0.0);
  const double mean = signal.mean();
  for (Eigen::Index k = 0; k < n; ++k) padded[static_cast<std::size_t>(k)] = signal(k) - mean;
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> freq;
  fft.fwd(freq, padded);

  const Eigen::Index half = nfft / 2 + 1;
  Spectrum out;
  out.frequency_hz.resize(half);
  out.magnitude.resize(half);
  for (Eigen::Index k = 0; k < half; ++k) {
    out.frequency_hz(k) = static_cast<double>(k) / (static_cast<double>(nfft) * dt);
    out.magnitude(k) = std::abs(freq[static_cast<std::size_t>(k)]);
  }
  return out;
}

std::vector<double> spectrum_peaks(const Spectrum& spectrum, int count, double min_separation_hz) {
  const Eigen::VectorXd& m = spectrum.magnitude;
  std::vector<Eigen::Index> maxima;
  for (Eigen::Index k = 1; k + 1 < m.size(); ++k) {
    if (m(k) > m(k - 1) && m(k) >= m(k + 1)) maxima.push_back(k);
  }
  std::sort(maxima.begin(), maxima.end(), [&](Eigen::Index a, Eigen::Index b) { return m(a) > m(b); });
  std::vector<double> peaks;
  for (Eigen::Index k : maxima) {
    const double f = spectrum.frequency_hz(k);
    bool far = true;
    for (double q : peaks) far = far && std::abs(q - f) >= min_separation_hz;
    if (far) peaks.push_back(f);
    if (static_cast<int>(peaks.size()) == count) break;
  }
  std::sort(peaks.begin(), peaks.end());
  return peaks;
}

Eigen::VectorXd dc_fringe(double contrast, int dm, double tau, const Eigen::VectorXd& b_values,
                          const NvConstants& c) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (dm != 1 && dm != 2) throw std::invalid_argument("dm must be 1 or 2");
  const double omega = dm * kTwoPi * c.gyromagnetic_hz_per_t * tau;
  return (contrast * (omega * b_values.array()).sin()).matrix();
}

double fringe_period(int dm, double tau, const NvConstants& c) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  if (dm != 1 && dm != 2) throw std::invalid_argument("dm must be 1 or 2");
  return 1.0 / (dm * c.gyromagnetic_hz_per_t * tau);
}

}  // namespace nvd
