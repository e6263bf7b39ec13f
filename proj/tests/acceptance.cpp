// Acceptance criteria: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nvdephase/bath_drive.hpp"
#include "nvdephase/bath_montecarlo.hpp"
#include "nvdephase/p1_spectrum.hpp"
#include "nvdephase/ramsey.hpp"
#include "nvdephase/run.hpp"
#include "nvdephase/sensitivity.hpp"
#include "oracles.hpp"
#include "ramsey_cases.hpp"

using namespace nvd;

namespace {

// Tolerances.
constexpr double kBudgetRelTol = 0.05;
constexpr double kBudgetMaxSeconds = 1.0;
constexpr double kDriveDataRelTol = 0.15;
constexpr double kDriveRecoveryRelTol = 1e-4;
constexpr double kDriveGammaRelTol = 0.10;
constexpr double kDriveDeltaRelTol = 0.15;
constexpr double kDriveMaxSeconds = 1.0;
constexpr double kOdrCenterKhz = 16.6;
constexpr double kOdrHalfWidthKhz = 2.6;
constexpr double kMcSlopeTol = 0.05;
constexpr double kMcReferenceRelTol = 0.30;
constexpr double kMcMaxSeconds = 120.0;
constexpr double kSplitTargetKhz = 80.0;
constexpr double kSplitTolKhz = 15.0;
constexpr double kN15SplitMhz = 159.7;
constexpr double kN15SplitTolMhz = 0.1;
constexpr double kOracleLineTolHz = 1.0;
constexpr double kQuarticRatio = 16.0;
constexpr double kQuarticRatioTol = 3.0;
constexpr double kDqInvarianceUlps = 16.0;
constexpr int kRamseyTrials = 100;
constexpr double kRamseyRelTol = 1e-3;
constexpr double kFringeRatio = 36.7;
constexpr double kFringeRatioTol = 0.1;
constexpr double kEtaRelTol = 1e-6;
constexpr double kCrossoverLo = 0.3, kCrossoverHi = 3.0;
constexpr double kDqSqRatioRelTol = 0.05;
constexpr double kAllanSlope = -0.5, kAllanSlopeTol = 0.03;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::string failed;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    failed += (failed.empty() ? "" : ", ") + what;
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Scenario bundled(const std::string& file) {
  ScenarioReport report;
  const auto path = std::filesystem::path(default_data_dir()) / "scenarios" / file;
  Scenario sc = load_scenario(path.string(), report);
  if (!report.ok()) throw std::runtime_error(path.string() + ": " + report.violations.front());
  return sc;
}

std::map<std::string, double> metrics_of(const Scenario& sc, int threads = 1) {
  RunOptions opt;
  opt.threads = threads;
  return execute_task(sc, opt).metrics;
}

bool within_rel(double v, double expected, double tol) { return std::abs(v - expected) <= tol * std::abs(expected); }

void criterion_budget(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  int checks = 0;
  for (const char* file : {"table_s3.json", "table_s4.json", "table_s5.json"}) {
    const Scenario sc = bundled(file);
    const auto metrics = metrics_of(sc);
    for (const auto& c : evaluate_checks(sc.checks, metrics)) {
      ++checks;
      o.require(c.pass && c.check.rel_tol && *c.check.rel_tol <= kBudgetRelTol, sc.name + " " + c.check.metric);
    }
    if (sc.name == "table-s5") {
      o.detail << "table-s5 SQ total " << metrics.at("sq.total_rate_per_us") << "/us (tabulated 1.01, rows sum 0.971); ";
    }
  }
  const double t = seconds_since(start);
  o.require(t < kBudgetMaxSeconds, "runtime");
  o.detail << checks << " table entries within 5%, " << t << " s";
}

void criterion_drive(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  DriveModel m;
  m.dm = 2;
  m.gamma_nvn = constants::two_pi * 7e3;
  m.delta_n = 80e3;
  m.t2_other = 27e-6;
  o.require(within_rel(total_t2_with_drive(m, 1e9), 27e-6, 1e-3), "saturation");

  const auto metrics = metrics_of(bundled("fig4a_drive.json"));
  const double dev = metrics.at("model.max_rel_dev_to_data");
  o.require(dev <= kDriveDataRelTol, "forward model vs data");

  std::vector<DrivePoint> synthetic;
  for (double omega : {10e3, 30e3, 60e3, 100e3, 150e3, 250e3, 400e3, 700e3, 1e6, 2e6}) {
    synthetic.push_back({omega, total_t2_with_drive(m, omega), 0.0});
  }
  const auto rec = fit_drive_model(synthetic, 2);
  const double rec_err = std::max({std::abs(rec.model.gamma_nvn / m.gamma_nvn - 1), std::abs(rec.model.delta_n / m.delta_n - 1),
                                   std::abs(rec.model.t2_other / m.t2_other - 1)});
  o.require(rec_err <= kDriveRecoveryRelTol, "noiseless recovery");

  const double g = metrics.at("fit.gamma_khz"), d = metrics.at("fit.delta_khz");
  o.require(within_rel(g, 9.3, kDriveGammaRelTol), "fitted gamma");
  o.require(within_rel(d, 60.0, kDriveDeltaRelTol), "fitted delta");
  const double t = seconds_since(start);
  o.require(t < kDriveMaxSeconds, "runtime");
  o.detail << "model max dev " << 100 * dev << "%, recovery err " << rec_err << ", fit gamma 2pi x " << g
           << " kHz, delta " << d << " kHz, " << t << " s";
}

void criterion_concentration(Outcome& o) {
  const auto start = std::chrono::steady_clock::now();
  const double calibrated = calibrate_prefactor(1.0, kCalibrationT2PerPpm, 10000, kCalibrationSeed);
  o.require(within_rel(calibrated, kCalibratedPrefactor, 1e-9), "calibration reproduces frozen prefactor");
  const auto metrics = metrics_of(bundled("fig4c_odr.json"));
  const double a = metrics.at("odr.slope_khz_per_ppm");
  const double slope = metrics.at("mc.loglog_slope");
  const double dev = metrics.at("mc.max_rel_dev_vs_reference");
  o.require(std::abs(a - kOdrCenterKhz) <= kOdrHalfWidthKhz, "ODR slope");
  o.require(std::abs(slope - 1.0) <= kMcSlopeTol, "log-log slope");
  o.require(dev <= kMcReferenceRelTol, "reference 9.6 us ppm");
  const double t = seconds_since(start);
  o.require(t < kMcMaxSeconds, "runtime");
  o.detail << "A = 2pi x " << a << " kHz/ppm, MC slope " << slope << ", max dev " << 100 * dev << "%, " << t << " s";
}

// Every line must be a difference of two oracle levels of its orientation.
bool lines_match_oracle(const FieldVector& b, const NitrogenSpecies& sp) {
  const auto lines = p1_lines(b, sp);
  const Eigen::Vector3d bv(b.bx, b.by, b.bz);
  for (const auto& l : lines) {
    const Eigen::Vector3d n = jahn_teller_axis(l.orientation);
    const double par = bv.dot(n);
    const Eigen::VectorXd e = oracle::oracle_levels(par, (bv - par * n).norm(), sp);
    bool found = false;
    for (Eigen::Index i = 0; i < e.size() && !found; ++i)
      for (Eigen::Index j = 0; j < e.size() && !found; ++j) found = std::abs(e(i) - e(j) - l.frequency_hz) < kOracleLineTolHz;
    if (!found) return false;
  }
  return true;
}

void criterion_spectroscopy(Outcome& o) {
  const auto n14 = NitrogenSpecies::n14(), n15 = NitrogenSpecies::n15();
  const auto aligned = group_allowed_lines(p1_lines(tilted_field(8.5e-3, 0.0), n14));
  const double weights[] = {1, 3, 1, 3, 3, 1};
  bool pattern = aligned.size() == 6;
  for (std::size_t g = 0; pattern && g < 6; ++g) {
    pattern = std::abs(aligned[g].weight - weights[g]) < 1e-9 && aligned[g].min_hz > 100e6 && aligned[g].max_hz < 500e6;
  }
  o.require(pattern, "six groups 1:3:1:3:3:1 in 100-500 MHz");

  const auto tilted = group_allowed_lines(p1_lines(tilted_field(8.5e-3, 3.0), n14));
  double closest = INFINITY;
  for (const auto& g : tilted) {
    if (std::abs(g.weight - 3.0) < 0.5 && std::abs(g.width_hz() * 1e-3 - kSplitTargetKhz) < std::abs(closest - kSplitTargetKhz)) {
      closest = g.width_hz() * 1e-3;
    }
  }
  o.require(std::abs(closest - kSplitTargetKhz) <= kSplitTolKhz, "3 degree weight-3 splitting");

  const auto g15 = group_allowed_lines(p1_lines(tilted_field(9.8e-3, 0.0), n15));
  const double split = g15.empty() ? 0.0 : (g15.back().center_hz - g15.front().center_hz) * 1e-6;
  o.require(g15.size() == 4 && std::abs(split - kN15SplitMhz) <= kN15SplitTolMhz, "15N four groups and split");

  const bool oracle_ok = lines_match_oracle(tilted_field(8.5e-3, 0.0), n14) && lines_match_oracle(tilted_field(8.5e-3, 3.0), n14) &&
                         lines_match_oracle(tilted_field(9.8e-3, 0.0), n15);
  o.require(oracle_ok, "oracle");
  o.detail << "14N groups " << aligned.size() << ", 3 deg weight-3 splitting closest to target " << closest
           << " kHz (target 80 +/- 15), 15N groups " << g15.size() << " split " << split << " MHz";
}

void criterion_perturbation(Outcome& o) {
  double worst = 0.0;
  for (double bz_mt : {2.0, 5.0, 10.0, 20.0}) {
    const double bz = bz_mt * 1e-3;
    double previous = 0.0;
    for (double tilt = 5.0; tilt >= 5.0 / 16.0; tilt /= 2.0) {
      const double bperp = bz * std::tan(tilt * constants::pi / 180.0);
      const auto approx = nv_transitions_offaxis_second_order<long double>(bz, bperp);
      const auto exact = oracle::oracle_transitions(FieldVector{bperp, 0, bz}, StrainParams{});
      const double r = static_cast<double>(
          std::max(std::abs(approx.f_plus1 - exact.second), std::abs(approx.f_minus1 - exact.first)));
      // tan does not halve exactly; rescale to an exact doubling of B_perp
      if (previous > 0.0) {
        const double scale = std::tan(tilt * 2 * constants::pi / 180.0) / std::tan(tilt * constants::pi / 180.0);
        const double ratio = previous / r * std::pow(2.0 / scale, 4);
        worst = std::max(worst, std::abs(ratio - kQuarticRatio));
      }
      previous = r;
    }
    previous = 0.0;
    for (double mperp = 1e6; mperp >= 1e6 / 16.0; mperp /= 2.0) {
      const StrainParams m{mperp * 0.6, mperp * 0.8, 1e5};
      const auto approx = nv_transitions_strain_expansion<long double>(bz, m);
      const auto exact = oracle::oracle_transitions(FieldVector{0, 0, bz}, m);
      const double r = static_cast<double>(
          std::max(std::abs(approx.f_plus1 - exact.second), std::abs(approx.f_minus1 - exact.first)));
      if (previous > 0.0) worst = std::max(worst, std::abs(previous / r - kQuarticRatio));
      previous = r;
    }
  }
  o.require(worst <= kQuarticRatioTol, "quartic residual ratio");

  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double invariance = 0.0;
  const double ulp = std::numeric_limits<double>::epsilon() * constants::nv_zero_field_splitting_hz;
  for (int i = 0; i < 200; ++i) {
    const double bz = 0.011 + 0.009 * u(rng);
    const StrainParams m{1e6 * u(rng), 1e6 * u(rng), 1e6 * u(rng)};
    StrainParams moved = m;
    moved.mz += 5e6 * u(rng);
    NvConstants c;
    c.zero_field_splitting_hz += 5e6 * u(rng);
    const double ref = nv_transitions_strain(bz, m).dq_difference();
    invariance = std::max(invariance, std::abs(nv_transitions_strain(bz, moved, c).dq_difference() - ref));
  }
  o.require(invariance <= kDqInvarianceUlps * ulp, "DQ invariance");
  o.detail << "max |ratio - 16| = " << worst << ", DQ invariance " << invariance / ulp << " ulp(D)";
}

void criterion_ramsey(Outcome& o) {
  std::mt19937_64 rng(20240611);
  int passed = 0;
  double worst = 0.0;
  for (int trial = 0; trial < kRamseyTrials; ++trial) {
    const auto cs = testing::random_ramsey_case(rng, trial);
    RamseyFitOptions opt;
    opt.dm = cs.params.dm;
    const auto fit = fit_ramsey(cs.times, ramsey_model(cs.params, cs.times), static_cast<int>(cs.params.lines.size()), opt);
    const double err = testing::max_relative_error(cs.params, fit.params);
    worst = std::max(worst, err);
    passed += err < kRamseyRelTol;
  }
  o.require(passed == kRamseyTrials, "round trip");

  RamseyParams dq;
  dq.c0 = 0.4;
  dq.t2star = 6e-6;
  dq.p = 1.3;
  dq.dm = 2;
  dq.lines = {{1.1e6, 5e-9}, {2.3e6, -3e-9}};
  RamseyParams sq = dq;
  sq.dm = 1;
  for (auto& l : sq.lines) l.f_hz *= 2;
  const Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(1000, 0.0, 18e-6);
  o.require(synthesize_ramsey(dq, t) == synthesize_ramsey(sq, t), "DQ doubling");

  const double ratio = fringe_period(1, 1.308e-6) / fringe_period(2, 23.99e-6);
  o.require(std::abs(ratio - kFringeRatio) <= kFringeRatioTol, "fringe ratio");
  o.detail << passed << "/" << kRamseyTrials << " round trips (worst " << worst << "), fringe ratio " << ratio;
}

void criterion_sensitivity(Outcome& o) {
  // σ·sqrt(τ+τD)/(C·γ·τ) evaluated by hand: 44.8885 nT/√Hz
  const double hand = 0.0321 * std::sqrt(70e-6) / (0.026 * 2.0 * 3.141592653589793 * 28e9 * 1.308e-6);
  const double eta = ramsey_sensitivity({0.0321, 1.308e-6, 68.692e-6, 0.026, 1});
  o.require(within_rel(eta, hand, kEtaRelTol), "eta oracle");

  const auto metrics = metrics_of(bundled("fom.json"));
  const double crossover = metrics.at("fom.crossover_ppm");
  const double ratio = metrics.at("fom.dq_sq_ratio_100ppm");
  o.require(crossover >= kCrossoverLo && crossover <= kCrossoverHi, "crossover");
  o.require(within_rel(ratio, 1.0 / std::sqrt(2.0), kDqSqRatioRelTol), "DQ/SQ ratio");

  std::mt19937_64 rng(99);
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::VectorXd x(200000);
  for (auto& v : x) v = noise(rng);
  const std::vector<double> taus{1, 3, 10, 30, 100, 300, 1000};
  const auto adev = allan_deviation(x, 1.0, taus);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : adev) {
    const double lx = std::log(p.tau), ly = std::log(p.adev);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
  }
  const double n = static_cast<double>(adev.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  o.require(std::abs(slope - kAllanSlope) <= kAllanSlopeTol, "Allan slope");
  o.detail << "eta " << eta * 1e9 << " nT/rtHz (hand " << hand * 1e9 << "), crossover " << crossover
           << " ppm, DQ/SQ at 100 ppm " << ratio << ", Allan slope " << slope;
}

void criterion_determinism(Outcome& o) {
  std::vector<Scenario> scenarios;
  for (const char* f : {"table_s3.json", "p1_n14_tilted.json", "fig4a_drive.json", "fom.json"}) scenarios.push_back(bundled(f));
  ScenarioReport r1, r2;
  scenarios.push_back(parse_scenario(
      R"({"name": "mc", "seed": 31, "montecarlo": {"densities_ppm": [0.5, 2, 8], "n_configs": 1000}})", r1));
  scenarios.push_back(parse_scenario(
      R"({"name": "ramsey", "seed": 5, "ramsey": {"dm": 2, "c0": 0.3, "t2star_us": 6, "p": 1.2, "noise_sd": 0.01,
          "lines": [{"f_mhz": 0.8, "tau0_ns": 4}, {"f_mhz": 2.1, "tau0_ns": -6}], "t_max_us": 18, "points": 1200}})",
      r2));
  int files = 0;
  for (const auto& sc : scenarios) {
    RunOptions one, many;
    many.threads = 4;
    const TaskResult a = execute_task(sc, one), b = execute_task(sc, many);
    o.require(a.files.size() == b.files.size(), sc.name + " file count");
    for (std::size_t i = 0; i < std::min(a.files.size(), b.files.size()); ++i) {
      o.require(a.files[i].contents == b.files[i].contents, sc.name + "/" + a.files[i].name);
      ++files;
    }
  }
  o.detail << files << " output files byte-identical for 1 vs 4 threads";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"1 budget tables", criterion_budget},
      {"2 drive model", criterion_drive},
      {"3 concentration scaling", criterion_concentration},
      {"4 spectroscopy", criterion_spectroscopy},
      {"5 perturbation theory", criterion_perturbation},
      {"6 ramsey engine", criterion_ramsey},
      {"7 sensitivity", criterion_sensitivity},
      {"8 determinism", criterion_determinism},
  };
  int failures = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      run(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail.str();
    if (!o.pass) std::cout << " [failed: " << o.failed << "]";
    std::cout << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
