#include <doctest.h>

#include "approx.hpp"

#include <random>

#include "nvdephase/sensitivity.hpp"

using namespace nvd;

TEST_SUITE("sensitivity") {
  TEST_CASE("hand-computed sensitivity") {
    // 0.0321 * sqrt(70e-6) / (0.026 * 2pi * 28e9 * 1.308e-6)
    const double hand = 0.0321 * 8.366600265340756e-3 / (0.026 * 1.7592918860102842e11 * 1.308e-6);
    const double eta = ramsey_sensitivity({0.0321, 1.308e-6, 68.692e-6, 0.026, 1});
    CHECK(eta == nvd::testing::approx(hand).epsilon(1e-12));
    CHECK(eta * 1e9 == nvd::testing::approx(44.888).epsilon(1e-4));
  }

  TEST_CASE("property: DQ halves eta at equal contrast and timing") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (int i = 0; i < 50; ++i) {
      SensitivityParams p{u(rng), u(rng) * 1e-5, u(rng) * 1e-5, u(rng) * 0.1, 1};
      const double sq = ramsey_sensitivity(p);
      p.dm = 2;
      CHECK(ramsey_sensitivity(p) == nvd::testing::approx(sq / 2).epsilon(1e-14));
    }
  }

  TEST_CASE("contrast functions") {
    CHECK(ramsey_sensitivity(0.03, 2e-6, 1e-6, constant_contrast(0.02), 1) ==
          nvd::testing::approx(ramsey_sensitivity({0.03, 2e-6, 1e-6, 0.02, 1})));
    const auto c = stretched_contrast(0.05, 2e-6, 1.0);
    CHECK(c(2e-6) == nvd::testing::approx(0.05 / std::exp(1.0)));
  }

  TEST_CASE("optimal tau for exponential decay without overhead is T/2") {
    CHECK(optimal_tau(4e-6, 1.0, 0.0) == nvd::testing::approx(2e-6).epsilon(1e-5));
    CHECK(optimal_tau(4e-6, 1.0, 100e-6) > 2e-6);
  }

  TEST_CASE("figure of merit structure") {
    FomSpec spec;
    spec.n_ppm = default_fom_grid();
    const auto curves = eta_n_sweep(spec);
    REQUIRE(curves.size() == 3);
    const double crossover = fom_crossover_ppm(spec);
    CHECK(crossover > 0.3);
    CHECK(crossover < 3.0);
    // grid point 24 is 0.1 ppm, the normalization concentration
    CHECK(curves[0].eta(24) == nvd::testing::approx(1.0).epsilon(1e-12));
    const auto eta = [&](double n, int dm) { return 1.0 / (dm * std::sqrt(spec.n_nv * n * fom_t2star(spec, n, dm, 0.0))); };
    CHECK(eta(100.0, 2) / eta(100.0, 1) == nvd::testing::approx(1.0 / std::sqrt(2.0)).epsilon(0.05));
    for (Eigen::Index i = 0; i < curves[0].eta.size(); ++i) {
      CHECK(curves[1].eta(i) <= curves[0].eta(i));
      CHECK(curves[2].eta(i) <= curves[1].eta(i));
    }
  }

  TEST_CASE("no strain channel means no crossover") {
    FomSpec spec;
    spec.n_ppm = default_fom_grid();
    spec.strain_t2 = INFINITY;
    CHECK(std::isnan(fom_crossover_ppm(spec)));
  }

  TEST_CASE("Allan deviation of white noise") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::VectorXd x(100000);
    for (auto& v : x) v = n(rng);
    const auto adev = allan_deviation(x, 1.0, {1, 10, 100, 1000});
    REQUIRE(adev.size() == 4);
    const double slope = std::log(adev[3].adev / adev[0].adev) / std::log(1000.0);
    CHECK(slope == nvd::testing::approx(-0.5).epsilon(0.06));
    CHECK(adev[0].adev == nvd::testing::approx(1.0).epsilon(0.02));
  }

  TEST_CASE("Allan deviation drops averaging times beyond half the series") {
    Warnings w;
    const auto adev = allan_deviation(Eigen::VectorXd::LinSpaced(100, 0, 1), 1.0, {2, 60}, &w);
    CHECK(adev.size() == 1);
    CHECK(w.size() == 1);
  }

  TEST_CASE("property: eta is homogeneous in sigma and contrast") {
    const SensitivityParams p{0.03, 2e-6, 10e-6, 0.02, 1};
    const double base = ramsey_sensitivity(p);
    for (double k : {0.5, 3.0, 17.0}) {
      CHECK(ramsey_sensitivity({k * p.sigma, p.tau, p.tau_d, p.contrast, 1}) == nvd::testing::approx(k * base).epsilon(1e-14));
      CHECK(ramsey_sensitivity({p.sigma, p.tau, p.tau_d, k * p.contrast, 1}) == nvd::testing::approx(base / k).epsilon(1e-14));
    }
  }

  TEST_CASE("without dead time and at fixed contrast eta falls as tau^-1/2") {
    const double a = ramsey_sensitivity({0.03, 1e-6, 0.0, 0.02, 1});
    const double b = ramsey_sensitivity({0.03, 4e-6, 0.0, 0.02, 1});
    CHECK(a / b == nvd::testing::approx(2.0).epsilon(1e-12));
  }

  TEST_CASE("property: sensitivity ratio identity at equal contrast") {
    const double t_sq = 0.7e-6, t_dq = 3.1e-6, td = 68e-6, s_sq = 0.032, s_dq = 0.041;
    const double ratio =
        ramsey_sensitivity({s_sq, t_sq, td, 0.026, 1}) / ramsey_sensitivity({s_dq, t_dq, td, 0.026, 2});
    const double identity = 2.0 * (t_dq / t_sq) * (s_sq / s_dq) * std::sqrt((t_sq + td) / (t_dq + td));
    CHECK(ratio == nvd::testing::approx(identity).epsilon(1e-12));
  }

  TEST_CASE("long dead time pushes the optimal tau to T2*") {
    CHECK(optimal_tau(4e-6, 1.0, 400e-6) == nvd::testing::approx(4e-6).epsilon(0.1));
  }

  TEST_CASE("property: optimal tau is nondecreasing in dead time") {
    for (double p : {1.0, 1.5, 2.0}) {
      double prev = 0.0;
      for (double td = 0.0; td <= 1e-3; td = td == 0.0 ? 1e-8 : td * 2.0) {
        const double t = optimal_tau(3e-6, p, td);
        CHECK(t >= prev * (1.0 - 1e-6));
        prev = t;
      }
    }
  }

  TEST_CASE("Allan deviation of constant and drifting series") {
    const auto flat = allan_deviation(Eigen::VectorXd::Constant(1000, 3.5), 1.0, {1, 10, 100});
    for (const auto& a : flat) CHECK(a.adev == 0.0);
    const double c = 0.25, cadence = 0.5;
    Eigen::VectorXd drift(2000);
    for (Eigen::Index i = 0; i < drift.size(); ++i) drift(i) = c * cadence * static_cast<double>(i);
    for (const auto& a : allan_deviation(drift, cadence, {0.5, 5.0, 50.0})) {
      CHECK(a.adev == nvd::testing::approx(c * a.tau / std::sqrt(2.0)).epsilon(1e-9));
    }
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(ramsey_sensitivity({0.0, 1e-6, 0, 0.1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(ramsey_sensitivity({0.1, 1e-6, 0, 0.1, 3}), std::invalid_argument);
    FomSpec spec;
    CHECK_THROWS_AS(eta_n_sweep(spec), std::invalid_argument);
  }
}
