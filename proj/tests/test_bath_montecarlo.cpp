#include <doctest.h>

#include "approx.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "nvdephase/bath_montecarlo.hpp"

using namespace nvd;

TEST_SUITE("bath_montecarlo") {
  TEST_CASE("sample size and exclusion") {
    const BathConfig c = sample_bath(1.0, 200e-9, 99);
    const double volume = 4.0 / 3.0 * constants::pi * std::pow(200e-9, 3);
    CHECK(c.positions.size() == static_cast<std::size_t>(std::llround(ppm_to_per_m3(1.0) * volume)));
    for (std::size_t i = 0; i < c.positions.size(); ++i) {
      CHECK(c.positions[i].norm() <= 200e-9);
    }
    double min_sep = INFINITY;
    for (std::size_t i = 0; i < 400; ++i)
      for (std::size_t j = i + 1; j < c.positions.size(); ++j) min_sep = std::min(min_sep, (c.positions[i] - c.positions[j]).norm());
    CHECK(min_sep >= kDefaultExclusionRadius);
  }

  TEST_CASE("sampling is deterministic per seed") {
    const BathConfig a = sample_bath(3.0, 50e-9, 5), b = sample_bath(3.0, 50e-9, 5), c = sample_bath(3.0, 50e-9, 6);
    REQUIRE(a.positions.size() == b.positions.size());
    for (std::size_t i = 0; i < a.positions.size(); ++i) CHECK(a.positions[i] == b.positions[i]);
    CHECK(a.positions[0] != c.positions[0]);
  }

  TEST_CASE("small baths warn and empty baths throw") {
    Warnings w;
    sample_bath(1.0, 40e-9, 1, kDefaultExclusionRadius, &w);
    CHECK_FALSE(w.empty());
    CHECK_THROWS_AS(sample_bath(1.0, 5e-9, 1), std::invalid_argument);
  }

  TEST_CASE("linewidth of a single spin on axis") {
    BathConfig c;
    c.density_ppm = 1.0;
    c.region_radius = 10e-9;
    c.positions = {Eigen::Vector3d(0, 0, 5e-9)};
    const double expected = dipolar_constant() * std::abs(1.0 - 3.0) / std::pow(5e-9, 3);
    CHECK(config_linewidth(c, Eigen::Vector3d::UnitZ(), 1.0) == nvd::testing::approx(expected).epsilon(1e-12));
    c.positions = {Eigen::Vector3d(1, 0, 1).normalized() * 5e-9};
    CHECK(config_linewidth(c, Eigen::Vector3d(1, 0, 1).normalized(), 1.0) == nvd::testing::approx(expected).epsilon(1e-12));
  }

  TEST_CASE("ensemble result is independent of the thread count") {
    EnsembleOptions one, many;
    many.threads = 4;
    one.keep_linewidths = many.keep_linewidths = true;
    const auto a = ensemble_t2(2.0, 400, 77, one);
    const auto b = ensemble_t2(2.0, 400, 77, many);
    CHECK(a.t2 == b.t2);
    CHECK(a.linewidths == b.linewidths);
  }

  TEST_CASE("property: T2* scales as 1/n") {
    const auto lo = ensemble_t2(1.0, 2000, substream_seed(3, 0));
    const auto hi = ensemble_t2(10.0, 2000, substream_seed(3, 1));
    CHECK(lo.t2 * 1.0 / (hi.t2 * 10.0) == nvd::testing::approx(1.0).epsilon(0.05));
    CHECK(lo.q10 <= lo.q50);
    CHECK(lo.q50 <= lo.q90);
  }

  TEST_CASE("frozen prefactor reproduces the calibration point") {
    const auto r = ensemble_t2(1.0, 10000, kCalibrationSeed);
    CHECK(r.t2 == nvd::testing::approx(kCalibrationT2PerPpm).epsilon(1e-9));
  }

  TEST_CASE("ODR through the origin recovers an exact line") {
    const Eigen::VectorXd x = (Eigen::VectorXd(4) << 1, 2, 3, 4).finished();
    const Eigen::VectorXd y = 2.5 * x;
    const auto r = odr_fit_through_origin(x, 0.1 * x, y, 0.1 * y);
    CHECK(r.slope == nvd::testing::approx(2.5).epsilon(1e-6));
    const auto tls = odr_fit_through_origin(x, Eigen::VectorXd::Zero(4), y, Eigen::VectorXd::Zero(4));
    CHECK(tls.slope == nvd::testing::approx(2.5).epsilon(1e-9));
    CHECK_FALSE(tls.weighted);
  }

  TEST_CASE("ODR slope between x-only and y-only regressions") {
    const Eigen::VectorXd x = (Eigen::VectorXd(5) << 1, 2, 3, 4, 5).finished();
    const Eigen::VectorXd y = (Eigen::VectorXd(5) << 2.2, 3.9, 6.3, 7.8, 10.4).finished();
    const Eigen::VectorXd s = Eigen::VectorXd::Constant(5, 0.3);
    const double y_on_x = x.dot(y) / x.dot(x);
    const double x_on_y = y.dot(y) / x.dot(y);
    const auto r = odr_fit_through_origin(x, s, y, s);
    CHECK(r.slope >= std::min(y_on_x, x_on_y) - 1e-9);
    CHECK(r.slope <= std::max(y_on_x, x_on_y) + 1e-9);
    CHECK(r.slope_se > 0.0);
  }

  TEST_CASE("spin at the magic angle does not broaden") {
    BathConfig c;
    c.density_ppm = 1.0;
    c.region_radius = 10e-9;
    const double theta = std::acos(1.0 / std::sqrt(3.0));
    c.positions = {Eigen::Vector3d(std::sin(theta), 0.0, std::cos(theta)) * 4e-9};
    CHECK(config_linewidth(c, Eigen::Vector3d::UnitZ(), 1.0) < 1e-12 * dipolar_constant() / std::pow(4e-9, 3));
  }

  TEST_CASE("property: doubling the region radius changes T2* by under 2%") {
    const double inner = region_radius_for_count(1.0, 1000.0);
    std::vector<double> full, truncated;
    for (std::uint64_t i = 0; i < 2000; ++i) {
      BathConfig c = sample_bath(1.0, 2.0 * inner, substream_seed(11, i));
      full.push_back(config_linewidth(c, Eigen::Vector3d::UnitZ(), kCalibratedPrefactor));
      std::erase_if(c.positions, [&](const Eigen::Vector3d& p) { return p.norm() > inner; });
      truncated.push_back(config_linewidth(c, Eigen::Vector3d::UnitZ(), kCalibratedPrefactor));
    }
    auto median = [](std::vector<double> v) {
      std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
      return v[v.size() / 2];
    };
    CHECK(median(full) == nvd::testing::approx(median(truncated)).epsilon(0.02));
  }

  TEST_CASE("property: the linewidth distribution is isotropic") {
    EnsembleOptions z, tilted;
    tilted.nv_axis = Eigen::Vector3d(1.0, 1.0, 1.0).normalized();
    const auto a = ensemble_t2(2.0, 4000, 21, z);
    const auto b = ensemble_t2(2.0, 4000, 22, tilted);
    CHECK(b.q10 == nvd::testing::approx(a.q10).epsilon(0.05));
    CHECK(b.q50 == nvd::testing::approx(a.q50).epsilon(0.05));
    CHECK(b.q90 == nvd::testing::approx(a.q90).epsilon(0.05));
  }

  TEST_CASE("property: ODR is symmetric under swapping axes") {
    const Eigen::VectorXd x = (Eigen::VectorXd(5) << 1, 2, 3, 4, 5).finished();
    const Eigen::VectorXd y = (Eigen::VectorXd(5) << 2.2, 3.9, 6.3, 7.8, 10.4).finished();
    const Eigen::VectorXd sx = (Eigen::VectorXd(5) << 0.2, 0.3, 0.2, 0.4, 0.3).finished();
    const Eigen::VectorXd sy = (Eigen::VectorXd(5) << 0.4, 0.3, 0.5, 0.3, 0.6).finished();
    const auto forward = odr_fit_through_origin(x, sx, y, sy);
    const auto swapped = odr_fit_through_origin(y, sy, x, sx);
    CHECK(swapped.slope == nvd::testing::approx(1.0 / forward.slope).epsilon(1e-6));
  }

  TEST_CASE("ODR input errors") {
    CHECK_THROWS_AS(odr_fit_linear({{1.0, 0.1, 1e-6, 1e-7}}), std::invalid_argument);
    CHECK_THROWS_AS(odr_fit_linear({{1.0, 0.1, 1e-6, 1e-7}, {-1.0, 0.1, 1e-6, 1e-7}}), std::invalid_argument);
    CHECK_THROWS_AS(odr_fit_linear({{1.0, 0.1, 1e-6, 1e-7}, {2.0, 0.0, 1e-6, 0.0}}), std::invalid_argument);
  }
}
