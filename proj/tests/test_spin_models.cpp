#include <doctest.h>

#include "approx.hpp"

#include <algorithm>
#include <random>

#include "nvdephase/spin_models.hpp"
#include "oracles.hpp"

using namespace nvd;
using namespace nvd::oracle;

TEST_SUITE("spin_models") {
  TEST_CASE("hamiltonian matches the operator form") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> field(-0.05, 0.05), strain(-5e6, 5e6);
    for (int trial = 0; trial < 200; ++trial) {
      const FieldVector b{field(rng), field(rng), field(rng)};
      const StrainParams m{strain(rng), strain(rng), strain(rng)};
      const auto h = build_nv_hamiltonian<long double>(b, m);
      const M3 ref = operator_hamiltonian(b, m);
      CHECK(static_cast<double>((h - ref).cwiseAbs().maxCoeff()) < 1e-6);
      CHECK(static_cast<double>(hermiticity_defect(h)) == 0.0);
      Eigen::SelfAdjointEigenSolver<Matrix3c<double>> solver(build_nv_hamiltonian(b, m));
      const auto ref_e = oracle_eigenvalues(b, m);
      for (int k = 0; k < 3; ++k) CHECK(solver.eigenvalues()(k) == nvd::testing::approx(double(ref_e(k))).epsilon(1e-12));
    }
  }

  TEST_CASE("property: trace equals the eigenvalue sum") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> field(-0.05, 0.05), strain(-5e6, 5e6);
    for (int trial = 0; trial < 200; ++trial) {
      const auto h = build_nv_hamiltonian(FieldVector{field(rng), field(rng), field(rng)},
                                          StrainParams{strain(rng), strain(rng), strain(rng)});
      Eigen::SelfAdjointEigenSolver<Matrix3c<double>> solver(h);
      const double trace = h.trace().real();
      CHECK(std::abs(solver.eigenvalues().sum() - trace) <= 1e-14 * std::abs(trace) * 8);
    }
  }

  TEST_CASE("zero field, zero strain is degenerate at D") {
    const auto lv = nv_levels_exact(build_nv_hamiltonian(FieldVector{}, StrainParams{}));
    CHECK(lv.f_plus1 == nvd::testing::approx(2.87e9).epsilon(1e-14));
    CHECK(lv.f_minus1 == nvd::testing::approx(2.87e9).epsilon(1e-14));
  }

  TEST_CASE("axial field gives D ± γB") {
    const auto lv = nv_levels_exact(build_nv_hamiltonian(FieldVector{0, 0, 0.0085}, StrainParams{}));
    CHECK(lv.f_plus1 == nvd::testing::approx(2.87e9 + 28.025e9 * 0.0085).epsilon(1e-14));
    CHECK(lv.f_minus1 == nvd::testing::approx(2.87e9 - 28.025e9 * 0.0085).epsilon(1e-14));
  }

  TEST_CASE("strain closed form equals exact diagonalization") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> bz(-0.02, 0.02), strain(-1e6, 1e6);
    for (int trial = 0; trial < 200; ++trial) {
      const double z = bz(rng);
      const StrainParams m{strain(rng), strain(rng), strain(rng)};
      const auto closed = nv_transitions_strain(z, m);
      const auto [fm, fp] = oracle_transitions(FieldVector{0, 0, z}, m);
      CHECK(closed.f_minus1 == nvd::testing::approx(double(fm)).epsilon(1e-13));
      CHECK(closed.f_plus1 == nvd::testing::approx(double(fp)).epsilon(1e-13));
    }
  }

  TEST_CASE("zero field with transverse strain splits by 2|M_perp|") {
    const StrainParams m{3e6, 4e6, 0};
    const auto t = nv_transitions_strain(0.0, m);
    CHECK(t.dq_difference() == nvd::testing::approx(10e6).epsilon(1e-12));
    const auto lv = nv_levels_exact(build_nv_hamiltonian(FieldVector{}, m));
    CHECK(lv.f_plus1 - lv.f_minus1 == nvd::testing::approx(10e6).epsilon(1e-9));
  }

  TEST_CASE("strain expansion residual is quartic in M_perp") {
    for (double bz : {0.002, 0.005, 0.01, 0.02}) {
      double previous = 0.0;
      for (double mperp = 1e6; mperp >= 1e6 / 16.0; mperp /= 2.0) {
        const StrainParams m{mperp, 0.0, 2e5};
        const auto approx = nv_transitions_strain_expansion<long double>(bz, m);
        const auto exact = oracle_transitions(FieldVector{0, 0, bz}, m);
        const double residual = static_cast<double>(std::abs(approx.f_plus1 - exact.second));
        if (previous > 0.0) CHECK(previous / residual == nvd::testing::approx(16.0).epsilon(0.1));
        previous = residual;
      }
    }
  }

  TEST_CASE("second-order off-axis residual is quartic in B_perp") {
    for (double bz_mt : {2.0, 5.0, 10.0, 20.0}) {
      double previous = 0.0;
      for (double tilt = 5.0; tilt >= 5.0 / 16.0; tilt /= 2.0) {
        const double b = bz_mt * 1e-3 / std::cos(tilt * constants::pi / 180.0);
        const double bperp = b * std::sin(tilt * constants::pi / 180.0);
        const double bz = bz_mt * 1e-3;
        const auto approx = nv_transitions_offaxis_second_order<long double>(bz, bperp);
        const auto exact = oracle_transitions(FieldVector{bperp, 0, bz}, StrainParams{});
        const double residual = static_cast<double>(std::max(std::abs(approx.f_plus1 - exact.second),
                                                             std::abs(approx.f_minus1 - exact.first)));
        if (previous > 0.0) CHECK(previous / residual == nvd::testing::approx(16.0).epsilon(0.15));
        previous = residual;
      }
    }
  }

  TEST_CASE("common-mode off-axis form shifts both transitions equally") {
    const auto t = nv_transitions_offaxis(0.0085, 0.001);
    CHECK(t.f_plus1 - t.f_minus1 == nvd::testing::approx(2 * 28.025e9 * 0.0085).epsilon(1e-14));
    const double shift = 3.0 * std::pow(28.025e9 * 0.001, 2) / 2.0 / 2.87e9;
    CHECK((t.f_plus1 + t.f_minus1) / 2 - 2.87e9 == nvd::testing::approx(shift).epsilon(1e-6));
  }

  TEST_CASE("DQ difference is invariant under D and M_z shifts") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> bz(0.001, 0.02), strain(-1e6, 1e6), shift(-5e6, 5e6);
    for (int trial = 0; trial < 100; ++trial) {
      const double z = bz(rng);
      const StrainParams m{strain(rng), strain(rng), strain(rng)};
      StrainParams moved = m;
      moved.mz += shift(rng);
      NvConstants c;
      c.zero_field_splitting_hz += shift(rng);
      const double ref = nv_transitions_strain(z, m).dq_difference();
      const double ulp = std::numeric_limits<double>::epsilon() * 3e9;
      CHECK(std::abs(nv_transitions_strain(z, moved).dq_difference() - ref) <= 4 * ulp);
      CHECK(std::abs(nv_transitions_strain(z, m, c).dq_difference() - ref) <= 4 * ulp);
      const auto a = nv_levels_exact(build_nv_hamiltonian(FieldVector{0, 0, z}, m));
      const auto bb = nv_levels_exact(build_nv_hamiltonian(FieldVector{0, 0, z}, moved, c));
      CHECK(std::abs((a.f_plus1 - a.f_minus1) - (bb.f_plus1 - bb.f_minus1)) <= 16 * ulp);
    }
  }

  TEST_CASE("regime and validation errors") {
    CHECK_THROWS_AS(nv_transitions_offaxis(0.001, 0.02), OutOfRegimeError);
    CHECK_THROWS_AS(nv_transitions_strain_expansion(0.0, StrainParams{1e5, 0, 0}), OutOfRegimeError);
    CHECK_THROWS_AS(build_nv_hamiltonian(FieldVector{0, 0, 1.5}, StrainParams{}), std::invalid_argument);
    CHECK_THROWS_AS(build_nv_hamiltonian(FieldVector{0, 0, NAN}, StrainParams{}), std::invalid_argument);
    CHECK_THROWS_AS(build_nv_hamiltonian(FieldVector{}, StrainParams{0, 0, 3e9}), std::invalid_argument);
  }
}
