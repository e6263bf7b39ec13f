#pragma once

// NV ground-state spin Hamiltonian and its transition frequencies, exact and
// perturbative. Everything is templated on the real scalar so that oracles can
// run the same code in long double.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>

#include "nvdephase/constants.hpp"
#include "nvdephase/errors.hpp"

namespace nvd {

/// Magnetic field components in the NV frame (z along the NV axis) [T].
struct FieldVector {
  double bx = 0.0;
  double by = 0.0;
  double bz = 0.0;

  double perp() const { return std::hypot(bx, by); }
  double norm() const { return std::sqrt(bx * bx + by * by + bz * bz); }
};

/// Strain / electric-field terms M_x, M_y, M_z [Hz].
struct StrainParams {
  double mx = 0.0;
  double my = 0.0;
  double mz = 0.0;

  double perp() const { return std::hypot(mx, my); }
};

/// Throws std::invalid_argument on non-finite components or |B| >= 1 T.
void validate(const FieldVector& b);
/// Throws std::invalid_argument on non-finite components or |M_i| >= D.
void validate(const StrainParams& m, const NvConstants& c = {});

template <typename Scalar>
using Matrix3c = Eigen::Matrix<std::complex<Scalar>, 3, 3>;

/// Basis order of every NV matrix: |+1>, |0>, |-1>.
enum NvBasis : int { kPlusOne = 0, kZero = 1, kMinusOne = 2 };

template <typename Scalar>
struct NvLevelsT {
  Scalar e_minus1{};
  Scalar e_0{};
  Scalar e_plus1{};
  Scalar f_minus1{};
  Scalar f_plus1{};
};
using NvLevels = NvLevelsT<double>;

template <typename Scalar>
struct TransitionPairT {
  Scalar f_minus1{};
  Scalar f_plus1{};

  Scalar dq_difference() const { return f_plus1 - f_minus1; }
};
using TransitionPair = TransitionPairT<double>;

/// H/h in hertz for the NV ground state with the given field and strain.
///
/// Off-diagonal terms use M_perp = -(M_x + i M_y) and
/// B_perp = (B_x + i B_y)/sqrt(2).
template <typename Scalar = double>
Matrix3c<Scalar> build_nv_hamiltonian(const FieldVector& b, const StrainParams& m,
                                      const NvConstants& c = {}) {
  validate(b);
  validate(m, c);
  using Complex = std::complex<Scalar>;
  const Scalar gamma = static_cast<Scalar>(c.gyromagnetic_hz_per_t);
  const Scalar d = static_cast<Scalar>(c.zero_field_splitting_hz);
  const Complex b_perp =
      Complex(static_cast<Scalar>(b.bx), static_cast<Scalar>(b.by)) / std::sqrt(Scalar(2));
  const Complex m_perp = -Complex(static_cast<Scalar>(m.mx), static_cast<Scalar>(m.my));
  const Scalar zeeman_z = gamma * static_cast<Scalar>(b.bz);
  const Scalar diag = d + static_cast<Scalar>(m.mz);

  Matrix3c<Scalar> h;
  h << Complex(diag + zeeman_z), gamma * std::conj(b_perp), m_perp,
       gamma * b_perp, Complex(0), gamma * std::conj(b_perp),
       std::conj(m_perp), gamma * b_perp, Complex(diag - zeeman_z);
  return h;
}

/// Exact eigenlevels of an NV Hamiltonian, labeled by maximum overlap with the
/// Zeeman states. |0> is assigned first; of the remaining two eigenvectors the
/// one with larger |<+1|v>|^2 becomes |+1>. When those overlaps tie (B_z = 0
/// with nonzero M_perp) the upper level is labeled |+1>.
template <typename Scalar = double>
NvLevelsT<Scalar> nv_levels_exact(const Matrix3c<Scalar>& h) {
  Eigen::SelfAdjointEigenSolver<Matrix3c<Scalar>> solver(h);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("nv_levels_exact: eigensolver failed");
  }
  const auto& values = solver.eigenvalues();  // ascending
  const auto& vectors = solver.eigenvectors();

  int zero_index = 0;
  for (int k = 1; k < 3; ++k) {
    if (std::norm(vectors(kZero, k)) > std::norm(vectors(kZero, zero_index))) zero_index = k;
  }
  std::array<int, 2> rest{};
  for (int k = 0, j = 0; k < 3; ++k) {
    if (k != zero_index) rest[j++] = k;
  }
  // rest[0] < rest[1], so rest[1] is the upper level
  const Scalar w0 = std::norm(vectors(kPlusOne, rest[0]));
  const Scalar w1 = std::norm(vectors(kPlusOne, rest[1]));
  const Scalar tie_tol = Scalar(64) * Eigen::NumTraits<Scalar>::epsilon();
  int plus_index = rest[1];
  int minus_index = rest[0];
  if (w0 > w1 + tie_tol) {
    plus_index = rest[0];
    minus_index = rest[1];
  }

  NvLevelsT<Scalar> levels;
  levels.e_0 = values(zero_index);
  levels.e_plus1 = values(plus_index);
  levels.e_minus1 = values(minus_index);
  levels.f_plus1 = levels.e_plus1 - levels.e_0;
  levels.f_minus1 = levels.e_minus1 - levels.e_0;
  return levels;
}

namespace detail {
template <typename Scalar>
Scalar sign_nonneg(Scalar x) {
  return x < Scalar(0) ? Scalar(-1) : Scalar(1);
}
}  // namespace detail

/// Closed-form transitions for B_perp = 0 with strain:
/// f_{±1} = D + M_z ± sgn(B_z) sqrt((γB_z)^2 + |M_perp|^2).
/// The sign follows the labeling of nv_levels_exact (sgn(0) = +1).
template <typename Scalar = double>
TransitionPairT<Scalar> nv_transitions_strain(double bz, const StrainParams& m,
                                              const NvConstants& c = {}) {
  validate(FieldVector{0.0, 0.0, bz});
  validate(m, c);
  const Scalar zeeman = static_cast<Scalar>(c.gyromagnetic_hz_per_t) * static_cast<Scalar>(bz);
  const Scalar mx = m.mx, my = m.my;
  const Scalar split = detail::sign_nonneg(zeeman) * std::sqrt(zeeman * zeeman + mx * mx + my * my);
  const Scalar center = static_cast<Scalar>(c.zero_field_splitting_hz) + static_cast<Scalar>(m.mz);
  return {center - split, center + split};
}

/// Second-order expansion of nv_transitions_strain in |M_perp|/(γB_z).
/// Requires B_z != 0.
template <typename Scalar = double>
TransitionPairT<Scalar> nv_transitions_strain_expansion(double bz, const StrainParams& m,
                                                        const NvConstants& c = {}) {
  validate(FieldVector{0.0, 0.0, bz});
  validate(m, c);
  if (bz == 0.0) throw OutOfRegimeError("strain expansion requires nonzero B_z");
  const Scalar zeeman = static_cast<Scalar>(c.gyromagnetic_hz_per_t) * static_cast<Scalar>(bz);
  const Scalar mx = m.mx, my = m.my;
  const Scalar split = zeeman + (mx * mx + my * my) / (Scalar(2) * zeeman);
  const Scalar center = static_cast<Scalar>(c.zero_field_splitting_hz) + static_cast<Scalar>(m.mz);
  return {center - split, center + split};
}

namespace detail {
inline void check_offaxis_regime(double bz, double b_perp, const NvConstants& c) {
  validate(FieldVector{b_perp, 0.0, bz});
  const double d = c.zero_field_splitting_hz;
  if (c.gyromagnetic_hz_per_t * std::abs(b_perp) >= 0.1 * d) {
    throw OutOfRegimeError("off-axis perturbation theory requires γ|B_perp| << D");
  }
  if (c.gyromagnetic_hz_per_t * std::abs(bz) >= 0.5 * d) {
    throw OutOfRegimeError("off-axis perturbation theory requires γ|B_z| well below D");
  }
}
}  // namespace detail

/// Common-mode second-order form f_{±1} ≈ D + 3|γB_perp|^2/D ± γB_z, with
/// |γB_perp|^2 = γ^2 (B_x^2 + B_y^2)/2. The B_perp shift is identical on both
/// transitions. Throws OutOfRegimeError when γ|B_perp| >= 0.1 D.
template <typename Scalar = double>
TransitionPairT<Scalar> nv_transitions_offaxis(double bz, double b_perp, const NvConstants& c = {}) {
  detail::check_offaxis_regime(bz, b_perp, c);
  const Scalar gamma = static_cast<Scalar>(c.gyromagnetic_hz_per_t);
  const Scalar d = static_cast<Scalar>(c.zero_field_splitting_hz);
  const Scalar v2 = gamma * gamma * static_cast<Scalar>(b_perp) * static_cast<Scalar>(b_perp) / Scalar(2);
  const Scalar zeeman = gamma * static_cast<Scalar>(bz);
  const Scalar center = d + Scalar(3) * v2 / d;
  return {center - zeeman, center + zeeman};
}

/// Full second-order perturbation result keeping the D ± γB_z denominators.
/// Odd orders vanish, so its residual against exact diagonalization is
/// quartic in B_perp.
template <typename Scalar = double>
TransitionPairT<Scalar> nv_transitions_offaxis_second_order(double bz, double b_perp,
                                                            const NvConstants& c = {}) {
  detail::check_offaxis_regime(bz, b_perp, c);
  const Scalar gamma = static_cast<Scalar>(c.gyromagnetic_hz_per_t);
  const Scalar d = static_cast<Scalar>(c.zero_field_splitting_hz);
  const Scalar v2 = gamma * gamma * static_cast<Scalar>(b_perp) * static_cast<Scalar>(b_perp) / Scalar(2);
  const Scalar zeeman = gamma * static_cast<Scalar>(bz);
  const Scalar e_plus = d + zeeman + v2 / (d + zeeman);
  const Scalar e_minus = d - zeeman + v2 / (d - zeeman);
  const Scalar e_zero = -(v2 / (d + zeeman) + v2 / (d - zeeman));
  return {e_minus - e_zero, e_plus - e_zero};
}

/// Largest |H - H^†| entry; zero for a Hermitian matrix.
template <typename Derived>
auto hermiticity_defect(const Eigen::MatrixBase<Derived>& h) {
  return (h - h.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace nvd
