#pragma once

// Independent oracles: Hamiltonians assembled from spin operators in their
// textbook operator form, diagonalized directly.

#include <Eigen/Dense>

#include <complex>
#include <utility>

#include "nvdephase/p1_spectrum.hpp"
#include "nvdephase/spin_models.hpp"

namespace nvd::oracle {

using LD = long double;
using CLD = std::complex<LD>;
using M3 = Eigen::Matrix<CLD, 3, 3>;

// Spin-1 operators in the |+1>, |0>, |-1> basis.
struct Spin1 {
  M3 sx, sy, sz;
  Spin1() {
    const LD r = 1.0L / std::sqrt(2.0L);
    const CLD i(0, 1);
    sx << 0, r, 0, r, 0, r, 0, r, 0;
    sy << 0, -i * r, 0, i * r, 0, -i * r, 0, i * r, 0;
    sz << 1, 0, 0, 0, 0, 0, 0, 0, -1;
  }
};

// Operator form of the NV Hamiltonian, built without the library.
inline M3 operator_hamiltonian(const FieldVector& b, const StrainParams& m, const NvConstants& c = {}) {
  const Spin1 s;
  const LD g = c.gyromagnetic_hz_per_t;
  const M3 sz2 = s.sz * s.sz;
  const M3 sx2_minus_sy2 = s.sx * s.sx - s.sy * s.sy;
  const M3 sxsy = s.sx * s.sy + s.sy * s.sx;
  return (LD(c.zero_field_splitting_hz) + LD(m.mz)) * sz2 + g * (LD(b.bx) * s.sx + LD(b.by) * s.sy + LD(b.bz) * s.sz) -
         LD(m.mx) * sx2_minus_sy2 + LD(m.my) * sxsy;
}

inline Eigen::Matrix<LD, 3, 1> oracle_eigenvalues(const FieldVector& b, const StrainParams& m) {
  Eigen::SelfAdjointEigenSolver<M3> solver(operator_hamiltonian(b, m));
  return solver.eigenvalues();
}

// Oracle transition frequencies from the operator form in long double,
// labeled by overlap with the Zeeman states.
inline std::pair<LD, LD> oracle_transitions(const FieldVector& b, const StrainParams& m) {
  Eigen::SelfAdjointEigenSolver<M3> solver(operator_hamiltonian(b, m));
  const auto& v = solver.eigenvectors();
  const auto& e = solver.eigenvalues();
  int zero = 0, plus = 0;
  for (int k = 1; k < 3; ++k) {
    if (std::norm(v(1, k)) > std::norm(v(1, zero))) zero = k;
  }
  LD best = -1;
  for (int k = 0; k < 3; ++k) {
    if (k != zero && std::norm(v(0, k)) > best) {
      best = std::norm(v(0, k));
      plus = k;
    }
  }
  const int minus = 3 - zero - plus;
  return {e(minus) - e(zero), e(plus) - e(zero)};
}

using CM = Eigen::MatrixXcd;

inline CM spin_operator(int which, int dim) {
  // spin-j operators for dim = 2j+1, descending m
  const double j = (dim - 1) / 2.0;
  CM op = CM::Zero(dim, dim);
  for (int a = 0; a < dim; ++a) {
    const double m = j - a;
    if (which == 2) op(a, a) = m;
    if (a + 1 < dim) {
      const double mm = m - 1;  // state a+1
      const double c = std::sqrt(j * (j + 1) - m * mm);
      // S+ |mm> = c |m>
      if (which == 0) {
        op(a, a + 1) = c / 2.0;
        op(a + 1, a) = c / 2.0;
      } else if (which == 1) {
        op(a, a + 1) = std::complex<double>(0, -c / 2.0);
        op(a + 1, a) = std::complex<double>(0, c / 2.0);
      }
    }
  }
  return op;
}

inline CM kron(const CM& a, const CM& b) {
  CM out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Axially symmetric P1 Hamiltonian written in its own frame: the spectrum
// depends only on the field components along and across the axis.
inline Eigen::VectorXd oracle_levels(double b_par, double b_perp, const NitrogenSpecies& sp) {
  const int ni = sp.nuclear_dimension();
  const CM id_s = CM::Identity(2, 2), id_i = CM::Identity(ni, ni);
  CM s[3], i[3];
  for (int k = 0; k < 3; ++k) {
    s[k] = kron(spin_operator(k, 2), id_i);
    i[k] = kron(id_s, spin_operator(k, ni));
  }
  const double mu = sp.g * constants::bohr_magneton_hz_per_t;
  const double ii = (ni - 1) / 2.0;
  CM h = mu * (b_perp * s[0] + b_par * s[2]) + sp.a_par_hz * s[2] * i[2] +
         sp.a_perp_hz * (s[0] * i[0] + s[1] * i[1]) +
         sp.p_par_hz * (i[2] * i[2] - ii * (ii + 1) / 3.0 * CM::Identity(2 * ni, 2 * ni));
  Eigen::SelfAdjointEigenSolver<CM> solver(h);
  return solver.eigenvalues();
}

}  // namespace nvd::oracle
