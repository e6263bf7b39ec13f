#include "nvdephase/p1_spectrum.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace nvd {

namespace {

using Complex = std::complex<double>;

struct SpinOperators {
  Eigen::MatrixXcd x, y, z;
};

// Spin-s matrices with projections in descending order.
SpinOperators spin_operators(double s) {
  const int dim = static_cast<int>(2.0 * s + 1.0 + 0.5);
  Eigen::MatrixXcd raise = Eigen::MatrixXcd::Zero(dim, dim);
  Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const double m = s - i;
    z(i, i) = m;
    if (i > 0) raise(i - 1, i) = std::sqrt(s * (s + 1.0) - m * (m + 1.0));
  }
  SpinOperators ops;
  ops.x = (raise + raise.adjoint()) / 2.0;
  ops.y = (raise - raise.adjoint()) / Complex(0.0, 2.0);
  ops.z = z;
  return ops;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

struct ProductOperators {
  std::array<Eigen::MatrixXcd, 3> s;  // electron ⊗ 1
  std::array<Eigen::MatrixXcd, 3> i;  // 1 ⊗ nuclear
};

ProductOperators product_operators(const NitrogenSpecies& species) {
  const SpinOperators es = spin_operators(species.electron_spin);
  const SpinOperators ns = spin_operators(species.nuclear_spin);
  const Eigen::MatrixXcd e_id = Eigen::MatrixXcd::Identity(es.z.rows(), es.z.cols());
  const Eigen::MatrixXcd n_id = Eigen::MatrixXcd::Identity(ns.z.rows(), ns.z.cols());
  ProductOperators p;
  p.s = {kron(es.x, n_id), kron(es.y, n_id), kron(es.z, n_id)};
  p.i = {kron(e_id, ns.x), kron(e_id, ns.y), kron(e_id, ns.z)};
  return p;
}

Eigen::MatrixXcd along(const std::array<Eigen::MatrixXcd, 3>& ops, const Eigen::Vector3d& n) {
  return n.x() * ops[0] + n.y() * ops[1] + n.z() * ops[2];
}

double expectation(const Eigen::MatrixXcd& op, const Eigen::VectorXcd& v) {
  return (v.adjoint() * op * v)(0, 0).real();
}

std::string format_m(double m) {
  std::ostringstream out;
  const double twice = std::round(2.0 * m);
  if (std::abs(twice - 2.0 * std::round(m)) < 1e-9) {
    out << (m > 0 ? "+" : "") << std::lround(m);
  } else {
    out << (twice > 0 ? "+" : "-") << std::lround(std::abs(twice)) << "/2";
  }
  return out.str();
}

double round_half(double m) { return std::round(2.0 * m) / 2.0; }

}  // namespace

NitrogenSpecies NitrogenSpecies::n14() {
  NitrogenSpecies s;
  s.isotope = NitrogenIsotope::N14;
  s.nuclear_spin = 1.0;
  s.g = 2.0025;
  s.a_par_hz = 114.0e6;
  s.a_perp_hz = 81.3e6;
  s.p_par_hz = -3.97e6;
  return s;
}

NitrogenSpecies NitrogenSpecies::n15() {
  NitrogenSpecies s;
  s.isotope = NitrogenIsotope::N15;
  s.nuclear_spin = 0.5;
  s.g = 2.0025;
  s.a_par_hz = -159.7e6;
  s.a_perp_hz = -113.83e6;
  s.p_par_hz = 0.0;
  return s;
}

void validate(const NitrogenSpecies& species) {
  if (species.electron_spin != 0.5) {
    throw std::invalid_argument("nitrogen electron spin must be 1/2");
  }
  if (species.isotope == NitrogenIsotope::N14 && species.nuclear_spin != 1.0) {
    throw std::invalid_argument("14N requires nuclear spin 1");
  }
  if (species.isotope == NitrogenIsotope::N15) {
    if (species.nuclear_spin != 0.5) throw std::invalid_argument("15N requires nuclear spin 1/2");
    if (species.p_par_hz != 0.0) throw std::invalid_argument("15N has no quadrupole term");
  }
  if (!std::isfinite(species.g) || !std::isfinite(species.a_par_hz) ||
      !std::isfinite(species.a_perp_hz) || !std::isfinite(species.p_par_hz)) {
    throw std::invalid_argument("nitrogen parameters must be finite");
  }
}

std::string to_string(NitrogenIsotope isotope) {
  return isotope == NitrogenIsotope::N14 ? "N14" : "N15";
}

Eigen::Vector3d jahn_teller_axis(int index) {
  if (index < 0 || index >= kJahnTellerAxes) {
    throw std::invalid_argument("Jahn-Teller axis index must be in 0..3");
  }
  if (index == 0) return Eigen::Vector3d::UnitZ();
  const double polar = std::acos(-1.0 / 3.0);
  const double azimuth = (index - 1) * constants::two_pi / 3.0;
  return {std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth), std::cos(polar)};
}

Eigen::Matrix3d jahn_teller_frame(int index) {
  const Eigen::Vector3d n = jahn_teller_axis(index);
  const Eigen::Vector3d z = Eigen::Vector3d::UnitZ();
  const Eigen::Vector3d v = n.cross(z);
  const double c = n.dot(z);
  if (v.norm() < 1e-15) return Eigen::Matrix3d::Identity();
  Eigen::Matrix3d vx;
  vx << 0.0, -v.z(), v.y(),
        v.z(), 0.0, -v.x(),
        -v.y(), v.x(), 0.0;
  return Eigen::Matrix3d::Identity() + vx + vx * vx / (1.0 + c);
}

Eigen::MatrixXcd build_p1_hamiltonian(const FieldVector& b, const NitrogenSpecies& species,
                                      int jt_axis) {
  validate(b);
  validate(species);
  const Eigen::Vector3d field = jahn_teller_frame(jt_axis) * Eigen::Vector3d(b.bx, b.by, b.bz);
  const ProductOperators op = product_operators(species);
  const double zeeman = species.g * constants::bohr_magneton_hz_per_t;
  const double ii = species.nuclear_spin * (species.nuclear_spin + 1.0);
  const Eigen::Index dim = op.s[2].rows();

  Eigen::MatrixXcd h = zeeman * along(op.s, field);
  h += species.a_par_hz * op.s[2] * op.i[2];
  h += species.a_perp_hz * (op.s[0] * op.i[0] + op.s[1] * op.i[1]);
  h += species.p_par_hz * (op.i[2] * op.i[2] - (ii / 3.0) * Eigen::MatrixXcd::Identity(dim, dim));
  return h;
}

std::vector<SpectralLine> p1_lines(const FieldVector& b, const NitrogenSpecies& species,
                                   double forbidden_amplitude) {
  validate(b);
  validate(species);
  if (b.norm() == 0.0) throw std::invalid_argument("P1 line assignment needs a nonzero field");
  if (!(forbidden_amplitude >= 0.0)) throw std::invalid_argument("forbidden amplitude must be >= 0");

  const ProductOperators op = product_operators(species);
  const int dim = species.dimension();
  const int half = dim / 2;
  std::vector<SpectralLine> lines;

  for (int axis = 0; axis < kJahnTellerAxes; ++axis) {
    const Eigen::Matrix3d frame = jahn_teller_frame(axis);
    const Eigen::Vector3d b_hat = (frame * Eigen::Vector3d(b.bx, b.by, b.bz)).normalized();
    // nuclear quantization axis set by the hyperfine field of an electron along b_hat
    Eigen::Vector3d n_hat(species.a_perp_hz * b_hat.x(), species.a_perp_hz * b_hat.y(),
                          species.a_par_hz * b_hat.z());
    n_hat.normalize();
    Eigen::Vector3d t1 = b_hat.cross(std::abs(b_hat.x()) < 0.9 ? Eigen::Vector3d::UnitX()
                                                              : Eigen::Vector3d::UnitY());
    t1.normalize();
    const Eigen::Vector3d t2 = b_hat.cross(t1);

    const Eigen::MatrixXcd s_par = along(op.s, b_hat);
    const Eigen::MatrixXcd s_t1 = along(op.s, t1);
    const Eigen::MatrixXcd s_t2 = along(op.s, t2);
    const Eigen::MatrixXcd i_n = along(op.i, n_hat);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(build_p1_hamiltonian(b, species, axis));
    const Eigen::VectorXd& energy = solver.eigenvalues();
    const Eigen::MatrixXcd& vec = solver.eigenvectors();

    std::vector<int> order(dim);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> ms(dim), mi(dim);
    for (int k = 0; k < dim; ++k) {
      ms[k] = expectation(s_par, vec.col(k));
      mi[k] = expectation(i_n, vec.col(k));
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int c) { return ms[a] > ms[c]; });
    const std::vector<int> up(order.begin(), order.begin() + half);
    const std::vector<int> down(order.begin() + half, order.end());

    Eigen::MatrixXd strength(half, half);
    for (int u = 0; u < half; ++u) {
      for (int d = 0; d < half; ++d) {
        const Complex a1 = (vec.col(up[u]).adjoint() * s_t1 * vec.col(down[d]))(0, 0);
        const Complex a2 = (vec.col(up[u]).adjoint() * s_t2 * vec.col(down[d]))(0, 0);
        strength(u, d) = std::norm(a1) + std::norm(a2);
      }
    }

    // allowed set: the up/down pairing with the largest total strength
    std::vector<int> perm(half);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best = perm;
    double best_total = -1.0;
    do {
      double total = 0.0;
      for (int d = 0; d < half; ++d) total += strength(perm[d], d);
      if (total > best_total + 1e-14) {
        best_total = total;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));

    for (int d = 0; d < half; ++d) {
      for (int u = 0; u < half; ++u) {
        const bool allowed = best[d] == u;
        const double m_lower = round_half(mi[down[d]]);
        const double m_upper = round_half(mi[up[u]]);
        if (!allowed && std::abs(std::abs(m_upper - m_lower) - 1.0) > 1e-9) continue;
        SpectralLine line;
        line.frequency_hz = std::abs(energy(up[u]) - energy(down[d]));
        line.allowed = allowed;
        line.relative_amplitude = allowed ? 1.0 : forbidden_amplitude;
        line.orientation = axis;
        line.m_i_lower = m_lower;
        line.m_i_upper = m_upper;
        line.transition_strength = strength(u, d);
        line.label = "jt" + std::to_string(axis) + ":mI=" + format_m(m_lower);
        if (!allowed) line.label += "->" + format_m(m_upper);
        lines.push_back(std::move(line));
      }
    }
  }
  std::stable_sort(lines.begin(), lines.end(), [](const SpectralLine& a, const SpectralLine& c) {
    return a.frequency_hz < c.frequency_hz;
  });
  return lines;
}

FieldVector tilted_field(double b0, double misalignment_deg, double azimuth_deg) {
  const double tilt = misalignment_deg * constants::pi / 180.0;
  const double phi = azimuth_deg * constants::pi / 180.0;
  return {b0 * std::sin(tilt) * std::cos(phi), b0 * std::sin(tilt) * std::sin(phi),
          b0 * std::cos(tilt)};
}

DeerSpectrum p1_deer_spectrum(double b0, double misalignment_deg, const NitrogenSpecies& species,
                              double hwhm_hz, const DeerOptions& options) {
  if (!(hwhm_hz > 0.0)) throw std::invalid_argument("Lorentzian half width must be positive");
  if (options.points < 2 || !(options.f_max_hz > options.f_min_hz)) {
    throw std::invalid_argument("spectrum grid needs >= 2 points and f_max > f_min");
  }
  DeerSpectrum out;
  out.lines = p1_lines(tilted_field(b0, misalignment_deg, options.tilt_azimuth_deg), species,
                       options.forbidden_amplitude);
  out.frequency_hz = Eigen::VectorXd::LinSpaced(options.points, options.f_min_hz, options.f_max_hz);
  out.amplitude = Eigen::VectorXd::Zero(options.points);
  const double w2 = hwhm_hz * hwhm_hz;
  for (const auto& line : out.lines) {
    if (line.relative_amplitude == 0.0) continue;
    out.amplitude.array() +=
        line.relative_amplitude * w2 / ((out.frequency_hz.array() - line.frequency_hz).square() + w2);
  }
  return out;
}

std::vector<LineGroup> group_allowed_lines(const std::vector<SpectralLine>& lines, double gap_hz) {
  std::vector<SpectralLine> allowed;
  std::copy_if(lines.begin(), lines.end(), std::back_inserter(allowed),
               [](const SpectralLine& l) { return l.allowed; });
  std::stable_sort(allowed.begin(), allowed.end(), [](const SpectralLine& a, const SpectralLine& b) {
    return a.frequency_hz < b.frequency_hz;
  });
  std::vector<LineGroup> groups;
  for (const auto& line : allowed) {
    if (groups.empty() || line.frequency_hz - groups.back().max_hz > gap_hz) {
      LineGroup g;
      g.min_hz = line.frequency_hz;
      groups.push_back(g);
    }
    LineGroup& g = groups.back();
    g.max_hz = line.frequency_hz;
    g.weight += line.relative_amplitude;
    g.lines.push_back(line);
  }
  for (auto& g : groups) {
    double num = 0.0;
    for (const auto& l : g.lines) num += l.relative_amplitude * l.frequency_hz;
    g.center_hz = g.weight > 0.0 ? num / g.weight : 0.5 * (g.min_hz + g.max_hz);
  }
  return groups;
}

std::vector<int> group_pattern(const LineGroup& group, double resolution_hz) {
  std::vector<int> pattern;
  double last = 0.0;
  for (const auto& line : group.lines) {
    if (pattern.empty() || line.frequency_hz - last > resolution_hz) pattern.push_back(0);
    ++pattern.back();
    last = line.frequency_hz;
  }
  return pattern;
}

}  // namespace nvd
