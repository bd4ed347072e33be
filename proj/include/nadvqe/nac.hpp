#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "nadvqe/scan.hpp"

namespace nadvqe {

/// (H(R + dR e) - H(R - dR e)) / (2 dR), term by term.
inline PauliSum hamiltonian_derivative(const PauliSum& h_plus, const PauliSum& h_minus, double delta_r) {
  if (h_plus.n_qubits() != h_minus.n_qubits())
    throw Error(ErrorKind::dimension, "displaced Hamiltonians act on different qubit counts");
  if (!(delta_r > 0.0)) throw Error(ErrorKind::range, "displacement must be > 0");
  const double s = 1.0 / (2.0 * delta_r);
  PauliSum d(h_plus.n_qubits());
  for (const auto& t : h_plus.terms()) d.add_raw(s * t.coefficient, t.string);
  for (const auto& t : h_minus.terms()) d.add_raw(-s * t.coefficient, t.string);
  d.canonicalize();
  return d;
}

inline constexpr double default_gap_floor = 1e-5;

/// <psi_p| dH |psi_q> / (E_q - E_p).
inline double nac_component(const Statevector& psi_p, const Statevector& psi_q, const PauliSum& dh, double e_p,
                            double e_q, double gap_floor = default_gap_floor,
                            const std::optional<GeometryTag>& tag = std::nullopt) {
  const double gap = e_q - e_p;
  if (std::abs(gap) < gap_floor)
    throw Error(ErrorKind::degenerate_gap, "gap " + format_real(gap) + " below floor" +
                                               (tag ? " at " + describe(*tag) : std::string{}));
  const cplx amp = transition_amplitude(psi_p, dh, psi_q);
  if (std::abs(amp.imag()) > 1e-8 * std::max(1.0, std::abs(amp)))
    throw Error(ErrorKind::numeric, "transition amplitude has imaginary part " + format_real(amp.imag()));
  return amp.real() / gap;
}

/// Index form; p == q is a contract violation (diagonal couplings are not NACs).
inline double nac_component(const EigenstateSet& set, std::size_t p, std::size_t q, const PauliSum& dh,
                            double gap_floor = default_gap_floor,
                            const std::optional<GeometryTag>& tag = std::nullopt) {
  if (p == q) throw Error(ErrorKind::misuse, "nac_component needs two distinct states");
  if (p >= set.states.size() || q >= set.states.size()) throw Error(ErrorKind::range, "state index out of range");
  return nac_component(set.states[p], set.states[q], dh, set.energies[p], set.energies[q], gap_floor, tag);
}

/// Cartesian components d/dY1, d/dZ1, d/dY2, d/dZ2 (O at the origin, C2v axis along z).
struct CartesianNac {
  std::array<double, 4> c{};
  double y1() const { return c[0]; }
  double z1() const { return c[1]; }
  double y2() const { return c[2]; }
  double z2() const { return c[3]; }
};

struct InternalNac {
  GeometryTag tag;
  double f_r = 0.0, f_theta = 0.0;
  double f_r1 = 0.0, f_r2 = 0.0, f_theta1 = 0.0, f_theta2 = 0.0;
  double residual_r = 0.0, residual_theta = 0.0;
  bool symmetry_warning = false;
  bool masked = false;
  CartesianNac cartesian;
  double gap = 0.0;
};

inline constexpr double default_symmetry_tolerance = 1e-3;

/// Per-atom stretch and bend components, then their average. The two atoms
/// agree for C2v-symmetric data; the disagreement is kept as a residual.
inline InternalNac cartesian_to_internal(const CartesianNac& cn, double theta,
                                         double tolerance = default_symmetry_tolerance) {
  if (!(theta > 0.0 && theta < 3.14159265358979323846))
    throw Error(ErrorKind::range, "bond angle " + format_real(theta) + " outside (0, pi)");
  const double s = std::sin(0.5 * theta), c = std::cos(0.5 * theta);
  InternalNac n;
  n.cartesian = cn;
  n.f_r1 = -cn.y1() * s - cn.z1() * c;
  n.f_r2 = cn.y2() * s - cn.z2() * c;
  n.f_theta1 = -cn.y1() * c + cn.z1() * s;
  n.f_theta2 = cn.y2() * c + cn.z2() * s;
  n.f_r = 0.5 * (n.f_r1 + n.f_r2);
  n.f_theta = 0.5 * (n.f_theta1 + n.f_theta2);
  n.residual_r = std::abs(n.f_r1 - n.f_r2);
  n.residual_theta = std::abs(n.f_theta1 - n.f_theta2);
  n.symmetry_warning = std::max(n.residual_r, n.residual_theta) > 10.0 * tolerance;
  return n;
}

inline void flip_sign(InternalNac& n) {
  n.f_r = -n.f_r;
  n.f_theta = -n.f_theta;
  n.f_r1 = -n.f_r1;
  n.f_r2 = -n.f_r2;
  n.f_theta1 = -n.f_theta1;
  n.f_theta2 = -n.f_theta2;
  for (auto& v : n.cartesian.c) v = -v;
}

/// Coarse-grid NAC field, row-major (index = ir * n_theta + it).
struct NacField {
  std::vector<double> r_axis, theta_axis;
  std::vector<InternalNac> values;

  std::size_t n_r() const { return r_axis.size(); }
  std::size_t n_theta() const { return theta_axis.size(); }
  std::size_t masked_count() const {
    std::size_t k = 0;
    for (const auto& v : values) k += v.masked;
    return k;
  }
};

/// Resolves the per-point sign ambiguity by a breadth-first sweep. Each newly
/// reached point is compared with all of its already-fixed neighbours and
/// flipped when that brings it closer to them. Each connected unmasked region
/// is swept from its first point in row-major order. Returns the flip count.
inline std::size_t fix_sign_continuity(NacField& field) {
  const std::size_t nr = field.n_r(), nt = field.n_theta();
  const std::size_t n = field.values.size();
  if (n != nr * nt) throw Error(ErrorKind::dimension, "NAC field shape does not match its axes");
  if (field.masked_count() == n) throw Error(ErrorKind::empty_field, "every NAC point is masked");
  std::vector<char> fixed(n, 0);
  std::size_t flips = 0;
  auto neighbours = [&](std::size_t k) {
    std::vector<std::size_t> out;
    const std::size_t i = k / nt, j = k % nt;
    if (i > 0) out.push_back(k - nt);
    if (i + 1 < nr) out.push_back(k + nt);
    if (j > 0) out.push_back(k - 1);
    if (j + 1 < nt) out.push_back(k + 1);
    return out;
  };
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (fixed[seed] || field.values[seed].masked) continue;
    fixed[seed] = 1;
    std::deque<std::size_t> queue{seed};
    while (!queue.empty()) {
      const std::size_t k = queue.front();
      queue.pop_front();
      for (std::size_t nb : neighbours(k)) {
        if (fixed[nb] || field.values[nb].masked) continue;
        auto& v = field.values[nb];
        double same = 0.0, opposite = 0.0;
        for (std::size_t m : neighbours(nb)) {
          if (!fixed[m] || field.values[m].masked) continue;
          const auto& w = field.values[m];
          same += std::hypot(w.f_r - v.f_r, w.f_theta - v.f_theta);
          opposite += std::hypot(w.f_r + v.f_r, w.f_theta + v.f_theta);
        }
        if (opposite < same) {
          flip_sign(v);
          ++flips;
        }
        fixed[nb] = 1;
        queue.push_back(nb);
      }
    }
  }
  return flips;
}

struct NacOptions {
  std::size_t lower = 1;  ///< state index of the lower adiabat (A)
  std::size_t upper = 2;  ///< state index of the upper adiabat (B)
  double gap_floor = default_gap_floor;
  double symmetry_tolerance = default_symmetry_tolerance;
};

/// NAC <psi_lower| d/dR |psi_upper> at every grid point from the displaced
/// Hamiltonians and the centre-geometry SSVQE states.
inline NacField compute_nac_grid(const Manifest& m, const ScanResult& scan, const SsvqeConfig& cfg,
                                 const NacOptions& opt = {}, std::size_t workers = 1) {
  if (scan.points.size() != m.points.size())
    throw Error(ErrorKind::alignment, "energy results do not match the manifest grid");
  NacField field;
  field.r_axis = m.r_axis;
  field.theta_axis = m.theta_axis;
  field.values.resize(m.points.size());
  parallel_for(m.points.size(), workers, [&](std::size_t i) {
    const auto& p = m.points[i];
    const auto& g = scan.points[i];
    if (std::abs(g.geometry.r - p.tag.r) > 1e-9 || std::abs(g.geometry.theta - p.tag.theta) > 1e-9)
      throw Error(ErrorKind::alignment, "energy row " + describe(g.geometry) + " vs manifest " + describe(p.tag));
    if (!p.has_displacements()) throw Error(ErrorKind::schema, "no displaced geometries at " + describe(p.tag));
    const auto states = eigenstates_from_parameters(cfg, g);
    const double gap = g.energies[opt.upper] - g.energies[opt.lower];
    CartesianNac cn;
    bool masked = !g.converged;
    for (std::size_t k = 0; k < 4 && !masked; ++k) {
      const auto& lab = cartesian_labels[k];
      const auto hp = load_qubit_hamiltonian(p.displaced.at(lab + "+"), p.tag);
      const auto hm = load_qubit_hamiltonian(p.displaced.at(lab + "-"), p.tag);
      const auto dh = hamiltonian_derivative(hp, hm, m.delta_r);
      try {
        cn.c[k] = nac_component(states, opt.lower, opt.upper, dh, opt.gap_floor, p.tag);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::degenerate_gap) throw;
        masked = true;
      }
    }
    InternalNac n = masked ? InternalNac{} : cartesian_to_internal(cn, p.tag.theta, opt.symmetry_tolerance);
    n.tag = p.tag;
    n.masked = masked;
    n.gap = gap;
    field.values[i] = n;
  });
  return field;
}

// NAC table: r theta F_r F_theta residual_r residual_theta mask warning gap dY1 dZ1 dY2 dZ2

inline Table nac_table(const NacField& f, const std::vector<std::string>& provenance) {
  Table t;
  t.kind = "nac";
  t.header = provenance;
  t.header.push_back("grid: " + std::to_string(f.n_r()) + " " + std::to_string(f.n_theta()));
  t.header.push_back("columns: r theta F_r F_theta residual_r residual_theta mask warning gap dY1 dZ1 dY2 dZ2");
  for (const auto& v : f.values)
    t.rows.push_back({v.tag.r, v.tag.theta, v.f_r, v.f_theta, v.residual_r, v.residual_theta, v.masked ? 1.0 : 0.0,
                      v.symmetry_warning ? 1.0 : 0.0, v.gap, v.cartesian.c[0], v.cartesian.c[1], v.cartesian.c[2],
                      v.cartesian.c[3]});
  return t;
}

inline NacField nac_from_table(const Table& t) {
  NacField f;
  std::vector<double> rs, ts;
  for (const auto& row : t.rows) {
    if (row.size() != 13) throw Error(ErrorKind::format, "NAC table rows need 13 columns");
    InternalNac n;
    n.tag = {row[0], row[1]};
    n.f_r = row[2];
    n.f_theta = row[3];
    n.residual_r = row[4];
    n.residual_theta = row[5];
    n.masked = row[6] != 0.0;
    n.symmetry_warning = row[7] != 0.0;
    n.gap = row[8];
    for (std::size_t k = 0; k < 4; ++k) n.cartesian.c[k] = row[9 + k];
    rs.push_back(n.tag.r);
    ts.push_back(n.tag.theta);
    f.values.push_back(n);
  }
  f.r_axis = detail::distinct_sorted(rs, 1e-9);
  f.theta_axis = detail::distinct_sorted(ts, 1e-9);
  if (f.values.size() != f.n_r() * f.n_theta())
    throw Error(ErrorKind::format, "NAC table does not cover a rectangular grid");
  return f;
}

}  // namespace nadvqe
