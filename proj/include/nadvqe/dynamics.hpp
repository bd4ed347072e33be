#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "nadvqe/grid.hpp"
#include "nadvqe/io.hpp"
#include "nadvqe/surfaces.hpp"

namespace nadvqe {

using cplx = std::complex<double>;

inline constexpr double au_per_fs = 41.341373335;

struct MassParams {
  double m = 1837.15;

  static MassParams hydrogen() { return {1837.15}; }
  static MassParams deuterium() { return {3671.48}; }
  void validate() const {
    if (!(m > 0.0)) throw Error(ErrorKind::schema, "nuclear mass must be > 0");
  }
};

/// Quadratic imaginary absorber -i eta ((x - x_cap)/w)^2 past x_cap = x_max - w,
/// on the theta_max edge and, with its own width, on the r_max edge.
struct CapSpec {
  bool enabled = true;
  double eta = 0.05;
  double width = 0.15;
  double r_width = 0.15;

  void validate(const GridSpec& g) const {
    if (!enabled) return;
    if (!(eta > 0.0) || !(width > 0.0) || !(r_width >= 0.0)) throw Error(ErrorKind::schema, "CAP strength and width must be > 0");
    if (!(g.theta_max - width > g.theta_min)) throw Error(ErrorKind::schema, "CAP onset lies below theta_min");
    if (!(g.r_max - r_width > g.r_min)) throw Error(ErrorKind::schema, "r CAP onset lies below r_min");
  }

  std::vector<double> potential(const GridSpec& g) const {
    std::vector<double> w(g.size(), 0.0);
    if (!enabled) return w;
    const double t_cap = g.theta_max - width, r_cap = g.r_max - r_width;
    for (std::size_t i = 0; i < g.n_r; ++i)
      for (std::size_t j = 0; j < g.n_theta; ++j) {
        double v = 0.0;
        const double t = g.theta(j), r = g.r(i);
        if (t > t_cap) v += eta * std::pow((t - t_cap) / width, 2);
        if (r_width > 0.0 && r > r_cap) v += eta * std::pow((r - r_cap) / r_width, 2);
        w[g.index(i, j)] = v;
      }
    return w;
  }
};

/// Two-surface field (B, A) on the grid plus absorbed-norm tallies.
struct Wavepacket {
  std::vector<cplx> b, a;
  double t = 0.0;
  double absorbed_b = 0.0, absorbed_a = 0.0;
};

/// Discretized coupled Hamiltonian. Kinetic and first-derivative coupling use
/// central differences with zero values outside the grid. The coupling
/// -(1/M)(F d + d F) in each direction (the same as 2F d + dF) is discretized in
/// skew-symmetric form, so the operator without the absorber is exactly hermitian.
/// `shift` is subtracted from the diagonal; it only changes the global phase.
class CoupledHamiltonian {
 public:
  CoupledHamiltonian(const FineSurfaces& fs, const MassParams& mass, const CapSpec& cap)
      : grid_(fs.grid), mass_(mass), vb_(fs.e_b), va_(fs.e_a), fr_(fs.f_r), ft_(fs.f_theta) {
    grid_.validate();
    mass_.validate();
    cap.validate(grid_);
    for (const auto* f : {&vb_, &va_, &fr_, &ft_})
      if (f->size() != grid_.size()) throw Error(ErrorKind::dimension, "surface field does not match the grid");
    w_ = cap.potential(grid_);
    has_cap_ = cap.enabled;
    cr_ = 1.0 / (mass_.m * grid_.dr() * grid_.dr());
    ct_.resize(grid_.n_r);
    cc_.resize(grid_.n_r);
    for (std::size_t i = 0; i < grid_.n_r; ++i) {
      const double r = grid_.r(i);
      ct_[i] = 1.0 / (mass_.m * r * r * grid_.dtheta() * grid_.dtheta());
      cc_[i] = 1.0 / (mass_.m * r * r * 2.0 * grid_.dtheta());
    }
  }

  const GridSpec& grid() const { return grid_; }
  const std::vector<double>& absorber() const { return w_; }
  bool has_cap() const { return has_cap_; }
  double shift() const { return shift_; }
  void set_shift(double s) { shift_ = s; }

  /// out = (H_herm - shift) in.
  void apply_hermitian(const Wavepacket& in, std::vector<cplx>& out_b, std::vector<cplx>& out_a) const {
    const std::size_t n = grid_.size();
    out_b.assign(n, cplx{});
    out_a.assign(n, cplx{});
    diagonal_block(in.b, vb_, out_b);
    diagonal_block(in.a, va_, out_a);
    // H_AB = -C[F], H_BA = +C[F] with C the symmetrized derivative coupling.
    coupling(in.b, out_a, -1.0);
    coupling(in.a, out_b, +1.0);
  }

  /// out = (H_herm - shift - i W) in.
  void apply(const Wavepacket& in, std::vector<cplx>& out_b, std::vector<cplx>& out_a) const {
    apply_hermitian(in, out_b, out_a);
    if (!has_cap_) return;
    for (std::size_t k = 0; k < grid_.size(); ++k) {
      out_b[k] -= cplx(0.0, w_[k]) * in.b[k];
      out_a[k] -= cplx(0.0, w_[k]) * in.a[k];
    }
  }

 private:
  void diagonal_block(const std::vector<cplx>& x, const std::vector<double>& v, std::vector<cplx>& y) const {
    const std::size_t nr = grid_.n_r, nt = grid_.n_theta;
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nt; ++j) {
        const std::size_t k = i * nt + j;
        cplx acc = (2.0 * cr_ + 2.0 * ct_[i] + v[k] - shift_) * x[k];
        if (i > 0) acc -= cr_ * x[k - nt];
        if (i + 1 < nr) acc -= cr_ * x[k + nt];
        if (j > 0) acc -= ct_[i] * x[k - 1];
        if (j + 1 < nt) acc -= ct_[i] * x[k + 1];
        y[k] += acc;
      }
  }

  /// y += sign * (1/M)(F_r d_r + d_r F_r) x + sign * (1/(M r^2))(F_t d_t + d_t F_t) x
  void coupling(const std::vector<cplx>& x, std::vector<cplx>& y, double sign) const {
    const std::size_t nr = grid_.n_r, nt = grid_.n_theta;
    const double crr = sign / (mass_.m * 2.0 * grid_.dr());
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nt; ++j) {
        const std::size_t k = i * nt + j;
        cplx acc = 0.0;
        if (i + 1 < nr) acc += crr * (fr_[k] + fr_[k + nt]) * x[k + nt];
        if (i > 0) acc -= crr * (fr_[k] + fr_[k - nt]) * x[k - nt];
        const double ctt = sign * cc_[i];
        if (j + 1 < nt) acc += ctt * (ft_[k] + ft_[k + 1]) * x[k + 1];
        if (j > 0) acc -= ctt * (ft_[k] + ft_[k - 1]) * x[k - 1];
        y[k] += acc;
      }
  }

  GridSpec grid_;
  MassParams mass_;
  std::vector<double> vb_, va_, fr_, ft_, w_;
  std::vector<double> ct_, cc_;
  double cr_ = 0.0;
  double shift_ = 0.0;
  bool has_cap_ = false;
};

inline double norm_squared(const std::vector<cplx>& v, double cell) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return s * cell;
}

inline double cell_area(const GridSpec& g) { return g.dr() * g.dtheta(); }

/// <x| W |x> * cell, the instantaneous absorption rate is twice this.
inline double absorber_expectation(const std::vector<cplx>& x, const std::vector<double>& w, double cell) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += w[k] * std::norm(x[k]);
  return s * cell;
}

// The propagation helpers accept any Op with the CoupledHamiltonian surface:
// grid(), apply(), apply_hermitian(), absorber(), has_cap().

/// Spectral radius of (H_herm - shift) by power iteration from a checkerboard,
/// which overlaps strongly with the highest grid modes. One run starts on B,
/// one on A; each is unchanged by a sign flip of the coupling.
template <class Op>
double spectral_radius(const Op& h, std::size_t iterations = 50) {
  const auto& g = h.grid();
  double best = 0.0;
  for (int surface = 0; surface < 2; ++surface) {
    Wavepacket v;
    v.b.assign(g.size(), cplx{});
    v.a.assign(g.size(), cplx{});
    auto& start = surface == 0 ? v.b : v.a;
    for (std::size_t i = 0; i < g.n_r; ++i)
      for (std::size_t j = 0; j < g.n_theta; ++j) {
        const double s = ((i + j) % 2 == 0) ? 1.0 : -1.0;
        start[g.index(i, j)] = s * (1.0 + 0.1 * std::sin(0.7 * static_cast<double>(i) + 1.3 * static_cast<double>(j)));
      }
    double est = 0.0;
    std::vector<cplx> hb, ha;
    for (std::size_t it = 0; it < iterations; ++it) {
      const double nv = std::sqrt(norm_squared(v.b, 1.0) + norm_squared(v.a, 1.0));
      h.apply_hermitian(v, hb, ha);
      const double nh = std::sqrt(norm_squared(hb, 1.0) + norm_squared(ha, 1.0));
      if (!(nh > 0.0)) break;
      est = nh / nv;
      for (std::size_t k = 0; k < g.size(); ++k) {
        v.b[k] = hb[k] / nh;
        v.a[k] = ha[k] / nh;
      }
    }
    best = std::max(best, est);
  }
  return best;
}

struct Observables {
  double t = 0.0;
  double p_b = 0.0, p_a = 0.0, absorbed_a = 0.0, absorbed_b = 0.0;
  double total() const { return p_b + p_a + absorbed_a + absorbed_b; }
};

inline Observables observables(const Wavepacket& wp, const GridSpec& g) {
  const double cell = cell_area(g);
  return {wp.t, norm_squared(wp.b, cell), norm_squared(wp.a, cell), wp.absorbed_a, wp.absorbed_b};
}

namespace detail {

inline void check_finite(const Wavepacket& wp, std::size_t step, double e_spec) {
  for (std::size_t k = 0; k < wp.b.size(); ++k)
    if (!std::isfinite(wp.b[k].real()) || !std::isfinite(wp.b[k].imag()) || !std::isfinite(wp.a[k].real()) ||
        !std::isfinite(wp.a[k].imag()))
      throw Error(ErrorKind::instability, "non-finite amplitude at step " + std::to_string(step) +
                                               " (spectral radius estimate " + format_real(e_spec) + ")");
}

}  // namespace detail

/// chi(dt) = chi0 - i dt H chi0 - dt^2/2 H^2 chi0 with the full (absorbing)
/// operator. The absorbed tallies take the trapezoid of the absorption rate.
template <class Op>
Wavepacket bootstrap_first_step(const Wavepacket& chi0, double dt, const Op& h) {
  std::vector<cplx> hb, ha, hhb, hha;
  h.apply(chi0, hb, ha);
  Wavepacket tmp{hb, ha, 0.0, 0.0, 0.0};
  h.apply(tmp, hhb, hha);
  Wavepacket out;
  out.t = chi0.t + dt;
  out.b.resize(chi0.b.size());
  out.a.resize(chi0.a.size());
  const cplx c1(0.0, -dt);
  const double c2 = -0.5 * dt * dt;
  for (std::size_t k = 0; k < chi0.b.size(); ++k) {
    out.b[k] = chi0.b[k] + c1 * hb[k] + c2 * hhb[k];
    out.a[k] = chi0.a[k] + c1 * ha[k] + c2 * hha[k];
  }
  out.absorbed_b = chi0.absorbed_b;
  out.absorbed_a = chi0.absorbed_a;
  if (h.has_cap()) {
    const double cell = cell_area(h.grid());
    const auto& w = h.absorber();
    const double adt = std::abs(dt);
    out.absorbed_b += adt * (absorber_expectation(chi0.b, w, cell) + absorber_expectation(out.b, w, cell));
    out.absorbed_a += adt * (absorber_expectation(chi0.a, w, cell) + absorber_expectation(out.a, w, cell));
  }
  return out;
}

/// chi(t+dt) = chi(t-dt) - 2 i dt H chi(t). With an absorber the step is
/// taken as D (D chi(t-dt) - 2 i dt H_herm chi(t)), D = exp(-W |dt|), which
/// keeps the scheme stable; the norm removed by both D factors is credited to
/// the absorbed tallies of the (t-dt) chain.
template <class Op>
Wavepacket step_leapfrog(const Wavepacket& prev, const Wavepacket& curr, double dt, const Op& h) {
  std::vector<cplx> hb, ha;
  h.apply_hermitian(curr, hb, ha);
  Wavepacket next;
  next.t = curr.t + dt;
  next.absorbed_b = prev.absorbed_b;
  next.absorbed_a = prev.absorbed_a;
  const std::size_t n = curr.b.size();
  next.b.resize(n);
  next.a.resize(n);
  const cplx c(0.0, -2.0 * dt);
  if (!h.has_cap()) {
    for (std::size_t k = 0; k < n; ++k) {
      next.b[k] = prev.b[k] + c * hb[k];
      next.a[k] = prev.a[k] + c * ha[k];
    }
    return next;
  }
  const auto& w = h.absorber();
  const double cell = cell_area(h.grid());
  double lost_b = 0.0, lost_a = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double d = std::exp(-w[k] * std::abs(dt));
    const double loss = 1.0 - d * d;
    const cplx qb = d * prev.b[k] + c * hb[k];
    const cplx qa = d * prev.a[k] + c * ha[k];
    lost_b += loss * (std::norm(prev.b[k]) + std::norm(qb));
    lost_a += loss * (std::norm(prev.a[k]) + std::norm(qa));
    next.b[k] = d * qb;
    next.a[k] = d * qa;
  }
  next.absorbed_b += lost_b * cell;
  next.absorbed_a += lost_a * cell;
  return next;
}

/// Physical amplitudes: the propagated field carries exp(+i shift t) relative
/// to the unshifted Hamiltonian.
inline Wavepacket physical_amplitudes(const Wavepacket& wp, double shift) {
  Wavepacket out = wp;
  const cplx ph = std::exp(cplx(0.0, -shift * wp.t));
  for (auto& x : out.b) x *= ph;
  for (auto& x : out.a) x *= ph;
  return out;
}

struct FranckCondon {
  Wavepacket packet;
  double eigenvalue = 0.0;   ///< lowest eigenvalue of T + V_X (hartree)
  double zero_point = 0.0;   ///< eigenvalue minus the grid minimum of V_X
  double residual = 0.0;
  std::size_t iterations = 0;
};

/// Sparse T + V on one surface (real symmetric), row-major grid ordering.
inline Eigen::SparseMatrix<double> single_surface_matrix(const std::vector<double>& v, const GridSpec& g,
                                                         const MassParams& m) {
  const double cr = 1.0 / (m.m * g.dr() * g.dr());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(5 * g.size());
  for (std::size_t i = 0; i < g.n_r; ++i) {
    const double ct = 1.0 / (m.m * g.r(i) * g.r(i) * g.dtheta() * g.dtheta());
    for (std::size_t j = 0; j < g.n_theta; ++j) {
      const auto k = static_cast<int>(g.index(i, j));
      trip.emplace_back(k, k, 2.0 * cr + 2.0 * ct + v[static_cast<std::size_t>(k)]);
      if (i > 0) trip.emplace_back(k, k - static_cast<int>(g.n_theta), -cr);
      if (i + 1 < g.n_r) trip.emplace_back(k, k + static_cast<int>(g.n_theta), -cr);
      if (j > 0) trip.emplace_back(k, k - 1, -ct);
      if (j + 1 < g.n_theta) trip.emplace_back(k, k + 1, -ct);
    }
  }
  Eigen::SparseMatrix<double> h(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(g.size()));
  h.setFromTriplets(trip.begin(), trip.end());
  return h;
}

/// Lowest eigenpair of T + V_ground by shifted inverse iteration; the state is
/// placed on B with A empty (vertical transition).
inline FranckCondon initial_wavepacket(const std::vector<double>& ground, const GridSpec& g, const MassParams& m,
                                       double tolerance = 1e-10, std::size_t max_iterations = 5000) {
  g.validate();
  m.validate();
  if (ground.size() != g.size()) throw Error(ErrorKind::dimension, "ground PES does not match the grid");
  const auto h = single_surface_matrix(ground, g, m);
  double vmin = ground[0];
  for (double x : ground) vmin = std::min(vmin, x);
  Eigen::SparseMatrix<double> shifted = h;
  for (Eigen::Index k = 0; k < shifted.rows(); ++k) shifted.coeffRef(k, k) -= vmin;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(shifted);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::numeric, "factorization of T + V failed");
  Eigen::VectorXd x(static_cast<Eigen::Index>(g.size()));
  // Smooth positive start: the ground state has no nodes.
  for (std::size_t i = 0; i < g.n_r; ++i)
    for (std::size_t j = 0; j < g.n_theta; ++j)
      x[static_cast<Eigen::Index>(g.index(i, j))] =
          std::sin(3.14159265358979 * (static_cast<double>(i) + 1) / static_cast<double>(g.n_r + 1)) *
          std::sin(3.14159265358979 * (static_cast<double>(j) + 1) / static_cast<double>(g.n_theta + 1));
  x.normalize();
  FranckCondon fc;
  double lambda = 0.0, res = 1.0;
  for (fc.iterations = 1; fc.iterations <= max_iterations; ++fc.iterations) {
    x = solver.solve(x);
    x.normalize();
    const Eigen::VectorXd hx = h * x;
    lambda = x.dot(hx);
    res = (hx - lambda * x).norm();
    if (res < tolerance) break;
  }
  fc.residual = res;
  if (!(res < tolerance))
    throw Error(ErrorKind::numeric, "inverse iteration did not converge, residual " + format_real(res));
  if (x.sum() < 0.0) x = -x;
  fc.eigenvalue = lambda;
  fc.zero_point = lambda - vmin;
  const double scale = 1.0 / std::sqrt(cell_area(g));
  fc.packet.b.resize(g.size());
  fc.packet.a.assign(g.size(), cplx{});
  for (std::size_t k = 0; k < g.size(); ++k) fc.packet.b[k] = x[static_cast<Eigen::Index>(k)] * scale;
  return fc;
}

struct PropagationConfig {
  double dt = 0.0;            ///< atomic units; 0 selects 0.9 / spectral radius
  double dt_safety = 0.9;
  std::size_t power_iterations = 50;
  double t_final_fs = 25.0;
  double output_interval_fs = 0.1;
  std::vector<double> snapshot_fs{0.0, 2.4, 4.8, 8.4};
  MassParams mass{};
  CapSpec cap{};
  bool taylor_bootstrap = true;
};

struct Snapshot {
  double t_fs = 0.0;
  std::vector<double> density_b, density_a;
};

struct PropagationResult {
  std::vector<Observables> series;  ///< t stored in fs
  std::vector<Snapshot> snapshots;
  double dt = 0.0;
  double spectral_radius = 0.0;
  double energy_shift = 0.0;
  double zero_point = 0.0;
  std::size_t steps = 0;
  Wavepacket final_state;
};

inline Snapshot make_snapshot(const Wavepacket& wp, double t_fs) {
  Snapshot s;
  s.t_fs = t_fs;
  for (const auto& x : wp.b) s.density_b.push_back(std::norm(x));
  for (const auto& x : wp.a) s.density_a.push_back(std::norm(x));
  return s;
}

/// Propagates `start` (or the Franck-Condon state when empty) on the coupled
/// surfaces. The diagonal is shifted by the initial energy to keep the
/// leapfrog phase error small; populations do not depend on the shift.
inline PropagationResult propagate(const FineSurfaces& fs, const PropagationConfig& cfg,
                                   const Wavepacket* start = nullptr) {
  if (!(cfg.t_final_fs >= 0.0) || !(cfg.output_interval_fs > 0.0))
    throw Error(ErrorKind::schema, "propagation times must be positive");
  CoupledHamiltonian h(fs, cfg.mass, cfg.cap);
  const auto& g = fs.grid;
  PropagationResult out;
  Wavepacket chi0;
  if (start) {
    chi0 = *start;
  } else {
    auto fc = initial_wavepacket(fs.e_x, g, cfg.mass);
    out.zero_point = fc.zero_point;
    chi0 = std::move(fc.packet);
  }
  if (chi0.b.size() != g.size() || chi0.a.size() != g.size())
    throw Error(ErrorKind::dimension, "initial wavepacket does not match the grid");
  {
    std::vector<cplx> hb, ha;
    h.apply_hermitian(chi0, hb, ha);
    const double cell = cell_area(g);
    double e = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
      e += (std::conj(chi0.b[k]) * hb[k] + std::conj(chi0.a[k]) * ha[k]).real();
    const double nrm = norm_squared(chi0.b, cell) + norm_squared(chi0.a, cell);
    out.energy_shift = e * cell / nrm;
    h.set_shift(out.energy_shift);
  }
  out.spectral_radius = spectral_radius(h, cfg.power_iterations);
  out.dt = cfg.dt > 0.0 ? cfg.dt : cfg.dt_safety / out.spectral_radius;
  if (out.dt * out.spectral_radius >= 1.0)
    throw Error(ErrorKind::instability, "dt " + format_real(out.dt) + " violates the stability bound 1/" +
                                             format_real(out.spectral_radius));
  const double dt = out.dt;
  const auto n_steps = static_cast<std::size_t>(std::llround(cfg.t_final_fs * au_per_fs / dt));
  const auto stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.output_interval_fs * au_per_fs / dt)));
  std::vector<std::size_t> snap_steps;
  for (double t : cfg.snapshot_fs) {
    if (t < 0.0 || t > cfg.t_final_fs + 1e-12) continue;
    snap_steps.push_back(static_cast<std::size_t>(std::llround(t * au_per_fs / dt)));
  }

  auto record = [&](const Wavepacket& wp, std::size_t step) {
    if (step % stride == 0 || step == n_steps) {
      detail::check_finite(wp, step, out.spectral_radius);
      auto o = observables(wp, g);
      o.t = wp.t / au_per_fs;
      if (!(o.total() < 2.0))
        throw Error(ErrorKind::instability, "norm blow-up at step " + std::to_string(step) +
                                                 " (spectral radius estimate " + format_real(out.spectral_radius) + ")");
      out.series.push_back(o);
    }
    for (std::size_t k = 0; k < snap_steps.size(); ++k)
      if (snap_steps[k] == step) out.snapshots.push_back(make_snapshot(wp, cfg.snapshot_fs[k]));
  };

  chi0.t = 0.0;
  record(chi0, 0);
  if (n_steps == 0) {
    out.final_state = chi0;
    return out;
  }
  Wavepacket prev = chi0;
  Wavepacket curr = bootstrap_first_step(chi0, dt, h);
  record(curr, 1);
  for (std::size_t step = 2; step <= n_steps; ++step) {
    Wavepacket next = step_leapfrog(prev, curr, dt, h);
    prev = std::move(curr);
    curr = std::move(next);
    record(curr, step);
  }
  out.steps = n_steps;
  out.final_state = std::move(curr);
  return out;
}

inline Table population_table(const PropagationResult& r, const std::vector<std::string>& provenance) {
  Table t;
  t.kind = "populations";
  t.header = provenance;
  t.header.push_back("dt_au: " + format_real(r.dt));
  t.header.push_back("spectral_radius: " + format_real(r.spectral_radius));
  t.header.push_back("zero_point_energy: " + format_real(r.zero_point));
  t.header.push_back("columns: t_fs P_B P_A absorbed_A absorbed_B total");
  for (const auto& o : r.series) t.rows.push_back({o.t, o.p_b, o.p_a, o.absorbed_a, o.absorbed_b, o.total()});
  return t;
}

/// Snapshot table: r theta |chi_B|^2 |chi_A|^2, one row per grid point.
inline Table snapshot_table(const Snapshot& s, const GridSpec& g, const std::vector<std::string>& provenance) {
  Table t;
  t.kind = "snapshot";
  t.header = provenance;
  t.header.push_back("t_fs: " + format_real(s.t_fs));
  t.header.push_back("grid: " + std::to_string(g.n_r) + " " + std::to_string(g.n_theta));
  t.header.push_back("columns: r theta density_B density_A");
  for (std::size_t i = 0; i < g.n_r; ++i)
    for (std::size_t j = 0; j < g.n_theta; ++j) {
      const std::size_t k = g.index(i, j);
      t.rows.push_back({g.r(i), g.theta(j), s.density_b[k], s.density_a[k]});
    }
  return t;
}

}  // namespace nadvqe
