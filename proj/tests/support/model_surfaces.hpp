#pragma once

// Analytic surface sets for the dynamics tests.

#include <cmath>

#include "nadvqe/surfaces.hpp"

namespace model {

inline constexpr double energy_offset = -75.4;

/// Three-hole model used by the fixture generator: diabatic B/A energies
/// coupled by lam, which vanishes at r = 1.9, and a separate X surface.
/// The B/A seam (d_b = d_a, lam = 0) sits near (1.90, 2.54).
struct HoleModel {
  double d_b, d_a, lam, v_x;
  double db_r, db_t, da_r, da_t, lam_r;

  static HoleModel at(double r, double theta, double lam_slope = 0.006) {
    const double dth = theta - 1.82;
    const double q = 0.5 * 0.207 * (r - 1.81) * (r - 1.81) + 0.5 * 0.108 * dth * dth;
    HoleModel m{};
    m.v_x = 0.15 * std::tanh(q / 0.15);
    m.d_a = 0.25 - 0.03 * dth + 0.05 * (r - 1.81) * (r - 1.81);
    m.d_b = 0.30 - 0.10 * dth + 0.10 * (r - 2.00) * (r - 2.00);
    m.lam = lam_slope * (r - 1.90);
    m.da_r = 0.10 * (r - 1.81);
    m.da_t = -0.03;
    m.db_r = 0.20 * (r - 2.00);
    m.db_t = -0.10;
    m.lam_r = lam_slope;
    return m;
  }
};

/// Adiabatic surfaces and the exact derivative coupling <A|d B> of the
/// 2x2 block, (Delta dlam - lam dDelta) / (Delta^2 + 4 lam^2).
inline nadvqe::FineSurfaces conical_intersection(const nadvqe::GridSpec& g, double lam_slope = 0.006) {
  nadvqe::FineSurfaces f;
  f.grid = g;
  f.provenance = "analytic hole model";
  for (std::size_t i = 0; i < g.n_r; ++i)
    for (std::size_t j = 0; j < g.n_theta; ++j) {
      const auto m = HoleModel::at(g.r(i), g.theta(j), lam_slope);
      const double delta = m.d_b - m.d_a, mean = 0.5 * (m.d_b + m.d_a);
      const double root = std::sqrt(delta * delta + 4 * m.lam * m.lam);
      const double den = std::max(delta * delta + 4 * m.lam * m.lam, 1e-12);
      f.e_x.push_back(energy_offset + m.v_x);
      f.e_b.push_back(energy_offset + mean + 0.5 * root);
      f.e_a.push_back(energy_offset + mean - 0.5 * root);
      f.f_r.push_back((delta * m.lam_r - m.lam * (m.db_r - m.da_r)) / den);
      f.f_theta.push_back((-m.lam * (m.db_t - m.da_t)) / den);
    }
  return f;
}

/// Separable harmonic X surface; B and A copies shifted up, no coupling.
inline nadvqe::FineSurfaces harmonic(const nadvqe::GridSpec& g, double k_r, double k_t, double r0, double t0) {
  nadvqe::FineSurfaces f;
  f.grid = g;
  for (std::size_t i = 0; i < g.n_r; ++i)
    for (std::size_t j = 0; j < g.n_theta; ++j) {
      const double v = 0.5 * k_r * std::pow(g.r(i) - r0, 2) + 0.5 * k_t * std::pow(g.theta(j) - t0, 2);
      f.e_x.push_back(v);
      f.e_b.push_back(v + 0.3);
      f.e_a.push_back(v + 0.2);
      f.f_r.push_back(0.0);
      f.f_theta.push_back(0.0);
    }
  return f;
}

/// Small two-surface model with smooth nonzero couplings everywhere.
inline nadvqe::FineSurfaces coupled_small(const nadvqe::GridSpec& g) {
  nadvqe::FineSurfaces f;
  f.grid = g;
  for (std::size_t i = 0; i < g.n_r; ++i)
    for (std::size_t j = 0; j < g.n_theta; ++j) {
      const double r = g.r(i), t = g.theta(j);
      f.e_x.push_back(0.1 * (r - 1.8) * (r - 1.8) + 0.05 * (t - 1.8) * (t - 1.8));
      f.e_b.push_back(0.02 + 0.08 * (r - 1.9) * (r - 1.9) - 0.02 * (t - 1.8));
      f.e_a.push_back(0.01 * (r - 1.8) + 0.03 * (t - 1.9) * (t - 1.9));
      f.f_r.push_back(0.8 + 0.3 * std::sin(2 * r + t));
      f.f_theta.push_back(0.5 * std::cos(r - t));
    }
  return f;
}

}  // namespace model
