#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "nadvqe/grid.hpp"
#include "nadvqe/nac.hpp"
#include "nadvqe/scan.hpp"
#include "nadvqe/spline.hpp"

namespace nadvqe {

/// Coarse-grid tables, row-major over (r, theta).
struct SurfaceSet {
  std::vector<double> r_axis, theta_axis;
  std::vector<double> e_x, e_a, e_b, f_r, f_theta;
  std::vector<char> energy_mask, nac_mask;
  double gap_floor = default_gap_floor;

  std::size_t n_r() const { return r_axis.size(); }
  std::size_t n_theta() const { return theta_axis.size(); }
  std::size_t size() const { return n_r() * n_theta(); }
  bool masked(std::size_t k) const { return energy_mask[k] || nac_mask[k]; }
  double masked_fraction() const {
    std::size_t m = 0;
    for (std::size_t k = 0; k < size(); ++k) m += masked(k);
    return size() ? static_cast<double>(m) / static_cast<double>(size()) : 0.0;
  }
};

inline constexpr double max_masked_fraction = 0.2;

/// Merges energy and NAC results. The mask is the union of unconverged and
/// degenerate points.
inline SurfaceSet assemble(const ScanResult& energies, const NacField& nac, std::size_t lower = 1,
                           std::size_t upper = 2, double gap_floor = default_gap_floor) {
  std::vector<std::string> offenders;
  if (energies.points.size() != nac.values.size())
    throw Error(ErrorKind::alignment, "energy table has " + std::to_string(energies.points.size()) +
                                          " points, NAC table " + std::to_string(nac.values.size()));
  for (std::size_t k = 0; k < energies.points.size(); ++k) {
    const auto& a = energies.points[k].geometry;
    const auto& b = nac.values[k].tag;
    if (std::abs(a.r - b.r) > 1e-9 || std::abs(a.theta - b.theta) > 1e-9)
      offenders.push_back(describe(a) + " vs " + describe(b));
  }
  if (!offenders.empty()) {
    std::string msg = "energy and NAC tables cover different points:";
    for (const auto& o : offenders) msg += " " + o;
    throw Error(ErrorKind::alignment, msg);
  }
  SurfaceSet s;
  s.r_axis = energies.r_axis;
  s.theta_axis = energies.theta_axis;
  s.gap_floor = gap_floor;
  for (std::size_t k = 0; k < energies.points.size(); ++k) {
    const auto& g = energies.points[k];
    const auto& n = nac.values[k];
    s.e_x.push_back(g.energies[0]);
    s.e_a.push_back(g.energies[lower]);
    s.e_b.push_back(g.energies[upper]);
    s.f_r.push_back(n.masked ? 0.0 : n.f_r);
    s.f_theta.push_back(n.masked ? 0.0 : n.f_theta);
    s.energy_mask.push_back(!g.converged);
    s.nac_mask.push_back(n.masked || !g.converged);
  }
  return s;
}

namespace detail {

/// Replaces masked entries by the discrete harmonic interpolant of the
/// unmasked ones (Gauss-Seidel on the 4-neighbour average).
inline void harmonic_fill(std::vector<double>& v, const std::vector<char>& mask, std::size_t nr, std::size_t nt) {
  double known = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < v.size(); ++k)
    if (!mask[k]) known += v[k], ++count;
  if (count == 0) throw Error(ErrorKind::empty_field, "cannot fill a fully masked field");
  for (std::size_t k = 0; k < v.size(); ++k)
    if (mask[k]) v[k] = known / static_cast<double>(count);
  for (int sweep = 0; sweep < 20000; ++sweep) {
    double change = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!mask[k]) continue;
      const std::size_t i = k / nt, j = k % nt;
      double sum = 0.0;
      int m = 0;
      if (i > 0) sum += v[k - nt], ++m;
      if (i + 1 < nr) sum += v[k + nt], ++m;
      if (j > 0) sum += v[k - 1], ++m;
      if (j + 1 < nt) sum += v[k + 1], ++m;
      const double nv = sum / m;
      change = std::max(change, std::abs(nv - v[k]));
      v[k] = nv;
    }
    if (change < 1e-14) break;
  }
}

}  // namespace detail

/// Fills masked coarse points in place and returns their tags. NACs are
/// filled through the product NAC * gap so the 1/gap shape survives.
inline std::vector<std::string> fill_masked(SurfaceSet& s) {
  std::vector<std::string> filled;
  const std::size_t nr = s.n_r(), nt = s.n_theta();
  bool any_e = false, any_n = false;
  for (std::size_t k = 0; k < s.size(); ++k) {
    any_e |= s.energy_mask[k] != 0;
    any_n |= s.nac_mask[k] != 0;
    if (s.masked(k)) filled.push_back(describe({s.r_axis[k / nt], s.theta_axis[k % nt]}));
  }
  if (any_e) {
    detail::harmonic_fill(s.e_x, s.energy_mask, nr, nt);
    detail::harmonic_fill(s.e_a, s.energy_mask, nr, nt);
    detail::harmonic_fill(s.e_b, s.energy_mask, nr, nt);
  }
  if (any_n) {
    std::vector<double> gap(s.size()), gr(s.size()), gt(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
      gap[k] = s.e_b[k] - s.e_a[k];
      gr[k] = s.f_r[k] * gap[k];
      gt[k] = s.f_theta[k] * gap[k];
    }
    detail::harmonic_fill(gap, s.nac_mask, nr, nt);
    detail::harmonic_fill(gr, s.nac_mask, nr, nt);
    detail::harmonic_fill(gt, s.nac_mask, nr, nt);
    for (std::size_t k = 0; k < s.size(); ++k) {
      if (!s.nac_mask[k]) continue;
      const double g = std::max(std::abs(gap[k]), s.gap_floor);
      s.f_r[k] = gr[k] / g;
      s.f_theta[k] = gt[k] / g;
    }
  }
  return filled;
}

/// Surfaces on the dynamics grid. Fields are row-major over (r, theta).
struct FineSurfaces {
  GridSpec grid;
  std::vector<double> e_x, e_a, e_b, f_r, f_theta;
  std::string provenance;
};

inline FineSurfaces interpolate(SurfaceSet s, const GridSpec& grid) {
  grid.validate();
  if (s.masked_fraction() >= max_masked_fraction)
    throw Error(ErrorKind::numeric, "masked fraction " + format_real(s.masked_fraction()) +
                                        " too large to interpolate");
  const auto filled = fill_masked(s);
  const Bicubic spline(s.r_axis, s.theta_axis, grid.r_axis(), grid.theta_axis());
  FineSurfaces f;
  f.grid = grid;
  f.e_x = spline.apply(s.e_x);
  f.e_a = spline.apply(s.e_a);
  f.e_b = spline.apply(s.e_b);
  f.f_r = spline.apply(s.f_r);
  f.f_theta = spline.apply(s.f_theta);
  f.provenance = "filled:";
  for (const auto& p : filled) f.provenance += " " + p;
  if (filled.empty()) f.provenance += " none";
  return f;
}

// Bundle layout (little-endian): "NADVQEFS" u32 version u32 n_fields
// u64 n_r u64 n_theta f64 r_min r_max theta_min theta_max
// u64 provenance length + bytes, f64 r axis, f64 theta axis,
// then e_x e_a e_b f_r f_theta, each n_r*n_theta f64 row-major.

static_assert(std::endian::native == std::endian::little, "bundle IO assumes a little-endian host");

inline constexpr char bundle_magic[9] = "NADVQEFS";
inline constexpr std::uint32_t bundle_version = 1;

namespace detail {

template <class T>
void put(std::ostream& o, T v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
T get(std::istream& in, const std::string& what) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!in) throw Error(ErrorKind::format, "truncated surface bundle while reading " + what);
  return v;
}

}  // namespace detail

inline void write_bundle(const std::filesystem::path& path, const FineSurfaces& f) {
  std::ofstream o(path, std::ios::binary);
  if (!o) throw Error(ErrorKind::io, "cannot write " + path.string());
  o.write(bundle_magic, 8);
  detail::put<std::uint32_t>(o, bundle_version);
  detail::put<std::uint32_t>(o, 5);
  detail::put<std::uint64_t>(o, f.grid.n_r);
  detail::put<std::uint64_t>(o, f.grid.n_theta);
  for (double v : {f.grid.r_min, f.grid.r_max, f.grid.theta_min, f.grid.theta_max}) detail::put<double>(o, v);
  detail::put<std::uint64_t>(o, f.provenance.size());
  o.write(f.provenance.data(), static_cast<std::streamsize>(f.provenance.size()));
  for (double v : f.grid.r_axis()) detail::put<double>(o, v);
  for (double v : f.grid.theta_axis()) detail::put<double>(o, v);
  for (const auto* field : {&f.e_x, &f.e_a, &f.e_b, &f.f_r, &f.f_theta}) {
    if (field->size() != f.grid.size()) throw Error(ErrorKind::dimension, "surface field size mismatch");
    o.write(reinterpret_cast<const char*>(field->data()), static_cast<std::streamsize>(field->size() * sizeof(double)));
  }
  if (!o) throw Error(ErrorKind::io, "write failed for " + path.string());
}

inline FineSurfaces read_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, bundle_magic, 8) != 0)
    throw Error(ErrorKind::format, path.string() + " is not a surface bundle");
  if (detail::get<std::uint32_t>(in, "version") != bundle_version)
    throw Error(ErrorKind::format, "unsupported surface bundle version");
  if (detail::get<std::uint32_t>(in, "field count") != 5) throw Error(ErrorKind::format, "unexpected field count");
  FineSurfaces f;
  f.grid.n_r = detail::get<std::uint64_t>(in, "n_r");
  f.grid.n_theta = detail::get<std::uint64_t>(in, "n_theta");
  f.grid.r_min = detail::get<double>(in, "r_min");
  f.grid.r_max = detail::get<double>(in, "r_max");
  f.grid.theta_min = detail::get<double>(in, "theta_min");
  f.grid.theta_max = detail::get<double>(in, "theta_max");
  f.grid.validate();
  const auto plen = detail::get<std::uint64_t>(in, "provenance length");
  if (plen > (1u << 20)) throw Error(ErrorKind::format, "implausible provenance length");
  f.provenance.resize(plen);
  in.read(f.provenance.data(), static_cast<std::streamsize>(plen));
  for (std::size_t k = 0; k < f.grid.n_r + f.grid.n_theta; ++k) detail::get<double>(in, "axes");
  for (auto* field : {&f.e_x, &f.e_a, &f.e_b, &f.f_r, &f.f_theta}) {
    field->resize(f.grid.size());
    in.read(reinterpret_cast<char*>(field->data()), static_cast<std::streamsize>(field->size() * sizeof(double)));
    if (!in) throw Error(ErrorKind::format, "truncated surface bundle");
  }
  return f;
}

}  // namespace nadvqe
