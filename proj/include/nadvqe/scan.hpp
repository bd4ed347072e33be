#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nadvqe/io.hpp"
#include "nadvqe/jordan_wigner.hpp"
#include "nadvqe/manifest.hpp"
#include "nadvqe/parallel.hpp"
#include "nadvqe/ssvqe.hpp"

namespace nadvqe {

struct ScanResult {
  std::vector<double> r_axis, theta_axis;
  std::vector<GeometryResult> points;  ///< row-major, aligned with the manifest
  std::vector<std::string> unconverged;

  std::size_t n_r() const { return r_axis.size(); }
  std::size_t n_theta() const { return theta_axis.size(); }
};

/// Loads one FCIDUMP and maps it to qubits; errors carry the geometry tag.
inline PauliSum load_qubit_hamiltonian(const std::filesystem::path& path, const GeometryTag& tag) {
  try {
    auto ints = load_fcidump(path);
    ints.geometry = tag;
    return qubit_hamiltonian(ints);
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(e.what()) + " [geometry " + describe(tag) + "]");
  }
}

namespace detail {

/// Neighbour-based estimate for the restart test: linear extrapolation from
/// the two previous chain points when they line up with the current one.
inline std::optional<std::vector<double>> chain_estimate(const Manifest& m, const std::vector<std::size_t>& order,
                                                         std::size_t pos, const std::vector<GeometryResult>& done) {
  if (pos == 0) return std::nullopt;
  const auto& cur = m.points[order[pos]];
  const auto& p1 = m.points[order[pos - 1]];
  const auto& e1 = done[order[pos - 1]].energies;
  if (pos >= 2) {
    const auto& p2 = m.points[order[pos - 2]];
    if (p1.ir == cur.ir && p2.ir == cur.ir) {
      const auto& e2 = done[order[pos - 2]].energies;
      std::vector<double> e(e1.size());
      for (std::size_t k = 0; k < e.size(); ++k) e[k] = 2.0 * e1[k] - e2[k];
      return e;
    }
  }
  return e1;
}

}  // namespace detail

using ScanProgress = std::function<void(std::size_t done, std::size_t total, const GeometryResult&)>;

/// SSVQE over the coarse grid. Hamiltonians are loaded in parallel; the
/// optimisation itself follows one serpentine warm-start chain so that every
/// point's start depends only on the manifest and the seed.
inline ScanResult scan_grid(const Manifest& m, const SsvqeConfig& cfg, std::size_t workers = 1,
                            const ScanProgress& progress = {}) {
  cfg.validate();
  const std::size_t n = m.points.size();
  std::vector<PauliSum> hams(n);
  parallel_for(n, workers, [&](std::size_t i) {
    const auto& p = m.points[i];
    if (!std::filesystem::exists(p.center))
      throw Error(ErrorKind::io, "missing FCIDUMP " + p.center.string() + " at " + describe(p.tag));
    hams[i] = load_qubit_hamiltonian(p.center, p.tag);
  });

  ScanResult out;
  out.r_axis = m.r_axis;
  out.theta_axis = m.theta_axis;
  out.points.resize(n);
  const auto order = m.serpentine_order();
  std::optional<std::vector<double>> warm;
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t i = order[pos];
    SsvqeConfig c = cfg;
    if (warm) c.warm_start = warm;
    const auto ref = detail::chain_estimate(m, order, pos, out.points);
    auto res = optimize(hams[i], c, ref, i).result;
    res.geometry = m.points[i].tag;
    warm = res.parameters;
    out.points[i] = std::move(res);
    if (progress) progress(pos + 1, n, out.points[i]);
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!out.points[i].converged) out.unconverged.push_back(describe(out.points[i].geometry));
  return out;
}

// Energy table: r theta E0 E1 E2 converged iterations gradient_norm p0 p1 p2 n_params params...

inline Table energy_table(const ScanResult& s, const std::vector<std::string>& provenance) {
  Table t;
  t.kind = "energies";
  t.header = provenance;
  t.header.push_back("grid: " + std::to_string(s.n_r()) + " " + std::to_string(s.n_theta()));
  t.header.push_back("columns: r theta E0 E1 E2 converged iterations gradient_norm perm0 perm1 perm2 n_params params...");
  for (const auto& g : s.points) {
    std::vector<double> row{g.geometry.r, g.geometry.theta};
    row.insert(row.end(), g.energies.begin(), g.energies.end());
    row.push_back(g.converged ? 1.0 : 0.0);
    row.push_back(static_cast<double>(g.iterations));
    row.push_back(g.gradient_norm);
    for (auto p : g.permutation) row.push_back(static_cast<double>(p));
    row.push_back(static_cast<double>(g.parameters.size()));
    row.insert(row.end(), g.parameters.begin(), g.parameters.end());
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline ScanResult scan_from_table(const Table& t) {
  ScanResult s;
  std::vector<double> rs, ts;
  for (const auto& row : t.rows) {
    if (row.size() < 12) throw Error(ErrorKind::format, "energy table row too short");
    GeometryResult g;
    g.geometry = {row[0], row[1]};
    g.energies = {row[2], row[3], row[4]};
    g.converged = row[5] != 0.0;
    g.iterations = static_cast<std::size_t>(row[6]);
    g.gradient_norm = row[7];
    g.permutation = {static_cast<std::size_t>(row[8]), static_cast<std::size_t>(row[9]),
                     static_cast<std::size_t>(row[10])};
    const auto np = static_cast<std::size_t>(row[11]);
    if (row.size() != 12 + np) throw Error(ErrorKind::format, "energy table parameter count mismatch");
    g.parameters.assign(row.begin() + 12, row.end());
    rs.push_back(g.geometry.r);
    ts.push_back(g.geometry.theta);
    s.points.push_back(std::move(g));
  }
  s.r_axis = detail::distinct_sorted(rs, 1e-9);
  s.theta_axis = detail::distinct_sorted(ts, 1e-9);
  if (s.points.size() != s.n_r() * s.n_theta())
    throw Error(ErrorKind::format, "energy table does not cover a rectangular grid");
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    const auto& g = s.points[i];
    if (detail::axis_index(s.r_axis, g.geometry.r, 1e-9) != i / s.n_theta() ||
        detail::axis_index(s.theta_axis, g.geometry.theta, 1e-9) != i % s.n_theta())
      throw Error(ErrorKind::format, "energy table rows are not in row-major grid order");
    if (!g.converged) s.unconverged.push_back(describe(g.geometry));
  }
  return s;
}

}  // namespace nadvqe
