#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "nadvqe/error.hpp"
#include "nadvqe/fcidump.hpp"

namespace nadvqe {

/// Displacement labels of the Cartesian H-atom coordinates, in table order.
inline const std::array<std::string, 4> cartesian_labels{"Y1", "Z1", "Y2", "Z2"};

struct ManifestPoint {
  GeometryTag tag;
  std::size_t ir = 0, it = 0;
  std::filesystem::path center;
  /// Keys "Y1+", "Y1-", ... "Z2-"; may be empty for an energies-only manifest.
  std::map<std::string, std::filesystem::path> displaced;

  bool has_displacements() const {
    for (const auto& l : cartesian_labels)
      if (!displaced.count(l + "+") || !displaced.count(l + "-")) return false;
    return true;
  }
};

/// Coarse-grid manifest. Points are stored row-major: index = ir * n_theta + it.
struct Manifest {
  std::filesystem::path source;
  double delta_r = 0.001;
  std::vector<double> r_axis, theta_axis;
  std::vector<ManifestPoint> points;

  std::size_t n_r() const { return r_axis.size(); }
  std::size_t n_theta() const { return theta_axis.size(); }
  const ManifestPoint& at(std::size_t ir, std::size_t it) const { return points[ir * n_theta() + it]; }

  /// Boustrophedon walk: theta ascending on even r rows, descending on odd ones,
  /// so consecutive points are always grid neighbours.
  std::vector<std::size_t> serpentine_order() const {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < n_r(); ++i)
      for (std::size_t k = 0; k < n_theta(); ++k) {
        const std::size_t j = (i % 2 == 0) ? k : n_theta() - 1 - k;
        order.push_back(i * n_theta() + j);
      }
    return order;
  }
};

namespace detail {

inline std::vector<double> distinct_sorted(std::vector<double> v, double tol) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v)
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  return out;
}

inline std::size_t axis_index(const std::vector<double>& axis, double x, double tol) {
  for (std::size_t k = 0; k < axis.size(); ++k)
    if (std::abs(axis[k] - x) <= tol) return k;
  return axis.size();
}

}  // namespace detail

inline Manifest parse_manifest(const nlohmann::json& j, const std::filesystem::path& source) {
  constexpr double tol = 1e-9;
  if (!j.is_object() || j.value("format", "") != "nadvqe-manifest")
    throw Error(ErrorKind::schema, source.string() + ": not a nadvqe manifest");
  if (j.value("version", 0) != 1) throw Error(ErrorKind::schema, source.string() + ": unsupported manifest version");
  Manifest m;
  m.source = source;
  const auto base = source.parent_path();
  m.delta_r = j.value("delta_r", 0.001);
  if (!(m.delta_r > 0.0)) throw Error(ErrorKind::schema, "manifest: delta_r must be > 0");
  if (!j.contains("points") || !j["points"].is_array() || j["points"].empty())
    throw Error(ErrorKind::schema, "manifest: empty point list");

  std::vector<ManifestPoint> raw;
  std::vector<double> rs, ts;
  for (const auto& p : j["points"]) {
    ManifestPoint mp;
    try {
      mp.tag = {p.at("r").get<double>(), p.at("theta").get<double>()};
      mp.center = base / p.at("center").get<std::string>();
      if (p.contains("displaced"))
        for (const auto& [k, v] : p["displaced"].items()) mp.displaced[k] = base / v.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::schema, "manifest point: " + std::string(e.what()));
    }
    rs.push_back(mp.tag.r);
    ts.push_back(mp.tag.theta);
    raw.push_back(std::move(mp));
  }
  m.r_axis = detail::distinct_sorted(rs, tol);
  m.theta_axis = detail::distinct_sorted(ts, tol);
  const std::size_t nr = m.n_r(), nt = m.n_theta();
  if (raw.size() != nr * nt)
    throw Error(ErrorKind::schema, "manifest: " + std::to_string(raw.size()) + " points do not cover a " +
                                       std::to_string(nr) + "x" + std::to_string(nt) + " rectangular grid");
  m.points.resize(nr * nt);
  std::vector<bool> seen(nr * nt, false);
  for (auto& mp : raw) {
    mp.ir = detail::axis_index(m.r_axis, mp.tag.r, tol);
    mp.it = detail::axis_index(m.theta_axis, mp.tag.theta, tol);
    const std::size_t k = mp.ir * nt + mp.it;
    if (seen[k]) throw Error(ErrorKind::schema, "manifest: duplicate point " + describe(mp.tag));
    seen[k] = true;
    m.points[k] = std::move(mp);
  }
  return m;
}

inline Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open manifest " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse, path.string() + ": " + e.what());
  }
  return parse_manifest(j, path);
}

/// Missing-file report: one entry per absent path, naming the geometry tag.
inline std::vector<std::string> missing_files(const Manifest& m, bool need_displacements) {
  std::vector<std::string> out;
  for (const auto& p : m.points) {
    if (!std::filesystem::exists(p.center))
      out.push_back("missing FCIDUMP " + p.center.string() + " at " + describe(p.tag));
    if (!need_displacements) continue;
    if (!p.has_displacements()) {
      out.push_back("no displaced geometries listed at " + describe(p.tag));
      continue;
    }
    for (const auto& [k, path] : p.displaced)
      if (!std::filesystem::exists(path))
        out.push_back("missing FCIDUMP " + path.string() + " (" + k + ") at " + describe(p.tag));
  }
  return out;
}

}  // namespace nadvqe
