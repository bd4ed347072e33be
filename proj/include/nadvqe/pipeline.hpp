#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "nadvqe/dynamics.hpp"
#include "nadvqe/grid.hpp"
#include "nadvqe/io.hpp"
#include "nadvqe/manifest.hpp"
#include "nadvqe/nac.hpp"
#include "nadvqe/parallel.hpp"
#include "nadvqe/scan.hpp"
#include "nadvqe/ssvqe.hpp"
#include "nadvqe/surfaces.hpp"

namespace nadvqe {

inline constexpr const char* version_string = "nadvqe 1.0.0";

enum class Stage { surfaces, nac, interp, dynamics };

inline constexpr std::array<Stage, 4> all_stages{Stage::surfaces, Stage::nac, Stage::interp, Stage::dynamics};

inline const char* stage_name(Stage s) {
  switch (s) {
    case Stage::surfaces: return "surfaces";
    case Stage::nac: return "nac";
    case Stage::interp: return "interp";
    case Stage::dynamics: return "dynamics";
  }
  return "?";
}

/// "propagate" is accepted as another name for the dynamics stage.
inline Stage parse_stage(const std::string& s) {
  for (auto st : all_stages)
    if (s == stage_name(st)) return st;
  if (s == "propagate") return Stage::dynamics;
  throw Error(ErrorKind::schema, "unknown stage '" + s + "'");
}

// Artifact names inside the output directory.
namespace artifact {
inline constexpr const char* energies = "energies.txt";
inline constexpr const char* nac = "nac.txt";
inline constexpr const char* bundle = "surfaces.bin";
inline constexpr const char* populations = "populations.txt";
inline constexpr const char* snapshots = "snapshots";
}  // namespace artifact

struct RunConfig {
  std::filesystem::path source;
  std::filesystem::path manifest;  ///< empty when no stage needs it
  std::filesystem::path output_dir;
  std::filesystem::path bundle;  ///< prebuilt fine-surface bundle for a dynamics-only run
  std::uint64_t seed = 7;
  std::vector<Stage> stages{all_stages.begin(), all_stages.end()};
  SsvqeConfig ssvqe;
  NacOptions nac;
  GridSpec grid;
  bool grid_declared = false;
  std::optional<double> declared_dr, declared_dtheta;
  PropagationConfig dynamics;
  double norm_tolerance = 1e-3;
  /// FNV-1a of the canonical config with stage selection and output directory removed,
  /// so a resumed run stamps the same provenance as a full one.
  std::string hash;

  bool runs(Stage s) const { return std::find(stages.begin(), stages.end(), s) != stages.end(); }

  std::filesystem::path path(const char* name) const { return output_dir / name; }

  std::filesystem::path bundle_input() const {
    return (runs(Stage::interp) || bundle.empty()) ? path(artifact::bundle) : bundle;
  }

  std::vector<std::string> provenance(Stage s) const {
    return {"config_hash: " + hash, "seed: " + std::to_string(seed), std::string("version: ") + version_string,
            std::string("stage: ") + stage_name(s)};
  }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, const std::string& where, std::set<std::string> allowed) {
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw Error(ErrorKind::schema, where + ": unknown key '" + k + "'");
}

template <class T>
void read_key(const nlohmann::json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::schema, where + "." + key + ": wrong type");
  }
}

inline const nlohmann::json& section(const nlohmann::json& j, const char* key) {
  static const nlohmann::json empty = nlohmann::json::object();
  if (!j.contains(key)) return empty;
  if (!j[key].is_object()) throw Error(ErrorKind::schema, std::string(key) + ": expected an object");
  return j[key];
}

inline AnsatzLayout parse_layout(const std::string& s) {
  if (s == "same_spin") return AnsatzLayout::same_spin;
  if (s == "nearest_neighbor") return AnsatzLayout::nearest_neighbor;
  throw Error(ErrorKind::schema, "ssvqe.layout: unknown layout '" + s + "'");
}

}  // namespace detail

/// Config file layout (JSON):
///   {"format": "nadvqe-run", "version": 1, "manifest", "output_dir", "seed", "stages",
///    "ssvqe": {...}, "nac": {...}, "grid": {...}, "mass", "cap": {...}, "dynamics": {...}}
/// Relative paths resolve against the config file's directory.
inline RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& source) {
  using detail::read_key;
  if (!j.is_object() || j.value("format", "") != "nadvqe-run")
    throw Error(ErrorKind::schema, source.string() + ": not a nadvqe run config");
  if (!j.contains("version") || !j["version"].is_number_integer() || j["version"].get<int>() != 1)
    throw Error(ErrorKind::schema, source.string() + ": unsupported config version");
  detail::reject_unknown(j, "config", {"format", "version", "manifest", "output_dir", "seed", "stages", "ssvqe", "nac",
                                       "grid", "mass", "cap", "dynamics"});
  RunConfig c;
  c.source = source;
  const auto base = source.parent_path();
  auto resolve = [&](const std::string& p) { return p.empty() ? std::filesystem::path{} : base / p; };

  std::string s;
  read_key(j, "manifest", s, "config");
  c.manifest = resolve(s);
  s = "run";
  read_key(j, "output_dir", s, "config");
  c.output_dir = resolve(s);
  read_key(j, "seed", c.seed, "config");
  c.ssvqe.seed = c.seed;
  if (j.contains("stages")) {
    std::vector<std::string> names;
    read_key(j, "stages", names, "config");
    c.stages.clear();
    for (const auto& n : names) c.stages.push_back(parse_stage(n));
  }

  const auto& sv = detail::section(j, "ssvqe");
  detail::reject_unknown(sv, "ssvqe", {"weights", "initial_bitstrings", "depth", "layout", "gradient_step",
                                        "gradient_tolerance", "max_iterations", "cold_start_spread", "restarts",
                                        "restart_threshold"});
  read_key(sv, "weights", c.ssvqe.weights, "ssvqe");
  read_key(sv, "initial_bitstrings", c.ssvqe.initial_bitstrings, "ssvqe");
  read_key(sv, "depth", c.ssvqe.depth, "ssvqe");
  if (sv.contains("layout")) {
    read_key(sv, "layout", s, "ssvqe");
    c.ssvqe.layout = detail::parse_layout(s);
  }
  read_key(sv, "gradient_step", c.ssvqe.gradient_step, "ssvqe");
  read_key(sv, "gradient_tolerance", c.ssvqe.optimizer.gradient_tolerance, "ssvqe");
  read_key(sv, "max_iterations", c.ssvqe.optimizer.max_iterations, "ssvqe");
  read_key(sv, "cold_start_spread", c.ssvqe.cold_start_spread, "ssvqe");
  read_key(sv, "restarts", c.ssvqe.restarts, "ssvqe");
  read_key(sv, "restart_threshold", c.ssvqe.restart_threshold, "ssvqe");

  const auto& nv = detail::section(j, "nac");
  detail::reject_unknown(nv, "nac", {"lower", "upper", "gap_floor", "symmetry_tolerance"});
  read_key(nv, "lower", c.nac.lower, "nac");
  read_key(nv, "upper", c.nac.upper, "nac");
  read_key(nv, "gap_floor", c.nac.gap_floor, "nac");
  read_key(nv, "symmetry_tolerance", c.nac.symmetry_tolerance, "nac");

  const auto& gv = detail::section(j, "grid");
  detail::reject_unknown(gv, "grid", {"n_r", "n_theta", "r_min", "r_max", "theta_min", "theta_max", "dr", "dtheta"});
  c.grid_declared = j.contains("grid");
  read_key(gv, "n_r", c.grid.n_r, "grid");
  read_key(gv, "n_theta", c.grid.n_theta, "grid");
  read_key(gv, "r_min", c.grid.r_min, "grid");
  read_key(gv, "r_max", c.grid.r_max, "grid");
  read_key(gv, "theta_min", c.grid.theta_min, "grid");
  read_key(gv, "theta_max", c.grid.theta_max, "grid");
  if (gv.contains("dr")) read_key(gv, "dr", c.declared_dr.emplace(), "grid");
  if (gv.contains("dtheta")) read_key(gv, "dtheta", c.declared_dtheta.emplace(), "grid");

  if (j.contains("mass")) {
    const auto& m = j["mass"];
    if (m.is_string()) {
      const auto name = m.get<std::string>();
      if (name == "H") c.dynamics.mass = MassParams::hydrogen();
      else if (name == "D") c.dynamics.mass = MassParams::deuterium();
      else throw Error(ErrorKind::schema, "mass: expected \"H\", \"D\" or a number");
    } else if (m.is_number()) {
      c.dynamics.mass.m = m.get<double>();
    } else {
      throw Error(ErrorKind::schema, "mass: expected \"H\", \"D\" or a number");
    }
  }

  const auto& cv = detail::section(j, "cap");
  detail::reject_unknown(cv, "cap", {"enabled", "eta", "width", "r_width"});
  read_key(cv, "enabled", c.dynamics.cap.enabled, "cap");
  read_key(cv, "eta", c.dynamics.cap.eta, "cap");
  read_key(cv, "width", c.dynamics.cap.width, "cap");
  read_key(cv, "r_width", c.dynamics.cap.r_width, "cap");

  const auto& dv = detail::section(j, "dynamics");
  detail::reject_unknown(dv, "dynamics", {"dt", "dt_safety", "power_iterations", "t_final_fs", "output_interval_fs",
                                          "snapshots_fs", "bundle", "norm_tolerance"});
  if (dv.contains("dt")) {
    if (dv["dt"].is_string() && dv["dt"].get<std::string>() == "auto") c.dynamics.dt = 0.0;
    else if (dv["dt"].is_number()) c.dynamics.dt = dv["dt"].get<double>();
    else throw Error(ErrorKind::schema, "dynamics.dt: expected \"auto\" or a number");
    if (dv["dt"].is_number() && !(c.dynamics.dt > 0.0))
      throw Error(ErrorKind::schema, "dynamics.dt: must be > 0 or \"auto\"");
  }
  read_key(dv, "dt_safety", c.dynamics.dt_safety, "dynamics");
  read_key(dv, "power_iterations", c.dynamics.power_iterations, "dynamics");
  read_key(dv, "t_final_fs", c.dynamics.t_final_fs, "dynamics");
  read_key(dv, "output_interval_fs", c.dynamics.output_interval_fs, "dynamics");
  read_key(dv, "snapshots_fs", c.dynamics.snapshot_fs, "dynamics");
  read_key(dv, "norm_tolerance", c.norm_tolerance, "dynamics");
  s.clear();
  read_key(dv, "bundle", s, "dynamics");
  c.bundle = resolve(s);

  nlohmann::json canon = j;
  canon.erase("stages");
  canon.erase("output_dir");
  c.hash = hex64(fnv1a(canon.dump()));
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot read config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::parse, path.string() + ": " + e.what());
  }
  return parse_run_config(j, path);
}

struct ValidationReport {
  std::vector<std::string> fatal, warnings;
  bool ok() const { return fatal.empty(); }
};

namespace detail {

template <class Fn>
void collect(std::vector<std::string>& into, Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    into.push_back(e.what());
  }
}

inline std::string stale_note(const std::filesystem::path& p, const RunConfig& c) {
  try {
    const auto t = read_table(p, p.filename() == artifact::energies ? "energies" : "nac");
    const auto h = header_value(t, "config_hash");
    if (h != c.hash) return p.string() + " was written by a different config (hash " + h + ")";
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

}  // namespace detail

/// Checks every invariant of a parsed config without running anything.
inline ValidationReport validate(const RunConfig& c) {
  ValidationReport rep;
  auto& fatal = rep.fatal;
  detail::collect(fatal, [&] { c.grid.validate(); });
  if (c.declared_dr) {
    auto m = spacing_mismatch("dr", *c.declared_dr, c.grid.dr());
    if (!m.empty()) fatal.push_back("grid: " + m);
  }
  if (c.declared_dtheta) {
    auto m = spacing_mismatch("dtheta", *c.declared_dtheta, c.grid.dtheta());
    if (!m.empty()) fatal.push_back("grid: " + m);
  }
  detail::collect(fatal, [&] { c.ssvqe.validate(); });
  if (c.nac.lower == c.nac.upper || c.nac.lower >= c.ssvqe.weights.size() || c.nac.upper >= c.ssvqe.weights.size())
    fatal.push_back("nac: lower/upper must be distinct state indices below " + std::to_string(c.ssvqe.weights.size()));
  if (!(c.nac.gap_floor > 0.0)) fatal.push_back("nac: gap_floor must be > 0");
  detail::collect(fatal, [&] { c.dynamics.mass.validate(); });
  if (c.grid.n_r >= 3 && c.grid.n_theta >= 3) detail::collect(fatal, [&] { c.dynamics.cap.validate(c.grid); });
  if (!(c.dynamics.t_final_fs >= 0.0)) fatal.push_back("dynamics: t_final_fs must be >= 0");
  if (!(c.dynamics.output_interval_fs > 0.0)) fatal.push_back("dynamics: output_interval_fs must be > 0");
  if (!(c.dynamics.dt_safety > 0.0 && c.dynamics.dt_safety < 1.0))
    fatal.push_back("dynamics: dt_safety must lie in (0, 1)");
  if (c.dynamics.power_iterations == 0) fatal.push_back("dynamics: power_iterations must be > 0");
  if (!(c.norm_tolerance > 0.0)) fatal.push_back("dynamics: norm_tolerance must be > 0");
  for (double t : c.dynamics.snapshot_fs)
    if (t < 0.0 || t > c.dynamics.t_final_fs)
    {
      char buf[96];
      std::snprintf(buf, sizeof buf, "snapshot at %g fs lies outside [0, t_final] and is skipped", t);
      rep.warnings.push_back(buf);
    }
  if (!c.dynamics.cap.enabled) rep.warnings.push_back("CAP disabled: outgoing amplitude reflects at the edges");

  if (c.stages.empty()) {
    fatal.push_back("stages: nothing selected");
    return rep;
  }
  std::vector<std::size_t> pos;
  for (auto s : c.stages) pos.push_back(static_cast<std::size_t>(s));
  for (std::size_t k = 1; k < pos.size(); ++k)
    if (pos[k] != pos[k - 1] + 1) {
      fatal.push_back("stages must be a contiguous run of surfaces, nac, interp, dynamics in that order");
      return rep;
    }
  const Stage first = c.stages.front();

  const bool need_manifest = c.runs(Stage::surfaces) || c.runs(Stage::nac) || c.runs(Stage::interp);
  if (need_manifest) {
    if (c.manifest.empty()) {
      fatal.push_back("manifest: required by stage " + std::string(stage_name(first)));
    } else {
      try {
        const auto m = load_manifest(c.manifest);
        if (c.runs(Stage::surfaces) || c.runs(Stage::nac))
          for (auto& e : missing_files(m, c.runs(Stage::nac))) fatal.push_back(e);
        if (c.runs(Stage::interp)) {
          constexpr double tol = 1e-9;
          if (c.grid.r_min < m.r_axis.front() - tol || c.grid.r_max > m.r_axis.back() + tol ||
              c.grid.theta_min < m.theta_axis.front() - tol || c.grid.theta_max > m.theta_axis.back() + tol)
            fatal.push_back("grid: dynamics grid extends beyond the coarse manifest grid");
          if (m.n_r() < 2 || m.n_theta() < 2) fatal.push_back("manifest: need at least 2 points per axis");
        }
      } catch (const Error& e) {
        fatal.push_back(e.what());
      }
    }
  }

  auto need_file = [&](const std::filesystem::path& p, Stage producer) {
    if (c.runs(producer)) return;
    if (!std::filesystem::exists(p)) {
      fatal.push_back(std::string("stage ") + stage_name(first) + " needs " + p.string() + " (written by stage " +
                      stage_name(producer) + ")");
      return;
    }
    if (producer != Stage::interp) {
      auto note = detail::stale_note(p, c);
      if (!note.empty()) rep.warnings.push_back(note);
    }
  };
  if (first == Stage::nac || first == Stage::interp) need_file(c.path(artifact::energies), Stage::surfaces);
  if (first == Stage::interp) need_file(c.path(artifact::nac), Stage::nac);
  if (first == Stage::dynamics) need_file(c.bundle_input(), Stage::interp);
  if (!c.bundle.empty() && c.runs(Stage::interp))
    rep.warnings.push_back("dynamics.bundle is ignored because stage interp runs");
  return rep;
}

struct RunOutcome {
  int exit_code = 0;  ///< 0 ok, 1 input error, 2 numeric failure
  std::string failed_stage;
  std::string message;
  std::vector<Stage> completed;
  std::optional<double> norm_drift, zero_point;
};

namespace detail {

inline std::filesystem::path marker(const RunConfig& c, Stage s, bool ok) {
  return c.output_dir / ("stage_" + std::string(stage_name(s)) + (ok ? ".ok" : ".failed"));
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(ErrorKind::io, "cannot write " + p.string());
  out << text;
}

inline std::string snapshot_name(double t_fs) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "snapshot_%.3ffs.txt", t_fs);
  return buf;
}

inline void stage_surfaces(const RunConfig& c, std::size_t workers, std::ostream* log) {
  const auto m = load_manifest(c.manifest);
  SsvqeConfig cfg = c.ssvqe;
  cfg.seed = c.seed;
  const auto scan = scan_grid(m, cfg, workers, [&](std::size_t done, std::size_t total, const GeometryResult& g) {
    if (log)
      *log << "  ssvqe " << done << "/" << total << " " << describe(g.geometry)
           << (g.converged ? "" : " (not converged)") << "\n";
  });
  auto t = energy_table(scan, c.provenance(Stage::surfaces));
  t.header.insert(t.header.end() - 2, "unconverged: " + std::to_string(scan.unconverged.size()));
  write_table(c.path(artifact::energies), t);
}

inline void stage_nac(const RunConfig& c, std::size_t workers, std::ostream* log) {
  const auto m = load_manifest(c.manifest);
  const auto scan = scan_from_table(read_table(c.path(artifact::energies), "energies"));
  SsvqeConfig cfg = c.ssvqe;
  cfg.seed = c.seed;
  auto field = compute_nac_grid(m, scan, cfg, c.nac, workers);
  const auto flips = fix_sign_continuity(field);
  if (log) *log << "  nac: " << field.masked_count() << " masked, " << flips << " sign flips\n";
  auto t = nac_table(field, c.provenance(Stage::nac));
  t.header.insert(t.header.end() - 2, "sign_flips: " + std::to_string(flips));
  write_table(c.path(artifact::nac), t);
}

inline void stage_interp(const RunConfig& c, std::ostream* log) {
  const auto scan = scan_from_table(read_table(c.path(artifact::energies), "energies"));
  const auto nac = nac_from_table(read_table(c.path(artifact::nac), "nac"));
  auto set = assemble(scan, nac, c.nac.lower, c.nac.upper, c.nac.gap_floor);
  auto fine = interpolate(std::move(set), c.grid);
  std::string prov;
  for (const auto& p : c.provenance(Stage::interp)) prov += p + "; ";
  fine.provenance = prov + fine.provenance;
  if (log) *log << "  interp: " << fine.provenance << "\n";
  write_bundle(c.path(artifact::bundle), fine);
}

inline void stage_dynamics(const RunConfig& c, RunOutcome& outcome, std::ostream* log) {
  const auto fine = read_bundle(c.bundle_input());
  if (c.grid_declared && !(fine.grid == c.grid))
    throw Error(ErrorKind::alignment, "bundle grid " + std::to_string(fine.grid.n_r) + "x" +
                                          std::to_string(fine.grid.n_theta) + " differs from the configured grid");
  const auto res = propagate(fine, c.dynamics);
  double drift = 0.0;
  for (const auto& o : res.series) drift = std::max(drift, std::abs(o.total() - 1.0));
  outcome.norm_drift = drift;
  outcome.zero_point = res.zero_point;
  auto prov = c.provenance(Stage::dynamics);
  prov.push_back("mass: " + format_real(c.dynamics.mass.m));
  prov.push_back("norm_drift: " + format_real(drift));
  write_table(c.path(artifact::populations), population_table(res, prov));
  const auto dir = c.path(artifact::snapshots);
  std::filesystem::remove_all(dir);
  if (!res.snapshots.empty()) std::filesystem::create_directories(dir);
  for (const auto& s : res.snapshots) write_table(dir / snapshot_name(s.t_fs), snapshot_table(s, fine.grid, prov));
  if (log)
    *log << "  dynamics: dt " << format_real(res.dt) << " au, " << res.steps << " steps, zero-point energy "
         << format_real(res.zero_point) << " hartree, max norm drift " << format_real(drift) << "\n";
  if (!(drift <= c.norm_tolerance))
    throw Error(ErrorKind::numeric, "norm audit failed: |P_B + P_A + absorbed - 1| reached " + format_real(drift) +
                                        " > " + format_real(c.norm_tolerance));
}

}  // namespace detail

/// Runs the selected stages in order. Each stage reads its inputs from the
/// output directory, so a resumed run sees exactly what a full run sees.
/// A failing stage leaves a stage_<name>.failed marker and earlier outputs.
inline RunOutcome run(const RunConfig& c, std::size_t workers = 1, std::ostream* log = nullptr) {
  RunOutcome out;
  try {
    std::filesystem::create_directories(c.output_dir);
  } catch (const std::filesystem::filesystem_error& e) {
    out.exit_code = 1;
    out.message = e.what();
    return out;
  }
  for (auto s : c.stages) {
    if (log) *log << "stage " << stage_name(s) << "\n";
    std::filesystem::remove(detail::marker(c, s, true));
    std::filesystem::remove(detail::marker(c, s, false));
    try {
      switch (s) {
        case Stage::surfaces: detail::stage_surfaces(c, workers, log); break;
        case Stage::nac: detail::stage_nac(c, workers, log); break;
        case Stage::interp: detail::stage_interp(c, log); break;
        case Stage::dynamics: detail::stage_dynamics(c, out, log); break;
      }
    } catch (const std::exception& e) {
      const auto* err = dynamic_cast<const Error*>(&e);
      out.exit_code = (err && !err->is_numeric()) ? 1 : 2;
      out.failed_stage = stage_name(s);
      out.message = e.what();
      try {
        detail::write_text(detail::marker(c, s, false), std::string(e.what()) + "\n");
      } catch (const Error&) {
      }
      return out;
    }
    detail::write_text(detail::marker(c, s, true), "config_hash: " + c.hash + "\n");
    out.completed.push_back(s);
  }
  return out;
}

/// Plot-ready copies of a finished run: populations.csv plus one long-format
/// snapshot CSV per time (rows grouped by r, blank line between groups), both
/// readable by spreadsheet tools and gnuplot alike. Returns the files written.
inline std::vector<std::filesystem::path> emit_plot_data(const std::filesystem::path& run_dir,
                                                         std::filesystem::path out_dir = {}) {
  if (out_dir.empty()) out_dir = run_dir / "plot";
  const auto pop_path = run_dir / artifact::populations;
  if (!std::filesystem::exists(pop_path)) throw Error(ErrorKind::io, "missing run artifact " + pop_path.string());
  const auto pop = read_table(pop_path, "populations");
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;

  auto comment_block = [](std::ostream& o, const Table& t) {
    for (const auto& h : t.header)
      if (h.rfind("columns:", 0) != 0) o << "# " << h << "\n";
  };
  {
    const auto p = out_dir / "populations.csv";
    std::ofstream o(p, std::ios::binary);
    if (!o) throw Error(ErrorKind::io, "cannot write " + p.string());
    comment_block(o, pop);
    o << "t_fs,P_B,P_A,absorbed_A,absorbed_B,total\n";
    for (const auto& row : pop.rows) {
      if (row.size() != 6) throw Error(ErrorKind::format, pop_path.string() + ": rows need 6 columns");
      for (std::size_t k = 0; k < row.size(); ++k) o << (k ? "," : "") << format_real(row[k]);
      o << "\n";
    }
    written.push_back(p);
  }

  const auto snap_dir = run_dir / artifact::snapshots;
  std::vector<std::filesystem::path> snaps;
  if (std::filesystem::is_directory(snap_dir))
    for (const auto& e : std::filesystem::directory_iterator(snap_dir))
      if (e.path().extension() == ".txt") snaps.push_back(e.path());
  std::sort(snaps.begin(), snaps.end());
  for (const auto& sp : snaps) {
    const auto t = read_table(sp, "snapshot");
    auto p = out_dir / sp.filename();
    p.replace_extension(".csv");
    std::ofstream o(p, std::ios::binary);
    if (!o) throw Error(ErrorKind::io, "cannot write " + p.string());
    comment_block(o, t);
    o << "r,theta,density_B,density_A\n";
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
      const auto& row = t.rows[k];
      if (row.size() != 4) throw Error(ErrorKind::format, sp.string() + ": rows need 4 columns");
      if (k > 0 && row[0] != t.rows[k - 1][0]) o << "\n";
      for (std::size_t m = 0; m < 4; ++m) o << (m ? "," : "") << format_real(row[m]);
      o << "\n";
    }
    written.push_back(p);
  }
  return written;
}

}  // namespace nadvqe
