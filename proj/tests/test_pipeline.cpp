#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "nadvqe/pipeline.hpp"
#include "support/dense_dynamics.hpp"
#include "support/model_surfaces.hpp"

namespace fs = std::filesystem;
using namespace nadvqe;
using nlohmann::json;

namespace {

const fs::path synthetic_manifest = fs::path(NADVQE_TEST_DATA) / "synthetic_5x5" / "manifest.json";

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("nadvqe_pipeline_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path write_config(const fs::path& dir, const json& j) {
  const auto p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

json base_config(const fs::path& out) {
  return {{"format", "nadvqe-run"},
          {"version", 1},
          {"manifest", synthetic_manifest.string()},
          {"output_dir", out.string()},
          {"seed", 11},
          {"stages", {"surfaces"}}};
}

/// Full synthetic pipeline on a coarse dynamics grid, short propagation.
json full_config(const fs::path& out) {
  auto j = base_config(out);
  j["stages"] = {"surfaces", "nac", "interp", "dynamics"};
  j["grid"] = {{"n_r", 32}, {"n_theta", 32}, {"r_min", 0.9449}, {"r_max", 3.7352}, {"theta_min", 0.5236},
               {"theta_max", 3.1007}};
  j["dynamics"] = {{"t_final_fs", 3.0}, {"output_interval_fs", 0.2}, {"snapshots_fs", {0.0, 2.4}}};
  return j;
}

bool contains(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

GridSpec small_grid() {
  GridSpec g;
  g.n_r = g.n_theta = 16;
  g.r_min = 1.4;
  g.r_max = 2.4;
  g.theta_min = 1.3;
  g.theta_max = 2.3;
  return g;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(NADVQE_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(RunConfig, MinimalConfigIsValid) {
  const auto dir = scratch("minimal");
  const auto cfg = load_run_config(write_config(dir, base_config(dir / "out")));
  const auto rep = validate(cfg);
  EXPECT_TRUE(rep.fatal.empty()) << rep.fatal.front();
  EXPECT_EQ(cfg.seed, 11u);
  EXPECT_EQ(cfg.ssvqe.seed, 11u);
  EXPECT_EQ(cfg.stages, std::vector<Stage>{Stage::surfaces});
}

TEST(RunConfig, DefaultsMatchModuleDefaults) {
  json j = {{"format", "nadvqe-run"}, {"version", 1}, {"output_dir", "x"}};
  const auto c = parse_run_config(j, "/tmp/cfg.json");
  EXPECT_EQ(c.stages.size(), 4u);
  EXPECT_EQ(c.grid, GridSpec{});
  EXPECT_EQ(c.ssvqe.depth, 5u);
  EXPECT_DOUBLE_EQ(c.dynamics.mass.m, 1837.15);
  EXPECT_DOUBLE_EQ(c.dynamics.cap.eta, 0.05);
  EXPECT_EQ(c.dynamics.dt, 0.0);
  EXPECT_EQ(c.output_dir, fs::path("/tmp/x"));
}

TEST(RunConfig, MissingFcidumpNamesTheGeometry) {
  const auto dir = scratch("missing");
  auto m = json::parse(slurp(synthetic_manifest));
  const auto data = synthetic_manifest.parent_path();
  for (auto& p : m["points"]) {
    p["center"] = (data / p["center"].get<std::string>()).string();
    for (auto& [k, v] : p["displaced"].items()) v = (data / v.get<std::string>()).string();
  }
  m["points"][7]["center"] = (dir / "absent.fcidump").string();
  std::ofstream(dir / "manifest.json") << m.dump();
  auto j = base_config(dir / "out");
  j["manifest"] = (dir / "manifest.json").string();
  const auto rep = validate(load_run_config(write_config(dir, j)));
  ASSERT_EQ(rep.fatal.size(), 1u);
  EXPECT_NE(rep.fatal[0].find("absent.fcidump"), std::string::npos);
  EXPECT_NE(rep.fatal[0].find("(r=1.642475, theta=1.812150)"), std::string::npos) << rep.fatal[0];
}

TEST(RunConfig, InconsistentAngularSpacingReportsExpectedValue) {
  const auto dir = scratch("spacing");
  auto j = base_config(dir / "out");
  j["grid"] = {{"n_theta", 64}, {"theta_min", 0.5236}, {"theta_max", 3.1007}, {"dtheta", 0.0459}};
  auto rep = validate(load_run_config(write_config(dir, j)));
  ASSERT_EQ(rep.fatal.size(), 1u);
  EXPECT_NE(rep.fatal[0].find("expected 0.0409"), std::string::npos) << rep.fatal[0];

  j["grid"]["dtheta"] = 0.0409;
  j["grid"]["dr"] = 0.0443;
  rep = validate(load_run_config(write_config(dir, j)));
  EXPECT_TRUE(rep.fatal.empty());
}

TEST(RunConfig, SchemaViolationsThrow) {
  json j = {{"format", "nadvqe-run"}, {"version", 1}};
  auto bad = j;
  bad["grdi"] = json::object();
  EXPECT_THROW(parse_run_config(bad, "c.json"), Error);
  bad = j;
  bad["grid"] = {{"n_r", "many"}};
  EXPECT_THROW(parse_run_config(bad, "c.json"), Error);
  bad = j;
  bad["stages"] = {"surfaces", "fit"};
  EXPECT_THROW(parse_run_config(bad, "c.json"), Error);
  bad = j;
  bad["mass"] = "T";
  EXPECT_THROW(parse_run_config(bad, "c.json"), Error);
  bad = j;
  bad["version"] = 2;
  EXPECT_THROW(parse_run_config(bad, "c.json"), Error);
  try {
    parse_run_config(json{{"format", "nadvqe-run"}, {"version", 1}, {"dynamics", {{"dt", -1.0}}}}, "c.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::schema);
  }
}

TEST(RunConfig, UnreadableOrUnparseableFile) {
  const auto dir = scratch("unreadable");
  try {
    load_run_config(dir / "nope.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::io);
  }
  std::ofstream(dir / "broken.json") << "{\"format\": ";
  try {
    load_run_config(dir / "broken.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parse);
  }
}

TEST(RunConfig, StageChainRules) {
  const auto dir = scratch("chain");
  auto j = base_config(dir / "out");
  j["stages"] = {"surfaces", "interp"};
  auto rep = validate(load_run_config(write_config(dir, j)));
  EXPECT_TRUE(contains(rep.fatal, "contiguous"));

  j["stages"] = {"nac", "interp"};
  rep = validate(load_run_config(write_config(dir, j)));
  EXPECT_TRUE(contains(rep.fatal, "energies.txt"));

  j["stages"] = {"propagate"};
  rep = validate(load_run_config(write_config(dir, j)));
  EXPECT_TRUE(contains(rep.fatal, "surfaces.bin"));

  j["stages"] = {"dynamics"};
  j.erase("manifest");
  write_bundle(dir / "prebuilt.bin", model::coupled_small(small_grid()));
  j["dynamics"] = {{"bundle", (dir / "prebuilt.bin").string()}};
  rep = validate(load_run_config(write_config(dir, j)));
  EXPECT_TRUE(rep.fatal.empty());

  j["stages"] = json::array();
  rep = validate(load_run_config(write_config(dir, j)));
  EXPECT_FALSE(rep.ok());
}

TEST(RunConfig, GridOutsideManifestIsFatal) {
  const auto dir = scratch("hull");
  auto j = base_config(dir / "out");
  j["stages"] = {"surfaces", "nac", "interp"};
  j["grid"] = {{"r_max", 4.0}};
  const auto rep = validate(load_run_config(write_config(dir, j)));
  EXPECT_TRUE(contains(rep.fatal, "beyond the coarse manifest grid"));
}

TEST(RunConfig, HashIgnoresStagesAndOutputOnly) {
  json j = {{"format", "nadvqe-run"}, {"version", 1}, {"seed", 3}, {"output_dir", "a"}, {"stages", {"surfaces"}}};
  const auto h = parse_run_config(j, "c.json").hash;
  auto k = j;
  k["output_dir"] = "b";
  k["stages"] = {"nac"};
  EXPECT_EQ(parse_run_config(k, "c.json").hash, h);
  k["seed"] = 4;
  EXPECT_NE(parse_run_config(k, "c.json").hash, h);
  EXPECT_EQ(h.size(), 16u);
}

TEST(Run, PropagateOnlyWithPrebuiltBundle) {
  const auto dir = scratch("propagate_only");
  write_bundle(dir / "model.bin", model::conical_intersection(small_grid()));
  json j = {{"format", "nadvqe-run"},
            {"version", 1},
            {"output_dir", (dir / "out").string()},
            {"stages", {"propagate"}},
            {"dynamics", {{"bundle", (dir / "model.bin").string()}, {"t_final_fs", 1.0}, {"snapshots_fs", json::array()}}}};
  const auto cfg = load_run_config(write_config(dir, j));
  ASSERT_TRUE(validate(cfg).ok());
  const auto res = run(cfg);
  ASSERT_EQ(res.exit_code, 0) << res.message;
  const auto t = read_table(dir / "out" / artifact::populations, "populations");
  EXPECT_EQ(header_value(t, "config_hash"), cfg.hash);
  EXPECT_EQ(header_value(t, "stage"), "dynamics");
  EXPECT_FALSE(header_value(t, "version").empty());
  const double dt = std::stod(header_value(t, "dt_au"));
  const auto steps = static_cast<std::size_t>(std::llround(au_per_fs / dt));
  const auto stride = static_cast<std::size_t>(std::llround(0.1 * au_per_fs / dt));
  EXPECT_EQ(t.rows.size(), steps / stride + 1 + (steps % stride ? 1 : 0));
  EXPECT_NEAR(t.rows.back()[0], 1.0, dt / au_per_fs);
  EXPECT_NEAR(t.rows.front()[1], 1.0, 1e-12);
  EXPECT_TRUE(fs::exists(dir / "out" / "stage_dynamics.ok"));
  EXPECT_FALSE(fs::exists(dir / "out" / artifact::snapshots));
}

TEST(Run, FailingStageLeavesMarkerAndEarlierOutputs) {
  const auto dir = scratch("failing");
  fs::create_directories(dir / "out");
  write_bundle(dir / "out" / artifact::bundle, model::conical_intersection(small_grid()));
  json j = {{"format", "nadvqe-run"},
            {"version", 1},
            {"output_dir", (dir / "out").string()},
            {"stages", {"dynamics"}},
            {"dynamics", {{"dt", 5.0}, {"t_final_fs", 1.0}}}};
  const auto res = run(load_run_config(write_config(dir, j)));
  EXPECT_EQ(res.exit_code, 2);
  EXPECT_EQ(res.failed_stage, "dynamics");
  EXPECT_NE(slurp(dir / "out" / "stage_dynamics.failed").find("instability"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "out" / artifact::bundle));
  EXPECT_FALSE(fs::exists(dir / "out" / artifact::populations));

  j["dynamics"] = {{"t_final_fs", 1.0}};
  j["grid"] = {{"n_r", 20}};
  const auto mismatch = run(load_run_config(write_config(dir, j)));
  EXPECT_EQ(mismatch.exit_code, 1);
  EXPECT_NE(mismatch.message.find("differs from the configured grid"), std::string::npos);
}

class SyntheticRun : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new fs::path(scratch("synthetic"));
    cfg_ = new RunConfig(load_run_config(write_config(*dir_, full_config(*dir_ / "full"))));
    outcome_ = new RunOutcome(run(*cfg_, 4));
  }
  static void TearDownTestSuite() {
    delete outcome_;
    delete cfg_;
    delete dir_;
  }
  static fs::path* dir_;
  static RunConfig* cfg_;
  static RunOutcome* outcome_;
};

fs::path* SyntheticRun::dir_ = nullptr;
RunConfig* SyntheticRun::cfg_ = nullptr;
RunOutcome* SyntheticRun::outcome_ = nullptr;

TEST_F(SyntheticRun, AllStageFilesAndNormAudit) {
  ASSERT_EQ(outcome_->exit_code, 0) << outcome_->message;
  const auto out = cfg_->output_dir;
  for (const char* f : {artifact::energies, artifact::nac, artifact::bundle, artifact::populations})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  for (auto s : all_stages) EXPECT_TRUE(fs::exists(out / ("stage_" + std::string(stage_name(s)) + ".ok")));
  EXPECT_TRUE(fs::exists(out / artifact::snapshots / "snapshot_2.400fs.txt"));
  ASSERT_TRUE(outcome_->norm_drift.has_value());
  EXPECT_LE(*outcome_->norm_drift, cfg_->norm_tolerance);
  const auto pop = read_table(out / artifact::populations, "populations");
  for (const auto& row : pop.rows) EXPECT_NEAR(row[1] + row[2] + row[3] + row[4], row[5], 1e-12);
  EXPECT_GT(*outcome_->zero_point, 0.0);
  for (const char* f : {artifact::energies, artifact::nac})
    EXPECT_EQ(header_value(read_table(out / f, f == artifact::energies ? "energies" : "nac"), "config_hash"),
              cfg_->hash);
  EXPECT_NE(read_bundle(out / artifact::bundle).provenance.find(cfg_->hash), std::string::npos);
}

TEST_F(SyntheticRun, IdenticalSeedGivesByteIdenticalOutputs) {
  ASSERT_EQ(outcome_->exit_code, 0);
  auto j = full_config(*dir_ / "again");
  fs::create_directories(*dir_ / "cfg_again");
  const auto again = load_run_config(write_config(*dir_ / "cfg_again", j));
  ASSERT_EQ(run(again, 2).exit_code, 0);
  for (const char* f : {artifact::energies, artifact::nac, artifact::bundle, artifact::populations})
    EXPECT_EQ(slurp(cfg_->output_dir / f), slurp(again.output_dir / f)) << f;
  EXPECT_EQ(slurp(cfg_->output_dir / artifact::snapshots / "snapshot_2.400fs.txt"),
            slurp(again.output_dir / artifact::snapshots / "snapshot_2.400fs.txt"));
}

TEST_F(SyntheticRun, ResumeFromEnergiesMatchesFullRun) {
  ASSERT_EQ(outcome_->exit_code, 0);
  auto j = full_config(*dir_ / "resumed");
  j["stages"] = {"nac", "interp", "dynamics"};
  fs::create_directories(*dir_ / "resumed");
  fs::copy_file(cfg_->output_dir / artifact::energies, *dir_ / "resumed" / artifact::energies);
  const auto resumed = load_run_config(write_config(*dir_, j));
  ASSERT_TRUE(validate(resumed).ok());
  ASSERT_EQ(run(resumed).exit_code, 0);
  for (const char* f : {artifact::nac, artifact::bundle, artifact::populations})
    EXPECT_EQ(slurp(cfg_->output_dir / f), slurp(resumed.output_dir / f)) << f;
}

TEST_F(SyntheticRun, PlotDataHasOnePopulationTablePerRunAndOnePerSnapshot) {
  ASSERT_EQ(outcome_->exit_code, 0);
  const auto files = emit_plot_data(cfg_->output_dir, *dir_ / "plot");
  ASSERT_EQ(files.size(), 3u);
  EXPECT_EQ(files[0].filename(), "populations.csv");
  EXPECT_EQ(files[1].filename(), "snapshot_0.000fs.csv");
  EXPECT_EQ(files[2].filename(), "snapshot_2.400fs.csv");
  std::istringstream pop(slurp(files[0]));
  std::string line;
  std::size_t data = 0;
  bool header = false;
  while (std::getline(pop, line)) {
    if (line.rfind("t_fs,", 0) == 0) header = true;
    else if (!line.empty() && line[0] != '#') ++data;
  }
  EXPECT_TRUE(header);
  EXPECT_EQ(data, read_table(cfg_->output_dir / artifact::populations, "populations").rows.size());
}

TEST(PlotData, PopulationsOnlyWithoutSnapshots) {
  const auto dir = scratch("plot_nosnap");
  write_bundle(dir / "model.bin", model::conical_intersection(small_grid()));
  json j = {{"format", "nadvqe-run"},
            {"version", 1},
            {"output_dir", (dir / "out").string()},
            {"stages", {"dynamics"}},
            {"dynamics", {{"bundle", (dir / "model.bin").string()}, {"t_final_fs", 0.5}, {"snapshots_fs", json::array()}}}};
  ASSERT_EQ(run(load_run_config(write_config(dir, j))).exit_code, 0);
  const auto files = emit_plot_data(dir / "out");
  ASSERT_EQ(files.size(), 1u);
  EXPECT_EQ(files[0], dir / "out" / "plot" / "populations.csv");
}

TEST(PlotData, MissingArtifactsAreAnError) {
  const auto dir = scratch("plot_missing");
  try {
    emit_plot_data(dir);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::io);
  }
}

// Density maximum of the 2.4 fs snapshot against the dense exponential
// propagator on the small model grid, CAP off.
TEST(PlotData, SnapshotMaximumMatchesExactPropagation) {
  const auto dir = scratch("plot_oracle");
  const auto g = small_grid();
  const auto surf = model::conical_intersection(g, 0.05);
  write_bundle(dir / "model.bin", surf);
  json j = {{"format", "nadvqe-run"},
            {"version", 1},
            {"output_dir", (dir / "out").string()},
            {"stages", {"dynamics"}},
            {"cap", {{"enabled", false}}},
            {"dynamics", {{"bundle", (dir / "model.bin").string()}, {"t_final_fs", 2.4}, {"snapshots_fs", {2.4}}}}};
  ASSERT_EQ(run(load_run_config(write_config(dir, j))).exit_code, 0);
  const auto files = emit_plot_data(dir / "out");
  ASSERT_EQ(files.size(), 2u);

  std::vector<double> db, da;
  std::istringstream in(slurp(files[1]));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'r') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double r, t, b, a;
    ls >> r >> t >> b >> a;
    db.push_back(b);
    da.push_back(a);
  }
  ASSERT_EQ(db.size(), g.size());

  const auto chi0 = initial_wavepacket(surf.e_x, g, MassParams::hydrogen()).packet;
  const auto exact =
      oracle::exact_propagation(oracle::coupled_matrix(surf, MassParams::hydrogen().m), oracle::stack(chi0), 2.4 * au_per_fs);
  const auto n = static_cast<Eigen::Index>(g.size());
  auto argmax = [](const std::vector<double>& v) {
    return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  };
  std::vector<double> eb(g.size()), ea(g.size());
  for (Eigen::Index k = 0; k < n; ++k) {
    eb[static_cast<std::size_t>(k)] = std::norm(exact[k]);
    ea[static_cast<std::size_t>(k)] = std::norm(exact[n + k]);
  }
  auto within_one_cell = [&](std::size_t p, std::size_t q) {
    const auto di = static_cast<long>(p / g.n_theta) - static_cast<long>(q / g.n_theta);
    const auto dj = static_cast<long>(p % g.n_theta) - static_cast<long>(q % g.n_theta);
    return std::abs(di) <= 1 && std::abs(dj) <= 1;
  };
  EXPECT_TRUE(within_one_cell(argmax(db), argmax(eb)));
  EXPECT_TRUE(within_one_cell(argmax(da), argmax(ea)));
  EXPECT_GT(*std::max_element(ea.begin(), ea.end()), 1e-6);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("cli");
  write_bundle(dir / "model.bin", model::conical_intersection(small_grid()));
  json ok = {{"format", "nadvqe-run"},
             {"version", 1},
             {"output_dir", (dir / "out").string()},
             {"stages", {"dynamics"}},
             {"dynamics", {{"bundle", (dir / "model.bin").string()}, {"t_final_fs", 0.5}, {"snapshots_fs", {0.0}}}}};
  const auto good = write_config(dir, ok).string();
  EXPECT_EQ(run_cli("validate " + good), 0);
  EXPECT_EQ(run_cli("dynamics -q " + good), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / artifact::populations));
  EXPECT_EQ(run_cli("plotdata " + (dir / "out").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "plot" / "snapshot_0.000fs.csv"));
  EXPECT_EQ(run_cli("run --stages surfaces " + good), 1);
  EXPECT_EQ(run_cli("validate " + (dir / "missing.json").string()), 1);
  EXPECT_EQ(run_cli("plotdata " + (dir / "nowhere").string()), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);

  auto unstable = ok;
  unstable["dynamics"]["dt"] = 5.0;
  fs::create_directories(dir / "u");
  EXPECT_EQ(run_cli("run " + write_config(dir / "u", unstable).string()), 2);
}
