#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nadvqe/pipeline.hpp"

namespace {

enum Exit { ok = 0, input_error = 1, numeric_failure = 2 };

int exit_for(const nadvqe::Error& e) { return e.is_numeric() ? numeric_failure : input_error; }

bool print_report(const nadvqe::ValidationReport& rep, bool quiet) {
  for (const auto& w : rep.warnings)
    if (!quiet) std::cerr << "warning: " << w << "\n";
  for (const auto& f : rep.fatal) std::cerr << "fatal: " << f << "\n";
  return rep.ok();
}

int do_validate(const std::string& path, bool quiet) {
  try {
    const auto cfg = nadvqe::load_run_config(path);
    const auto rep = nadvqe::validate(cfg);
    print_report(rep, quiet);
    if (!rep.ok()) return input_error;
    if (!quiet) std::cout << path << ": ok (config hash " << cfg.hash << ")\n";
    return ok;
  } catch (const nadvqe::Error& e) {
    std::cerr << e.what() << "\n";
    return input_error;
  }
}

int do_run(const std::string& path, const std::vector<std::string>& stages, bool verbose, bool quiet) {
  nadvqe::RunConfig cfg;
  try {
    cfg = nadvqe::load_run_config(path);
    if (!stages.empty()) {
      cfg.stages.clear();
      for (const auto& s : stages) cfg.stages.push_back(nadvqe::parse_stage(s));
    }
  } catch (const nadvqe::Error& e) {
    std::cerr << e.what() << "\n";
    return input_error;
  }
  if (!print_report(nadvqe::validate(cfg), quiet)) return input_error;
  const auto workers = nadvqe::default_workers();
  if (!quiet) std::cerr << "workers: " << workers << "\n";
  const auto res = nadvqe::run(cfg, workers, verbose ? &std::cerr : nullptr);
  if (res.exit_code != 0) {
    std::cerr << "stage " << res.failed_stage << " failed: " << res.message << "\n";
    return res.exit_code;
  }
  if (!quiet) {
    std::cout << "completed:";
    for (auto s : res.completed) std::cout << " " << nadvqe::stage_name(s);
    std::cout << "\noutput: " << cfg.output_dir.string() << "\n";
    if (res.zero_point) std::cout << "zero-point energy: " << nadvqe::format_real(*res.zero_point) << " hartree\n";
    if (res.norm_drift) std::cout << "max norm drift: " << nadvqe::format_real(*res.norm_drift) << "\n";
  }
  return ok;
}

int do_plotdata(const std::string& dir, const std::string& out, bool quiet) {
  try {
    const auto files = nadvqe::emit_plot_data(dir, out);
    if (!quiet)
      for (const auto& f : files) std::cout << f.string() << "\n";
    return ok;
  } catch (const nadvqe::Error& e) {
    std::cerr << e.what() << "\n";
    return exit_for(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SSVQE surfaces, couplings and two-surface wavepacket dynamics"};
  app.require_subcommand(1);
  app.fallthrough();
  bool verbose = false, quiet = false;
  app.add_flag("-v,--verbose", verbose, "Log stage progress to stderr");
  app.add_flag("-q,--quiet", quiet, "Only print errors");
  app.set_version_flag("--version", nadvqe::version_string);
  app.footer(std::string("Worker threads: ") + nadvqe::workers_env +
             " (default: hardware concurrency).\nExit codes: 0 ok, 1 input error, 2 numeric failure.");

  std::string config;
  auto* validate = app.add_subcommand("validate", "Check a run config and its inputs");
  validate->add_option("config", config, "Run config (JSON)")->required();

  std::vector<std::string> stages;
  auto* run = app.add_subcommand("run", "Run the configured stages");
  run->add_option("config", config, "Run config (JSON)")->required();
  run->add_option("--stages", stages, "Override the stage selection")->delimiter(',');

  std::vector<CLI::App*> single;
  for (auto s : nadvqe::all_stages) {
    const std::string name = nadvqe::stage_name(s);
    auto* sub = app.add_subcommand(name, "Run only the " + name + " stage");
    sub->add_option("config", config, "Run config (JSON)")->required();
    single.push_back(sub);
  }

  std::string run_dir, plot_out;
  auto* plot = app.add_subcommand("plotdata", "Write plot-ready CSV tables from a finished run");
  plot->add_option("run_dir", run_dir, "Output directory of a run")->required();
  plot->add_option("-o,--out", plot_out, "Destination (default: <run_dir>/plot)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? ok : input_error;
  }

  if (*validate) return do_validate(config, quiet);
  if (*run) return do_run(config, stages, verbose, quiet);
  if (*plot) return do_plotdata(run_dir, plot_out, quiet);
  for (std::size_t k = 0; k < single.size(); ++k)
    if (*single[k]) return do_run(config, {nadvqe::stage_name(nadvqe::all_stages[k])}, verbose, quiet);
  return input_error;
}
