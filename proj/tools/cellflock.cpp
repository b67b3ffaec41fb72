#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cellflock/config.hpp"
#include "cellflock/experiment.hpp"
#include "cellflock/plot.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitConfigError = 2;

fs::path output_root() {
  if (const char* env = std::getenv("CELLFLOCK_OUT")) return env;
  return "out";
}

fs::path resolve_out(const std::string& cli_out, const std::string& cfg_out,
                     const std::string& fallback) {
  if (!cli_out.empty()) return cli_out;
  if (!cfg_out.empty()) return cfg_out;
  return output_root() / fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cellflock: collective cell dynamics simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int jobs = 1;

  auto* cmd_run = app.add_subcommand("run", "run a single simulation");
  cmd_run->add_option("config", config_path, "config file")->required();
  cmd_run->add_option("--seed", seed, "override the seed")
      ->each([&](const std::string&) { seed_given = true; });
  cmd_run->add_option("--out", out_dir, "output directory");

  auto* cmd_sweep = app.add_subcommand("sweep", "run a parameter sweep");
  cmd_sweep->add_option("config", config_path, "config file")->required();
  cmd_sweep->add_option("--out", out_dir, "output directory");
  cmd_sweep->add_option("--jobs", jobs, "parallel workers")
      ->check(CLI::PositiveNumber);

  std::string plot_input;
  auto* cmd_plot = app.add_subcommand("plot", "render plots from run output");
  cmd_plot->add_option("input", plot_input, "sweep dir, metrics or summary file")
      ->required();
  cmd_plot->add_option("--out", out_dir, "output directory");

  auto* cmd_validate = app.add_subcommand("validate", "check a config file");
  cmd_validate->add_option("config", config_path, "config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_validate->parsed()) {
      cellflock::load_config(config_path);
      std::cout << "ok\n";
      return kExitOk;
    }
    if (cmd_run->parsed()) {
      const cellflock::ExperimentConfig cfg = cellflock::load_config(config_path);
      const fs::path dir = resolve_out(out_dir, cfg.output.dir, "run");
      const std::uint64_t use_seed = seed_given ? seed : cfg.model.seed;
      const cellflock::RunOutcome outcome =
          cellflock::run_single(cfg, use_seed, dir);
      if (!outcome.ok) {
        std::cerr << "run failed: " << outcome.error << "\n";
        return kExitRunFailure;
      }
      std::cout << "tail phi " << outcome.tail_phi << ", vbar "
                << outcome.tail_vbar << ", phi_rot " << outcome.tail_phi_rot
                << " (" << outcome.wall_seconds << " s) -> " << dir.string()
                << "\n";
      return kExitOk;
    }
    if (cmd_sweep->parsed()) {
      const cellflock::ExperimentConfig cfg = cellflock::load_config(config_path);
      const fs::path dir = resolve_out(out_dir, cfg.output.dir, "sweep");
      const cellflock::SweepResult res = cellflock::run_sweep(cfg, dir, jobs);
      std::cout << res.rows.size() << " runs (" << res.skipped << " reused, "
                << res.failed << " failed) -> " << dir.string() << "\n";
      return res.failed == 0 ? kExitOk : kExitRunFailure;
    }
    if (cmd_plot->parsed()) {
      const fs::path dir =
          out_dir.empty() ? (fs::is_directory(plot_input)
                                 ? fs::path(plot_input)
                                 : fs::path(plot_input).parent_path())
                          : fs::path(out_dir);
      const auto written = cellflock::emit_plots(plot_input, dir);
      for (const auto& p : written) std::cout << p.string() << "\n";
      return kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    // config and input problems surface here; run failures return above
    return kExitConfigError;
  }
  return kExitOk;
}
