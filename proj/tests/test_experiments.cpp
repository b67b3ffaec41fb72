#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cellflock/config.hpp"
#include "cellflock/experiment.hpp"
#include "cellflock/plot.hpp"

using namespace cellflock;
namespace fs = std::filesystem;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return load_config(in, "<test>");
}

fs::path temp_dir(const std::string& tag) {
  const fs::path p = fs::temp_directory_path() / ("cellflock_test_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("empty config yields the reference defaults") {
  const ExperimentConfig cfg = parse("");
  CHECK(cfg.model.N == 160);
  CHECK(cfg.model.R0 == 7.5);
  CHECK(cfg.model.dt == 0.01);
  CHECK(cfg.model.T == 20.0);
  CHECK(cfg.model.forces.kappa == 1e4);
  CHECK(cfg.model.forces.gamma == 1e-5);
  CHECK(cfg.model.forces.Rc == 9.5);
  CHECK(cfg.model.forces.Rint_ar == 19.0);
  CHECK(cfg.model.polarity.mu == 6.2);
  CHECK(cfg.model.polarity.delta == 6.2);
  CHECK(cfg.model.polarity.Dnoise == 0.96);
  CHECK(cfg.model.polarity.Rint_po == 60.0);
  CHECK(cfg.model.polarity.c == 21.6);
  CHECK(cfg.sweep.n_reps == 20);
  REQUIRE(std::holds_alternative<PeriodicSquare>(cfg.domain.shape));
  CHECK(std::get<PeriodicSquare>(cfg.domain.shape).L == 200.0);
}

TEST_CASE("config parsing") {
  const ExperimentConfig cfg = parse(
      "[polarity]\n"
      "D = 0.96\n"
      "delta = 0\n"
      "[domain]\n"
      "shape = disk\n"
      "[model]\n"
      "T = 5 # comment\n");
  CHECK(cfg.model.polarity.Dnoise == 0.96);
  CHECK(cfg.model.polarity.delta == 0.0);
  CHECK(cfg.model.T == 5.0);
  REQUIRE(std::holds_alternative<DiskDomain>(cfg.domain.shape));

  CHECK_THROWS_WITH(parse("[polarity]\nspeeed = 3\n"),
                    Catch::Matchers::ContainsSubstring("speeed"));
  CHECK_THROWS_WITH(parse("[model]\nT = fast\n"),
                    Catch::Matchers::ContainsSubstring("number"));
  CHECK_THROWS(parse("[model]\nN = 100\ndensity = 0.7\n"));
  CHECK_THROWS(parse("no_section = 1\n"));
}

TEST_CASE("density selects the documented cell counts") {
  CHECK(parse("[model]\ndensity = 0.707\n").model.N == 160);
  CHECK(parse("[model]\ndensity = 0.839\n").model.N == 190);
  CHECK(parse("[model]\ndensity = 0.810\n[domain]\nshape = square\n").model.N ==
        183);
}

TEST_CASE("obstacle presets leave a one-cell-diameter gap to the wall") {
  const ExperimentConfig cfg =
      parse("[domain]\nshape = square\nobstacles = four_sides\n");
  REQUIRE(cfg.domain.obstacles.size() == 4);
  const double R0 = cfg.model.R0;
  for (const Obstacle& ob : cfg.domain.obstacles) {
    double wall = std::min({ob.center.x, ob.center.y, 200.0 - ob.center.x,
                            200.0 - ob.center.y});
    CHECK(wall - ob.radius == Catch::Approx(2 * R0));
  }
  CHECK(parse("[domain]\nshape = square\nobstacles = four_corners\n")
            .domain.obstacles.size() == 4);
  CHECK_THROWS(parse("[domain]\nshape = periodic\nobstacles = center\n"));
  CHECK_THROWS(parse("[domain]\nshape = square\nobstacles = ring\n"));
}

TEST_CASE("sweep axes expand as a Cartesian product with enumerable seeds") {
  const ExperimentConfig cfg = parse(
      "[sweep]\n"
      "n_reps = 3\n"
      "base_seed = 100\n"
      "axis.polarity.D = 0, 2, 6\n"
      "axis.model.N = 40, 80\n");
  const auto points = sweep_points(cfg);
  REQUIRE(points.size() == 6);
  // axes are ordered by path: model.N before polarity.D
  CHECK(points[0].resolved.model.N == 40);
  CHECK(points[0].resolved.model.polarity.Dnoise == 0.0);
  CHECK(points[5].resolved.model.N == 80);
  CHECK(points[5].resolved.model.polarity.Dnoise == 6.0);

  CHECK_THROWS_WITH(parse("[sweep]\naxis.model.speeed = 1, 2\n"),
                    Catch::Matchers::ContainsSubstring("model.speeed"));
}

TEST_CASE("run_single writes metrics, trajectory and manifest quickly") {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentConfig cfg = parse(
      "[model]\n"
      "N = 40\n"
      "T = 0.1\n"
      "[output]\n"
      "trajectory = true\n");
  const fs::path dir = temp_dir("single");
  const RunOutcome out = run_single(cfg, 5, dir);
  REQUIRE(out.ok);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  CHECK(secs < 5.0);

  const CsvTable metrics = read_csv(dir / "metrics.csv");
  CHECK(metrics.column("phi").has_value());
  CHECK(metrics.column("vbar").has_value());
  CHECK(metrics.rows.size() == 2);  // the initial state and step 10

  const CsvTable traj = read_csv(dir / "trajectory.csv");
  CHECK(traj.column("theta").has_value());
  CHECK(traj.rows.size() % 40 == 0);

  std::ifstream mf(dir / "manifest.json");
  REQUIRE(mf.good());
  std::stringstream ss;
  ss << mf.rdbuf();
  CHECK(ss.str().find("\"status\": \"ok\"") != std::string::npos);
  CHECK(ss.str().find("\"seed\": 5") != std::string::npos);
}

TEST_CASE("sweeps write summaries and resume as a no-op") {
  ExperimentConfig cfg = parse(
      "[model]\n"
      "N = 20\n"
      "T = 0.05\n"
      "[sweep]\n"
      "n_reps = 2\n"
      "base_seed = 11\n"
      "axis.polarity.D = 0, 1\n");
  const fs::path dir = temp_dir("sweep");
  const SweepResult first = run_sweep(cfg, dir);
  CHECK(first.rows.size() == 4);
  CHECK(first.failed == 0);
  CHECK(first.skipped == 0);
  for (const SweepRow& row : first.rows) {
    CHECK(row.seed == 11 + static_cast<std::uint64_t>(row.rep));
  }
  const CsvTable summary = read_csv(dir / "summary.csv");
  CHECK(summary.rows.size() == 4);
  CHECK(summary.column("tail_phi").has_value());
  const CsvTable agg = read_csv(dir / "aggregates.csv");
  CHECK(agg.rows.size() == 2);
  CHECK(agg.column("tail_phi_median").has_value());

  // all four runs are reused, and the summary bytes do not change
  std::ifstream s1(dir / "summary.csv");
  std::stringstream before;
  before << s1.rdbuf();
  const SweepResult second = run_sweep(cfg, dir);
  CHECK(second.skipped == 4);
  std::ifstream s2(dir / "summary.csv");
  std::stringstream after;
  after << s2.rdbuf();
  CHECK(before.str() == after.str());

  // changing the config invalidates the cache
  cfg.model.polarity.mu = 3.0;
  const SweepResult third = run_sweep(cfg, dir);
  CHECK(third.skipped == 0);
}

TEST_CASE("plots are emitted for sweep and run outputs") {
  ExperimentConfig cfg = parse(
      "[model]\n"
      "N = 20\n"
      "T = 0.05\n"
      "[output]\n"
      "trajectory = true\n"
      "[sweep]\n"
      "n_reps = 2\n"
      "axis.polarity.D = 0, 1, 2\n");
  const fs::path dir = temp_dir("plots");
  run_sweep(cfg, dir);
  const auto band = emit_plots(dir, dir / "plots");
  REQUIRE(band.size() == 3);
  for (const auto& p : band) {
    CHECK(fs::exists(p));
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str().find("<svg") != std::string::npos);
    CHECK(ss.str().find("</svg>") != std::string::npos);
  }
  CHECK(fs::exists(dir / "plots" / "band_tail_phi.csv"));

  run_single(cfg, 3, dir / "single");
  const auto series = emit_plots(dir / "single", dir / "single" / "plots");
  CHECK(series.size() == 4);  // three panels plus the distance histogram

  // two numeric axes produce heatmaps
  ExperimentConfig grid = parse(
      "[model]\n"
      "N = 15\n"
      "T = 0.05\n"
      "[sweep]\n"
      "n_reps = 1\n"
      "axis.polarity.delta = 0, 6.2\n"
      "axis.polarity.mu = 0, 6.2\n");
  const fs::path gdir = temp_dir("grid");
  run_sweep(grid, gdir);
  const auto heat = emit_plots(gdir, gdir / "plots");
  CHECK(heat.size() == 3);
}
