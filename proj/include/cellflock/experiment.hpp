#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cellflock/config.hpp"
#include "cellflock/simulator.hpp"

namespace cellflock {

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return os.str();
}

inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

}  // namespace detail

struct RunOutcome {
  bool ok = false;
  std::string error;
  double tail_phi = std::nan("");
  double tail_vbar = std::nan("");
  double tail_phi_rot = std::nan("");
  std::uint64_t uzawa_iters = 0;
  int relax_steps = 0;
  double wall_seconds = 0.0;
};

// Runs one simulation and writes metrics.csv, optional trajectory.csv, and
// manifest.json into `dir`. Failures are captured in the manifest, not thrown.
inline RunOutcome run_single(ExperimentConfig cfg, std::uint64_t seed,
                             const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  cfg.model.seed = seed;
  fs::create_directories(dir);

  RunOutcome out;
  const auto t0 = std::chrono::steady_clock::now();

  std::ofstream metrics(dir / "metrics.csv");
  metrics << "step,t,phi,vbar,phi_rot";
  const bool regional = std::holds_alternative<DiskDomain>(cfg.domain.shape);
  if (regional) metrics << ",phi_rot_inner,phi_rot_outer";
  metrics << "\n";

  std::ofstream traj;
  if (cfg.output.trajectory) {
    traj.open(dir / "trajectory.csv");
    traj << "step,t,id,x,y,vx,vy,theta\n";
  }

  RunCallbacks cb;
  cb.on_sample = [&](const SimState& s, const MetricsRecord& r) {
    metrics << r.step << "," << detail::fmt(r.t) << "," << detail::fmt(r.phi)
            << "," << detail::fmt(r.vbar) << "," << detail::fmt(r.phi_rot);
    for (const double reg : r.regional_phi_rot) {
      metrics << "," << detail::fmt(reg);
    }
    metrics << "\n";
    if (traj.is_open()) {
      for (std::size_t k = 0; k < s.x.size(); ++k) {
        traj << r.step << "," << detail::fmt(r.t) << "," << k << ","
             << detail::fmt(s.x[k].x) << "," << detail::fmt(s.x[k].y) << ","
             << detail::fmt(s.v[k].x) << "," << detail::fmt(s.v[k].y) << ","
             << detail::fmt(s.angles.theta[k]) << "\n";
      }
    }
  };

  try {
    const RunResult res = run(cfg.model, cfg.domain, cb);
    out.ok = true;
    out.tail_phi = res.tail_phi;
    out.tail_vbar = res.tail_vbar;
    out.tail_phi_rot = res.tail_phi_rot;
    out.uzawa_iters = res.uzawa_iters_total;
    out.relax_steps = res.relax_steps;
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["seed"] = seed;
  manifest["config"] = serialize_config(cfg);
  manifest["config_hash"] = fnv1a(serialize_config(cfg));
  manifest["status"] = out.ok ? "ok" : "failed";
  if (!out.ok) manifest["error"] = out.error;
  manifest["tail_phi"] = out.tail_phi;
  manifest["tail_vbar"] = out.tail_vbar;
  manifest["tail_phi_rot"] = out.tail_phi_rot;
  manifest["uzawa_iters"] = out.uzawa_iters;
  manifest["relax_steps"] = out.relax_steps;
  manifest["wall_seconds"] = out.wall_seconds;
  std::ofstream(dir / "manifest.json") << manifest.dump(2) << "\n";
  return out;
}

struct SweepPoint {
  std::vector<std::string> values;  // one token per axis, axis order
  ExperimentConfig resolved;
};

inline std::vector<SweepPoint> sweep_points(const ExperimentConfig& cfg) {
  std::vector<SweepPoint> points{{{}, cfg}};
  for (const SweepAxis& axis : cfg.sweep.axes) {
    std::vector<SweepPoint> next;
    for (const SweepPoint& pt : points) {
      for (const std::string& v : axis.values) {
        SweepPoint np = pt;
        np.values.push_back(v);
        apply_axis(np.resolved, axis.path, v);
        next.push_back(std::move(np));
      }
    }
    points = std::move(next);
  }
  return points;
}

struct SweepRow {
  std::size_t point = 0;
  int rep = 0;
  std::uint64_t seed = 0;
  RunOutcome outcome;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::vector<SweepRow> rows;
  int skipped = 0;  // reused from a previous completed sweep
  int failed = 0;
};

// Cartesian product of axes x n_reps; resumable through per-run manifests.
inline SweepResult run_sweep(const ExperimentConfig& cfg,
                             const std::filesystem::path& out_dir,
                             int jobs = 1) {
  namespace fs = std::filesystem;
  if (cfg.sweep.axes.empty()) {
    throw std::runtime_error("run_sweep: config has no sweep axes");
  }
  SweepResult result;
  result.points = sweep_points(cfg);
  fs::create_directories(out_dir);

  struct Task {
    std::size_t point;
    int rep;
    std::uint64_t seed;
    fs::path dir;
  };
  std::vector<Task> tasks;
  for (std::size_t pi = 0; pi < result.points.size(); ++pi) {
    for (int rep = 0; rep < cfg.sweep.n_reps; ++rep) {
      tasks.push_back({pi, rep, cfg.sweep.base_seed + static_cast<std::uint64_t>(rep),
                       out_dir / ("p" + std::to_string(pi) + "_r" +
                                  std::to_string(rep))});
    }
  }

  result.rows.resize(tasks.size());
  std::atomic<std::size_t> cursor{0};
  std::atomic<int> skipped{0};
  const auto worker = [&] {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      SweepRow& row = result.rows[i];
      row.point = task.point;
      row.rep = task.rep;
      row.seed = task.seed;

      ExperimentConfig run_cfg = result.points[task.point].resolved;
      run_cfg.model.seed = task.seed;
      const std::uint64_t want_hash = fnv1a(serialize_config(run_cfg));

      const fs::path manifest_path = task.dir / "manifest.json";
      if (fs::exists(manifest_path)) {
        try {
          nlohmann::json m;
          std::ifstream(manifest_path) >> m;
          if (m.at("config_hash").get<std::uint64_t>() == want_hash &&
              m.at("status").get<std::string>() == "ok") {
            row.outcome.ok = true;
            row.outcome.tail_phi = m.at("tail_phi").get<double>();
            row.outcome.tail_vbar = m.at("tail_vbar").get<double>();
            row.outcome.tail_phi_rot = m.at("tail_phi_rot").get<double>();
            row.outcome.uzawa_iters = m.at("uzawa_iters").get<std::uint64_t>();
            row.outcome.relax_steps = m.at("relax_steps").get<int>();
            row.outcome.wall_seconds = m.at("wall_seconds").get<double>();
            ++skipped;
            continue;
          }
        } catch (const std::exception&) {
          // unreadable manifest: rerun below
        }
      }
      row.outcome = run_single(run_cfg, task.seed, task.dir);
    }
  };

  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  result.skipped = skipped.load();
  for (const SweepRow& row : result.rows) {
    if (!row.outcome.ok) ++result.failed;
  }

  // summary.csv: one row per (point, rep)
  std::ofstream summary(out_dir / "summary.csv");
  for (const SweepAxis& axis : cfg.sweep.axes) summary << axis.path << ",";
  summary << "rep,seed,tail_phi,tail_vbar,tail_phi_rot,uzawa_iters,"
             "relax_steps,wall_seconds,status,error\n";
  for (const SweepRow& row : result.rows) {
    for (const std::string& v : result.points[row.point].values) {
      summary << v << ",";
    }
    const RunOutcome& o = row.outcome;
    summary << row.rep << "," << row.seed << "," << detail::fmt(o.tail_phi)
            << "," << detail::fmt(o.tail_vbar) << ","
            << detail::fmt(o.tail_phi_rot) << "," << o.uzawa_iters << ","
            << o.relax_steps << "," << detail::fmt(o.wall_seconds) << ","
            << (o.ok ? "ok" : "failed") << "," << o.error << "\n";
  }
  summary.close();

  // aggregates.csv: mean and quartiles per point over successful reps
  std::ofstream agg(out_dir / "aggregates.csv");
  for (const SweepAxis& axis : cfg.sweep.axes) agg << axis.path << ",";
  agg << "n_ok";
  for (const char* m : {"tail_phi", "tail_vbar", "tail_phi_rot"}) {
    agg << "," << m << "_mean," << m << "_q1," << m << "_median," << m << "_q3";
  }
  agg << "\n";
  for (std::size_t pi = 0; pi < result.points.size(); ++pi) {
    std::vector<double> phi, vbar, rot;
    for (const SweepRow& row : result.rows) {
      if (row.point == pi && row.outcome.ok) {
        phi.push_back(row.outcome.tail_phi);
        vbar.push_back(row.outcome.tail_vbar);
        rot.push_back(row.outcome.tail_phi_rot);
      }
    }
    for (const std::string& v : result.points[pi].values) agg << v << ",";
    agg << phi.size();
    for (const std::vector<double>* vals : {&phi, &vbar, &rot}) {
      double mean = std::nan("");
      if (!vals->empty()) {
        mean = 0.0;
        for (const double v : *vals) mean += v;
        mean /= static_cast<double>(vals->size());
      }
      agg << "," << detail::fmt(mean) << ","
          << detail::fmt(detail::quantile(*vals, 0.25)) << ","
          << detail::fmt(detail::quantile(*vals, 0.5)) << ","
          << detail::fmt(detail::quantile(*vals, 0.75));
    }
    agg << "\n";
  }
  agg.close();

  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = serialize_config(cfg);
  manifest["config_hash"] = fnv1a(serialize_config(cfg));
  manifest["n_points"] = result.points.size();
  manifest["n_reps"] = cfg.sweep.n_reps;
  manifest["failed"] = result.failed;
  std::ofstream(out_dir / "manifest.json") << manifest.dump(2) << "\n";
  return result;
}

}  // namespace cellflock
