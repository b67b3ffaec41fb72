#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "cellflock/contact.hpp"
#include "cellflock/domain.hpp"
#include "cellflock/forces.hpp"
#include "cellflock/metrics.hpp"
#include "cellflock/polarity.hpp"
#include "cellflock/rng.hpp"
#include "cellflock/vec2.hpp"

namespace cellflock {

struct ModelParams {
  int N = 160;
  double R0 = 7.5;
  ForceParams forces;
  PolarityParams polarity;
  double dt = 1e-2;
  double T = 20.0;
  std::uint64_t seed = 1;
  UzawaParams uzawa;
  double activation = 7.5;  // constraint activation cutoff on gaps (um)
  int save_every = 10;
  int relax_budget = 10000;

  void validate() const {
    if (N < 1) throw std::invalid_argument("N must be >= 1");
    if (R0 <= 0.0) throw std::invalid_argument("R0 must be > 0");
    if (dt <= 0.0) throw std::invalid_argument("dt must be > 0");
    if (T < dt) throw std::invalid_argument("T must be >= dt");
    if (activation <= 0.0) throw std::invalid_argument("activation must be > 0");
    if (save_every < 1) throw std::invalid_argument("save_every must be >= 1");
    forces.validate();
    polarity.validate();
    uzawa.validate();
  }
};

struct SimState {
  std::vector<Vec2> x;
  std::vector<Vec2> v;
  AngleState angles;
  std::uint64_t step = 0;
  // Monotone noise counter; never reset, so relaxation and production steps
  // draw from disjoint parts of the stream.
  std::uint64_t rng_counter = 0;
};

struct StepStats {
  std::uint64_t uzawa_iters = 0;
  bool uzawa_converged = true;
};

inline Vec2 domain_center(const Domain& domain) {
  return std::visit([](const auto& s) -> Vec2 {
    using T = std::decay_t<decltype(s)>;
    if constexpr (std::is_same_v<T, DiskDomain>) {
      return s.center;
    } else {
      return {s.L / 2.0, s.L / 2.0};
    }
  }, domain.shape);
}

struct GapAudit {
  double min_pair_gap = std::numeric_limits<double>::infinity();
  double min_boundary_gap = std::numeric_limits<double>::infinity();

  double min_gap() const { return std::min(min_pair_gap, min_boundary_gap); }
};

inline GapAudit audit_gaps(const std::vector<Vec2>& x, const Domain& domain,
                           double R0) {
  GapAudit a;
  for (const auto& [i, j] : neighbor_pairs(x, 2.0 * R0, domain)) {
    a.min_pair_gap = std::min(
        a.min_pair_gap, pair_gap(domain, x[static_cast<std::size_t>(i)],
                                 x[static_cast<std::size_t>(j)], R0).gap);
  }
  for (const auto& xi : x) {
    for (const auto& b : boundary_gaps(domain, xi, R0)) {
      a.min_boundary_gap = std::min(a.min_boundary_gap, b.gap);
    }
  }
  return a;
}

namespace detail {

// Removes residual overlaps left by the approximately solved velocity
// projection (each at most a few rel_tol * c * dt, well under 1e-3 um) by
// pushing the offending pair or cell apart to exact contact. Gauss-Seidel
// sweeps in deterministic index order; returns false if overlaps survive
// max_sweeps.
inline bool resolve_overlaps(std::vector<Vec2>& x, const Domain& domain,
                             double R0, double tol, int max_sweeps = 20000) {
  // Each violated contact is reflected through exact contact (new gap =
  // +|old gap|), capped at a small clearance. Projecting to the boundary
  // alone ripples through large contact clusters too slowly; a fixed
  // positive clearance target overshoots tiny violations and feeds a limit
  // cycle in jammed packings; and uncapped reflection blows up on the large
  // overlaps seen during initialization. The capped proportional overshoot
  // decays geometrically in all three regimes.
  const double max_clearance = 1e-3;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool any = false;
    for (const auto& [i, j] : neighbor_pairs(x, 2.0 * R0, domain)) {
      auto& xi = x[static_cast<std::size_t>(i)];
      auto& xj = x[static_cast<std::size_t>(j)];
      const PairGap g = pair_gap(domain, xi, xj, R0);
      if (g.gap < -tol) {
        const double target = std::min(-g.gap, max_clearance);
        const Vec2 push = g.dir * (0.5 * (target - g.gap));
        xi = wrap_position(domain, xi + push);
        xj = wrap_position(domain, xj - push);
        any = true;
      }
    }
    for (auto& xk : x) {
      for (const auto& b : boundary_gaps(domain, xk, R0)) {
        if (b.gap < -tol) {
          const double target = std::min(-b.gap, max_clearance);
          xk = wrap_position(domain, xk + b.normal * (target - b.gap));
          any = true;
        }
      }
    }
    if (!any) return true;
  }
  return false;
}

// Advance one time step: polarity angles, projected velocities, positions.
// allow_overlap disables the admissibility checks (used during the
// initialization relaxation, which starts from overlapping configurations).
inline StepStats step_impl(SimState& s, const ModelParams& p,
                           const Domain& domain, bool allow_overlap) {
  const std::size_t n = s.x.size();

  std::vector<double> noise(n);
  for (std::size_t k = 0; k < n; ++k) {
    noise[k] = rng_normal(p.seed, s.rng_counter, k, RngChannel::step_noise);
  }
  s.angles = angle_step(s.angles, s.v, s.x, p.dt, noise, p.polarity, domain);

  const std::vector<Vec2> f = total_force(s.x, domain, p.forces);
  std::vector<Vec2> u(n);
  for (std::size_t k = 0; k < n; ++k) {
    u[k] = p.polarity.c * s.angles.polarity(k) + p.forces.gamma * f[k];
  }

  const ConstraintSet cs =
      assemble_constraints(s.x, domain, p.dt, p.R0, p.activation,
                           p.uzawa.overlap_tol, allow_overlap);
  UzawaParams up = p.uzawa;
  if (allow_overlap) {
    // Overlapping states make the linearized rows mutually inconsistent, so
    // the projection cannot converge anyway; a rough solve is enough for the
    // relaxation and the position-correction sweep below does the real work.
    up.max_iter = std::min<std::uint64_t>(up.max_iter, 300);
  }
  UzawaResult res = uzawa_project(u, cs, s.v, up);
  // During relaxation the state is overlapping by construction and the
  // projection routinely stalls on inconsistent rows; only warn in
  // production.
  if (!res.converged && !allow_overlap) {
    std::cerr << "[cellflock] warning: Uzawa hit max_iter at step " << s.step
              << " (residual " << res.max_violation << ")\n";
  }
  s.v = std::move(res.v);

  for (std::size_t k = 0; k < n; ++k) {
    s.x[k] = wrap_position(domain, s.x[k] + p.dt * s.v[k]);
  }
  // The projection is solved approximately and the constraints are
  // linearized (curved boundaries are overshot tangentially by O(dt^2)), so
  // tiny overlaps survive the position update. Push them back out here.
  if (!resolve_overlaps(s.x, domain, p.R0, 0.5 * p.uzawa.overlap_tol) &&
      !allow_overlap) {
    throw std::runtime_error("overlap resolution stalled at step " +
                             std::to_string(s.step + 1));
  }

  ++s.step;
  ++s.rng_counter;

  if (!allow_overlap) {
    const GapAudit a = audit_gaps(s.x, domain, p.R0);
    if (a.min_gap() < -p.uzawa.overlap_tol) {
      throw std::runtime_error(
          "post-step audit failed at step " + std::to_string(s.step) +
          ": min pair gap " + std::to_string(a.min_pair_gap) +
          ", min boundary gap " + std::to_string(a.min_boundary_gap));
    }
  }
  return {res.iters, res.converged};
}

}  // namespace detail

inline StepStats step(SimState& s, const ModelParams& p, const Domain& domain) {
  return detail::step_impl(s, p, domain, false);
}

// Runs full time steps until the configuration is admissible. Returns the
// number of relaxation steps taken; the step counter is reset to 0 afterward
// (the noise counter keeps running).
inline int relax_overlaps(SimState& s, const ModelParams& p,
                          const Domain& domain) {
  for (int it = 0;; ++it) {
    const GapAudit a = audit_gaps(s.x, domain, p.R0);
    if (a.min_gap() >= -p.uzawa.overlap_tol) {
      s.step = 0;
      return it;
    }
    if (it >= p.relax_budget) {
      throw std::runtime_error(
          "relax_overlaps: configuration still inadmissible after " +
          std::to_string(p.relax_budget) + " steps (min gap " +
          std::to_string(a.min_gap()) + ")");
    }
    detail::step_impl(s, p, domain, true);
  }
}

// Uniform positions (rejection-sampled off walls and obstacles; transient
// pair overlaps are left to the relaxation), uniform angles, velocities c P.
inline SimState initialize(const ModelParams& p, const Domain& domain) {
  p.validate();
  domain.validate();
  if (density(p.N, p.R0, domain) >= 0.906) {
    throw std::runtime_error("infeasible packing: density " +
                             std::to_string(density(p.N, p.R0, domain)) +
                             " >= 0.906");
  }
  if (std::sqrt(2.0 * p.polarity.Dnoise * p.dt) > 0.5) {
    std::cerr << "[cellflock] warning: per-step angular noise sd "
              << std::sqrt(2.0 * p.polarity.Dnoise * p.dt)
              << " rad exceeds 0.5; decrease dt\n";
  }

  Vec2 origin{0.0, 0.0};
  double ext = 0.0;
  std::visit([&](const auto& sh) {
    using T = std::decay_t<decltype(sh)>;
    if constexpr (std::is_same_v<T, DiskDomain>) {
      origin = sh.center - Vec2{sh.R, sh.R};
      ext = 2.0 * sh.R;
    } else {
      ext = sh.L;
    }
  }, domain.shape);

  SimState s;
  s.x.resize(static_cast<std::size_t>(p.N));
  s.v.resize(static_cast<std::size_t>(p.N));
  s.angles.theta.resize(static_cast<std::size_t>(p.N));
  for (int k = 0; k < p.N; ++k) {
    bool placed = false;
    for (std::uint64_t attempt = 0; attempt < 1000000; ++attempt) {
      const Vec2 cand{
          origin.x + ext * rng_uniform(p.seed, attempt, static_cast<std::uint64_t>(k),
                                       RngChannel::init_position, 0),
          origin.y + ext * rng_uniform(p.seed, attempt, static_cast<std::uint64_t>(k),
                                       RngChannel::init_position, 1)};
      if (const auto* d = std::get_if<DiskDomain>(&domain.shape)) {
        if ((cand - d->center).norm() > d->R) continue;
      }
      bool ok = true;
      for (const auto& b : boundary_gaps(domain, cand, p.R0)) {
        if (b.gap < 0.0) { ok = false; break; }
      }
      if (!ok) continue;
      s.x[static_cast<std::size_t>(k)] = cand;
      placed = true;
      break;
    }
    if (!placed) {
      throw std::runtime_error("initialize: failed to place cell " +
                               std::to_string(k));
    }
    const double theta =
        2.0 * std::numbers::pi *
        rng_uniform(p.seed, 0, static_cast<std::uint64_t>(k), RngChannel::init_angle);
    s.angles.theta[static_cast<std::size_t>(k)] = theta;
    s.v[static_cast<std::size_t>(k)] = p.polarity.c * unit_from_angle(theta);
  }
  relax_overlaps(s, p, domain);
  return s;
}

struct RunCallbacks {
  // Invoked for the initial state and then every save_every steps.
  std::function<void(const SimState&, const MetricsRecord&)> on_sample;
};

struct RunResult {
  SimState state;
  MetricsSeries series;
  double tail_phi = 0.0;
  double tail_vbar = 0.0;
  double tail_phi_rot = 0.0;
  std::uint64_t uzawa_iters_total = 0;
  int relax_steps = 0;
  bool uzawa_warning = false;
};

inline MetricsRecord sample_metrics(const SimState& s, const ModelParams& p,
                                    const Domain& domain, double t) {
  MetricsRecord r;
  r.step = s.step;
  r.t = t;
  r.phi = polarity_order(s.angles);
  r.vbar = mean_speed(s.v, p.polarity.c);
  const Vec2 center = domain_center(domain);
  r.phi_rot = rotation_order(s.angles, s.x, center);
  if (const auto* d = std::get_if<DiskDomain>(&domain.shape)) {
    // Equal-area split: inner disk r < R/sqrt(2), outer ring beyond.
    const double rsplit = d->R / std::sqrt(2.0);
    r.regional_phi_rot = regional_rotation_order(
        s.angles, s.x, center, {{0.0, rsplit}, {rsplit, d->R + p.R0}});
  }
  return r;
}

// Full deterministic run: initialize, then ceil(T/dt) steps. The metrics
// series is sampled every save_every steps; tail averages accumulate every
// step with t >= 7T/8.
inline RunResult run(const ModelParams& p, const Domain& domain,
                     const RunCallbacks& callbacks = {}) {
  RunResult out;
  out.state = initialize(p, domain);
  SimState& s = out.state;
  out.relax_steps = s.rng_counter > 0 ? static_cast<int>(s.rng_counter) : 0;

  const std::uint64_t n_steps =
      static_cast<std::uint64_t>(std::ceil(p.T / p.dt - 1e-12));
  const double tail_lo = 7.0 * p.T / 8.0 - 1e-9 * p.T;
  double tail_phi = 0.0, tail_vbar = 0.0, tail_phi_rot = 0.0;
  std::uint64_t tail_n = 0;

  MetricsRecord rec = sample_metrics(s, p, domain, 0.0);
  out.series.records.push_back(rec);
  if (callbacks.on_sample) callbacks.on_sample(s, rec);

  for (std::uint64_t n = 1; n <= n_steps; ++n) {
    const StepStats st = step(s, p, domain);
    out.uzawa_iters_total += st.uzawa_iters;
    out.uzawa_warning = out.uzawa_warning || !st.uzawa_converged;
    const double t = static_cast<double>(n) * p.dt;

    const bool sampled = n % static_cast<std::uint64_t>(p.save_every) == 0 ||
                         n == n_steps;
    const bool in_tail = t >= tail_lo;
    if (sampled || in_tail) {
      rec = sample_metrics(s, p, domain, t);
      if (in_tail) {
        tail_phi += rec.phi;
        tail_vbar += rec.vbar;
        tail_phi_rot += rec.phi_rot;
        ++tail_n;
      }
      if (sampled) {
        out.series.records.push_back(rec);
        if (callbacks.on_sample) callbacks.on_sample(s, rec);
      }
    }
  }
  if (tail_n > 0) {
    out.tail_phi = tail_phi / static_cast<double>(tail_n);
    out.tail_vbar = tail_vbar / static_cast<double>(tail_n);
    out.tail_phi_rot = tail_phi_rot / static_cast<double>(tail_n);
  }
  return out;
}

}  // namespace cellflock
