#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cellflock/domain.hpp"
#include "cellflock/neighbor.hpp"
#include "cellflock/vec2.hpp"

namespace cellflock {

enum class ConstraintKind { pair, wall, obstacle };

// One row of the linearized non-overlap system B V - D <= 0. A pair row
// couples two cells with opposite gradient blocks; wall and obstacle rows
// touch a single cell. The row coefficient on cell i is -dt * grad_i.
struct ConstraintRow {
  ConstraintKind kind;
  int i = 0;      // cell index
  int j = 0;      // other cell, wall id, or obstacle id
  double gap = 0; // D evaluated at X^n
  Vec2 grad_i;    // gradient of D wrt X_i
  Vec2 grad_j;    // gradient of D wrt X_j (pair rows only)
};

struct ConstraintSet {
  std::vector<ConstraintRow> rows;
  double dt = 0.0;

  // Row value of B V.
  double apply(const ConstraintRow& r, const std::vector<Vec2>& v) const {
    double s = r.grad_i.dot(v[static_cast<std::size_t>(r.i)]);
    if (r.kind == ConstraintKind::pair) {
      s += r.grad_j.dot(v[static_cast<std::size_t>(r.j)]);
    }
    return -dt * s;
  }
};

enum class UzawaVariant { paper, gauss_seidel };

struct UzawaParams {
  double h = 0.0;            // gradient step; 0 means auto = 1/(12 sqrt(2) dt^2)
  double rel_tol = 1e-2;     // relative stagnation threshold on V
  std::uint64_t max_iter = 100000;
  double overlap_tol = 1e-9; // admissibility tolerance on gaps (um)
  UzawaVariant variant = UzawaVariant::paper;

  void validate() const {
    if (h < 0.0 || rel_tol <= 0.0 || overlap_tol < 0.0) {
      throw std::invalid_argument("invalid Uzawa parameters");
    }
  }
};

inline double default_step(double dt) {
  if (dt <= 0.0) throw std::invalid_argument("dt must be > 0");
  return 1.0 / (12.0 * std::sqrt(2.0) * dt * dt);
}

// Rows for every pair, wall and obstacle gap below the activation cutoff.
// With allow_overlap unset, a gap below -overlap_tol means the caller fed an
// inadmissible state and is a hard error; relaxation passes allow_overlap.
inline ConstraintSet assemble_constraints(const std::vector<Vec2>& x,
                                          const Domain& domain, double dt,
                                          double R0, double activation,
                                          double overlap_tol = 1e-9,
                                          bool allow_overlap = false) {
  ConstraintSet cs;
  cs.dt = dt;
  const double cutoff = 2.0 * R0 + activation;
  for (const auto& [i, j] : neighbor_pairs(x, cutoff, domain)) {
    const PairGap g = pair_gap(domain, x[static_cast<std::size_t>(i)],
                               x[static_cast<std::size_t>(j)], R0);
    if (g.gap > activation) continue;
    if (!allow_overlap && g.gap < -overlap_tol) {
      throw std::runtime_error("assemble_constraints: pair gap " +
                               std::to_string(g.gap) + " below tolerance, state corrupted");
    }
    cs.rows.push_back({ConstraintKind::pair, i, j, g.gap, g.dir, -g.dir});
  }
  for (std::size_t k = 0; k < x.size(); ++k) {
    for (const auto& b : boundary_gaps(domain, x[k], R0)) {
      if (b.gap > activation) continue;
      if (!allow_overlap && b.gap < -overlap_tol) {
        throw std::runtime_error("assemble_constraints: boundary gap " +
                                 std::to_string(b.gap) + " below tolerance, state corrupted");
      }
      cs.rows.push_back({b.is_obstacle ? ConstraintKind::obstacle
                                       : ConstraintKind::wall,
                         static_cast<int>(k), b.id, b.gap, b.normal, Vec2{}});
    }
  }
  return cs;
}

struct UzawaResult {
  std::vector<Vec2> v;
  std::vector<double> lambda;
  std::uint64_t iters = 0;
  bool converged = true;
  double max_violation = 0.0;  // max of B V - D at exit
};

// Dual-ascent projection of the desired velocities onto the linearized
// admissible set:
//   V^(j+1) = U - B^T lambda^(j),
//   lambda^(j+1) = max(0, lambda^(j) + h (B V^(j) - D))
// (the multiplier update uses V^(j+1) under the gauss_seidel variant).
//
// Stopping is by stagnation of V relative to max(|V|, rel_tol |U|), plus
// componentwise feasibility B V - D <= rel_tol |V| dt. The |U| floor matters
// at jammed states where V contracts geometrically toward zero and the
// purely relative test would never fire. The extra safety factor keeps the
// returned V within a few rel_tol of the exact projection even when the
// slowest active mode contracts at a ratio near the threshold.
//
// The feasibility condition is essential: in congested contact networks the
// fixed-step dual ascent stalls (per-iteration progress drops below any
// stagnation threshold long before the multipliers are large enough), and a
// stagnation-only stop then returns velocities that still drive cells into
// each other. When that happens the iteration switches to row-wise dual
// sweeps with the exact per-row step (projected Gauss-Seidel), which reach
// the feasibility bound quickly even for degenerate jammed clusters.
inline constexpr double kUzawaStopSafety = 0.05;

// In dense contact networks the fixed-step iteration can cycle without ever
// stagnating (the active set keeps flipping), so it gets a bounded share of
// the budget before the row sweeps take over.
inline constexpr std::uint64_t kUzawaFixedPhaseCap = 200;

inline UzawaResult uzawa_project(const std::vector<Vec2>& u,
                                 const ConstraintSet& cs,
                                 const std::vector<Vec2>& v_init,
                                 const UzawaParams& p) {
  p.validate();
  const std::size_t n = u.size();
  const std::size_t m = cs.rows.size();
  if (m == 0) return {u, {}, 1, true, 0.0};
  if (v_init.size() != n) {
    throw std::invalid_argument("uzawa_project: V_init size mismatch");
  }

  const double h = p.h > 0.0 ? p.h : default_step(cs.dt);
  double u2 = 0.0;
  for (const auto& uk : u) u2 += uk.norm2();
  const double floor = std::max(p.rel_tol * std::sqrt(u2), 1e-300);

  std::vector<double> dprime(m);
  for (std::size_t r = 0; r < m; ++r) dprime[r] = cs.rows[r].gap;

  std::vector<Vec2> v = v_init;
  std::vector<Vec2> v_next(n);
  std::vector<double> lambda(m, 0.0);
  std::vector<double> bv(m);
  for (std::size_t r = 0; r < m; ++r) bv[r] = cs.apply(cs.rows[r], v);

  UzawaResult out;
  for (std::uint64_t it = 1; it <= p.max_iter; ++it) {
    // V^(j+1) = U - B^T lambda
    v_next = u;
    for (std::size_t r = 0; r < m; ++r) {
      const auto& row = cs.rows[r];
      const double w = cs.dt * lambda[r];
      v_next[static_cast<std::size_t>(row.i)] += row.grad_i * w;
      if (row.kind == ConstraintKind::pair) {
        v_next[static_cast<std::size_t>(row.j)] += row.grad_j * w;
      }
    }

    double max_violation = 0.0;
    double diff2 = 0.0;
    double norm2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      diff2 += (v_next[k] - v[k]).norm2();
      norm2 += v_next[k].norm2();
    }
    if (p.variant == UzawaVariant::paper) {
      for (std::size_t r = 0; r < m; ++r) {
        lambda[r] = std::max(0.0, lambda[r] + h * (bv[r] - dprime[r]));
      }
      for (std::size_t r = 0; r < m; ++r) {
        bv[r] = cs.apply(cs.rows[r], v_next);
        max_violation = std::max(max_violation, bv[r] - dprime[r]);
      }
    } else {
      for (std::size_t r = 0; r < m; ++r) {
        bv[r] = cs.apply(cs.rows[r], v_next);
        max_violation = std::max(max_violation, bv[r] - dprime[r]);
        lambda[r] = std::max(0.0, lambda[r] + h * (bv[r] - dprime[r]));
      }
    }
    v.swap(v_next);
    out.iters = it;
    out.max_violation = max_violation;
    const double rel =
        std::sqrt(diff2) / std::max(std::sqrt(norm2), floor);
    if (rel < kUzawaStopSafety * p.rel_tol) {
      const double feas =
          std::max(p.rel_tol * cs.dt * std::sqrt(norm2), p.overlap_tol);
      if (max_violation <= feas) {
        out.converged = true;
        out.v = std::move(v);
        out.lambda = std::move(lambda);
        return out;
      }
      // Stagnant but infeasible: the fixed-step ascent has stalled (the
      // first iterate is always U itself, so give the multipliers at least
      // one chance to act before concluding that). Finish with row sweeps.
      if (it > 1) break;
    }
    if (it >= kUzawaFixedPhaseCap) break;
  }

  // Row-wise dual sweeps: each row is solved exactly in its own multiplier
  // (step 1 / (dt^2 |grad|^2), projected to lambda >= 0) with the velocity
  // updated in place, so progress on one row is visible to the next. On
  // overlapping states (relaxation) the linearized rows can be mutually
  // inconsistent; the violation then plateaus at the least-squares compromise
  // and the sweep gives up instead of burning the whole budget.
  double best_violation = std::numeric_limits<double>::infinity();
  int stalled_sweeps = 0;
  while (out.iters < p.max_iter) {
    ++out.iters;
    for (std::size_t r = 0; r < m; ++r) {
      const auto& row = cs.rows[r];
      double g2 = row.grad_i.norm2();
      if (row.kind == ConstraintKind::pair) g2 += row.grad_j.norm2();
      const double resid = cs.apply(row, v) - dprime[r];
      const double lam =
          std::max(0.0, lambda[r] + resid / (cs.dt * cs.dt * g2));
      const double dl = lam - lambda[r];
      if (dl != 0.0) {
        lambda[r] = lam;
        const double w = cs.dt * dl;
        v[static_cast<std::size_t>(row.i)] += row.grad_i * w;
        if (row.kind == ConstraintKind::pair) {
          v[static_cast<std::size_t>(row.j)] += row.grad_j * w;
        }
      }
    }
    double max_violation = 0.0;
    double norm2 = 0.0;
    for (const auto& vk : v) norm2 += vk.norm2();
    for (std::size_t r = 0; r < m; ++r) {
      max_violation = std::max(max_violation, cs.apply(cs.rows[r], v) - dprime[r]);
    }
    out.max_violation = max_violation;
    if (max_violation <=
        std::max(p.rel_tol * cs.dt * std::sqrt(norm2), p.overlap_tol)) {
      out.converged = true;
      out.v = std::move(v);
      out.lambda = std::move(lambda);
      return out;
    }
    if (max_violation < best_violation * (1.0 - 1e-4)) {
      best_violation = max_violation;
      stalled_sweeps = 0;
    } else if (++stalled_sweeps >= 50) {
      break;
    }
  }
  out.converged = false;  // warning outcome: caller logs and continues
  out.v = std::move(v);
  out.lambda = std::move(lambda);
  return out;
}

}  // namespace cellflock
