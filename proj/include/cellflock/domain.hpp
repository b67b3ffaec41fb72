#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "cellflock/vec2.hpp"

namespace cellflock {

// Square [0,L)^2 with wraparound; pair distances use the minimum image.
struct PeriodicSquare {
  double L = 200.0;
};

// Square [0,L]^2 with four rigid walls.
struct WalledSquare {
  double L = 200.0;
};

// Disk of radius R around `center`.
struct DiskDomain {
  Vec2 center{0.0, 0.0};
  double R = 200.0 / std::sqrt(std::numbers::pi);
};

using DomainShape = std::variant<PeriodicSquare, WalledSquare, DiskDomain>;

struct Obstacle {
  Vec2 center;
  double radius = 7.5;
};

struct Domain {
  DomainShape shape;
  std::vector<Obstacle> obstacles;

  bool periodic() const { return std::holds_alternative<PeriodicSquare>(shape); }

  void validate() const {
    if (periodic() && !obstacles.empty()) {
      throw std::invalid_argument("periodic domain does not admit obstacles");
    }
    std::visit([](const auto& s) {
      using T = std::decay_t<decltype(s)>;
      if constexpr (std::is_same_v<T, DiskDomain>) {
        if (s.R <= 0.0) throw std::invalid_argument("disk radius must be > 0");
      } else {
        if (s.L <= 0.0) throw std::invalid_argument("domain size must be > 0");
      }
    }, shape);
    for (const auto& o : obstacles) {
      if (o.radius <= 0.0) throw std::invalid_argument("obstacle radius must be > 0");
    }
  }
};

// b - a, reduced to the minimum image for periodic domains. Each component of
// the periodic result lies in (-L/2, L/2].
inline Vec2 displacement(const Domain& domain, const Vec2& a, const Vec2& b) {
  Vec2 d = b - a;
  if (const auto* p = std::get_if<PeriodicSquare>(&domain.shape)) {
    const double L = p->L;
    d.x -= L * std::floor(d.x / L);
    if (d.x > 0.5 * L) d.x -= L;
    d.y -= L * std::floor(d.y / L);
    if (d.y > 0.5 * L) d.y -= L;
  }
  return d;
}

// Re-wraps a position into the fundamental cell [0,L)^2 (no-op otherwise).
inline Vec2 wrap_position(const Domain& domain, Vec2 x) {
  if (const auto* p = std::get_if<PeriodicSquare>(&domain.shape)) {
    const double L = p->L;
    x.x -= L * std::floor(x.x / L);
    x.y -= L * std::floor(x.y / L);
  }
  return x;
}

struct PairGap {
  double gap;  // ||Xi - Xj|| - 2 R0
  Vec2 dir;    // unit vector from Xj toward Xi (= grad of the gap wrt Xi)
};

inline PairGap pair_gap(const Domain& domain, const Vec2& xi, const Vec2& xj,
                        double R0) {
  const Vec2 d = displacement(domain, xj, xi);
  const double r = d.norm();
  if (r == 0.0) {
    throw std::runtime_error("coincident cell centers: state corrupted");
  }
  return {r - 2.0 * R0, d / r};
}

struct BoundaryGap {
  double gap;
  Vec2 normal;  // gradient of the gap wrt the cell position
  bool is_obstacle = false;
  int id = 0;  // wall id (0..3) or obstacle index
};

// One entry per wall (four for a walled square, one for a disk), plus one per
// obstacle. Periodic domains contribute nothing.
inline std::vector<BoundaryGap> boundary_gaps(const Domain& domain,
                                              const Vec2& xi, double R0) {
  std::vector<BoundaryGap> out;
  if (const auto* w = std::get_if<WalledSquare>(&domain.shape)) {
    const double L = w->L;
    out.push_back({xi.x - R0, {1.0, 0.0}, false, 0});
    out.push_back({L - xi.x - R0, {-1.0, 0.0}, false, 1});
    out.push_back({xi.y - R0, {0.0, 1.0}, false, 2});
    out.push_back({L - xi.y - R0, {0.0, -1.0}, false, 3});
  } else if (const auto* d = std::get_if<DiskDomain>(&domain.shape)) {
    const Vec2 rel = xi - d->center;
    const double r = rel.norm();
    if (r == 0.0) {
      throw std::runtime_error("cell exactly at disk center: normal undefined");
    }
    out.push_back({d->R - r - R0, -(rel / r), false, 0});
  }
  for (std::size_t k = 0; k < domain.obstacles.size(); ++k) {
    const auto& o = domain.obstacles[k];
    const Vec2 rel = xi - o.center;
    const double r = rel.norm();
    if (r == 0.0) {
      throw std::runtime_error("cell exactly at obstacle center: normal undefined");
    }
    out.push_back({r - R0 - o.radius, rel / r, true, static_cast<int>(k)});
  }
  return out;
}

inline double area(const Domain& domain) {
  return std::visit([](const auto& s) -> double {
    using T = std::decay_t<decltype(s)>;
    if constexpr (std::is_same_v<T, DiskDomain>) {
      return std::numbers::pi * s.R * s.R;
    } else {
      return s.L * s.L;
    }
  }, domain.shape);
}

// Packing fraction N pi R0^2 / area; obstacle area is not subtracted.
inline double density(int n_cells, double R0, const Domain& domain) {
  return static_cast<double>(n_cells) * std::numbers::pi * R0 * R0 / area(domain);
}

}  // namespace cellflock
