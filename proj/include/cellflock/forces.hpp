#pragma once

#include <stdexcept>
#include <vector>

#include "cellflock/domain.hpp"
#include "cellflock/neighbor.hpp"
#include "cellflock/vec2.hpp"

namespace cellflock {

struct ForceParams {
  double kappa = 1.0e4;    // rigidity (pN / um)
  double gamma = 1.0e-5;   // inverse friction (1 / pN / h * um)
  double Rc = 9.5;         // comfort radius (um)
  double Rint_ar = 19.0;   // attraction-repulsion interaction radius (um)

  void validate() const {
    if (kappa <= 0.0 || gamma <= 0.0 || Rc <= 0.0 || Rint_ar <= 0.0) {
      throw std::invalid_argument("force parameters must be strictly positive");
    }
  }
};

// W(r) = -kappa (r^2/2 - r^3/(6 Rc)). The pair force changes sign at r = 2 Rc:
// repulsive below, attractive above (up to the Rint_ar cutoff).
inline double pair_potential(double r, const ForceParams& p) {
  return -p.kappa * (r * r / 2.0 - r * r * r / (6.0 * p.Rc));
}

inline double pair_potential_derivative(double r, const ForceParams& p) {
  return -p.kappa * (r - r * r / (2.0 * p.Rc));
}

// Total soft force on each cell. The contribution of pair (k, j) on k is
// -W'(r) * dir_kj (dir_kj pointing from j toward k), so it is repulsive for
// r < 2 Rc; Newton's third law holds pairwise by construction.
inline std::vector<Vec2> total_force(const std::vector<Vec2>& x,
                                     const Domain& domain,
                                     const ForceParams& p) {
  std::vector<Vec2> f(x.size());
  for (const auto& [i, j] : neighbor_pairs(x, p.Rint_ar, domain)) {
    const Vec2 d = displacement(domain, x[j], x[i]);  // from j toward i
    const double r = d.norm();
    if (r == 0.0) {
      throw std::runtime_error("coincident cell centers in force evaluation");
    }
    const Vec2 fij = d * (-pair_potential_derivative(r, p) / r);
    f[i] += fij;
    f[j] -= fij;
  }
  return f;
}

}  // namespace cellflock
