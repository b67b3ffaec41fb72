#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cellflock/domain.hpp"
#include "cellflock/neighbor.hpp"
#include "cellflock/vec2.hpp"

namespace cellflock {

struct PolarityParams {
  double mu = 6.2;       // relaxation to the local mean polarity (rad / h)
  double delta = 6.2;    // relaxation to the velocity direction (rad / h)
  double Dnoise = 0.96;  // angular diffusion (rad^2 / h)
  double Rint_po = 60.0; // polarity interaction radius (um)
  double c = 21.6;       // cell speed (um / h)

  void validate() const {
    if (mu < 0.0 || delta < 0.0 || Dnoise < 0.0) {
      throw std::invalid_argument("mu, delta, D must be >= 0");
    }
    if (Rint_po <= 0.0 || c <= 0.0) {
      throw std::invalid_argument("Rint_po and c must be > 0");
    }
  }
};

// Polarity angles; P_k = (cos theta_k, sin theta_k) has unit norm by
// construction. Angles are kept in [0, 2pi).
struct AngleState {
  std::vector<double> theta;

  Vec2 polarity(std::size_t k) const { return unit_from_angle(theta[k]); }
};

inline double wrap_angle_2pi(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a < 0.0) a += two_pi;
  return a;
}

// Wraps an angular difference into (-pi, pi].
inline double wrap_angle_pi(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

// Normalized sum of polarities over neighbors within Rint_po, including the
// cell itself. Falls back to the cell's own polarity if the sum degenerates.
inline std::vector<Vec2> mean_polarities(const std::vector<Vec2>& x,
                                         const AngleState& angles,
                                         const Domain& domain,
                                         const PolarityParams& p) {
  const std::size_t n = x.size();
  std::vector<Vec2> sum(n);
  for (std::size_t k = 0; k < n; ++k) sum[k] = angles.polarity(k);
  for (const auto& [i, j] : neighbor_pairs(x, p.Rint_po, domain)) {
    sum[i] += angles.polarity(j);
    sum[j] += angles.polarity(i);
  }
  for (std::size_t k = 0; k < n; ++k) {
    const double norm = sum[k].norm();
    sum[k] = norm < 1e-12 ? angles.polarity(k) : sum[k] / norm;
  }
  return sum;
}

inline Vec2 mean_polarity(std::size_t k, const std::vector<Vec2>& x,
                          const AngleState& angles, const Domain& domain,
                          const PolarityParams& p) {
  return mean_polarities(x, angles, domain, p)[k];
}

// One step of the norm-preserving semi-implicit angle scheme:
//   theta' = theta + 2 (Qhat - theta) + sqrt(2 D dt) xi,
//   Q = P + dt/2 [mu (Pbar - P) + delta (V/|V| - P)],
// with the angular difference Qhat - theta wrapped into (-pi, pi]. The
// delta-term is omitted for cells at standstill (|V| < 1e-9 c).
inline AngleState angle_step(const AngleState& angles,
                             const std::vector<Vec2>& v,
                             const std::vector<Vec2>& x, double dt,
                             const std::vector<double>& noise,
                             const PolarityParams& p, const Domain& domain) {
  if (dt <= 0.0) throw std::invalid_argument("dt must be > 0");
  const std::size_t n = angles.theta.size();
  if (noise.size() != n || v.size() != n || x.size() != n) {
    throw std::invalid_argument("angle_step: inconsistent state sizes");
  }
  const std::vector<Vec2> pbar = mean_polarities(x, angles, domain, p);
  AngleState out;
  out.theta.resize(n);
  const double amp = std::sqrt(2.0 * p.Dnoise * dt);
  for (std::size_t k = 0; k < n; ++k) {
    const Vec2 pk = angles.polarity(k);
    Vec2 q = pk + (dt / 2.0) * (p.mu * (pbar[k] - pk));
    const double vnorm = v[k].norm();
    if (vnorm >= 1e-9 * p.c) {
      q += (dt / 2.0) * (p.delta * (v[k] / vnorm - pk));
    }
    if (q.x == 0.0 && q.y == 0.0) {
      throw std::runtime_error("angle_step: degenerate polar angle (Q = 0)");
    }
    const double theta = angles.theta[k];
    const double dtheta = wrap_angle_pi(q.angle() - theta);
    out.theta[k] = wrap_angle_2pi(theta + 2.0 * dtheta + amp * noise[k]);
  }
  return out;
}

}  // namespace cellflock
