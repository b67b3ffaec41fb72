#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cellflock/domain.hpp"
#include "cellflock/polarity.hpp"
#include "cellflock/vec2.hpp"

namespace cellflock {

struct MetricsRecord {
  std::uint64_t step = 0;
  double t = 0.0;
  double phi = 0.0;      // polarity order parameter, in [0, 1]
  double vbar = 0.0;     // normalized mean speed, >= 0
  double phi_rot = 0.0;  // rotation order parameter, in [-1, 1]
  std::vector<double> regional_phi_rot;  // NaN marks an empty region
};

struct MetricsSeries {
  std::vector<MetricsRecord> records;
};

// phi = | (1/N) sum_k P_k |
inline double polarity_order(const AngleState& angles) {
  const std::size_t n = angles.theta.size();
  if (n == 0) throw std::invalid_argument("polarity_order: empty state");
  Vec2 s{};
  for (std::size_t k = 0; k < n; ++k) s += angles.polarity(k);
  return s.norm() / static_cast<double>(n);
}

// vbar = (1/(cN)) sum_k |V_k|
inline double mean_speed(const std::vector<Vec2>& v, double c) {
  if (c <= 0.0) throw std::invalid_argument("mean_speed: c must be > 0");
  if (v.empty()) throw std::invalid_argument("mean_speed: empty state");
  double s = 0.0;
  for (const auto& vk : v) s += vk.norm();
  return s / (c * static_cast<double>(v.size()));
}

// phi_rot = (1/N) sum_k P_k . e_k, with e_k the unit tangential vector about
// `center`. Cells sitting exactly at the center are skipped (N reduced).
inline double rotation_order(const AngleState& angles,
                             const std::vector<Vec2>& x, const Vec2& center) {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const Vec2 rel = x[k] - center;
    const double r = rel.norm();
    if (r == 0.0) continue;
    s += angles.polarity(k).dot(rel.perp() / r);
    ++n;
  }
  if (n == 0) throw std::invalid_argument("rotation_order: no off-center cells");
  return s / static_cast<double>(n);
}

// Arithmetic mean over samples with t >= 7T/8 (inclusive).
inline double tail_average(const std::vector<double>& t,
                           const std::vector<double>& values, double T) {
  if (t.size() != values.size()) {
    throw std::invalid_argument("tail_average: size mismatch");
  }
  const double lo = 7.0 * T / 8.0 - 1e-9 * T;
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] >= lo && t[i] <= T + 1e-9 * T) {
      sum += values[i];
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("tail_average: empty window");
  return sum / static_cast<double>(n);
}

// phi_rot restricted to annuli [r_lo, r_hi) about `center`; empty regions are
// reported as NaN.
inline std::vector<double> regional_rotation_order(
    const AngleState& angles, const std::vector<Vec2>& x, const Vec2& center,
    const std::vector<std::pair<double, double>>& annuli) {
  std::vector<double> sums(annuli.size(), 0.0);
  std::vector<std::size_t> counts(annuli.size(), 0);
  for (std::size_t k = 0; k < x.size(); ++k) {
    const Vec2 rel = x[k] - center;
    const double r = rel.norm();
    if (r == 0.0) continue;
    for (std::size_t a = 0; a < annuli.size(); ++a) {
      if (r >= annuli[a].first && r < annuli[a].second) {
        sums[a] += angles.polarity(k).dot(rel.perp() / r);
        ++counts[a];
      }
    }
  }
  std::vector<double> out(annuli.size());
  for (std::size_t a = 0; a < annuli.size(); ++a) {
    out[a] = counts[a] == 0 ? std::nan("")
                            : sums[a] / static_cast<double>(counts[a]);
  }
  return out;
}

struct Histogram {
  double bin_width = 0.0;
  std::vector<std::uint64_t> counts;  // uniform bins over [0, r_max)
  std::uint64_t overflow = 0;
};

inline Histogram pair_distance_histogram(const std::vector<Vec2>& x,
                                         const Domain& domain, double r_max,
                                         double bin_width) {
  if (r_max <= 0.0 || bin_width <= 0.0) {
    throw std::invalid_argument("pair_distance_histogram: bad bin spec");
  }
  Histogram h;
  h.bin_width = bin_width;
  h.counts.assign(static_cast<std::size_t>(std::ceil(r_max / bin_width)), 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double r = displacement(domain, x[i], x[j]).norm();
      if (r >= r_max) {
        ++h.overflow;
      } else {
        ++h.counts[static_cast<std::size_t>(r / bin_width)];
      }
    }
  }
  return h;
}

}  // namespace cellflock
