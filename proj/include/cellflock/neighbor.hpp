#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "cellflock/domain.hpp"
#include "cellflock/vec2.hpp"

namespace cellflock {

using IndexPair = std::pair<int, int>;

namespace detail {

inline std::vector<IndexPair> brute_force_pairs(const std::vector<Vec2>& x,
                                                double cutoff,
                                                const Domain& domain) {
  std::vector<IndexPair> out;
  const double c2 = cutoff * cutoff;
  const int n = static_cast<int>(x.size());
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (displacement(domain, x[i], x[j]).norm2() <= c2) out.emplace_back(i, j);
    }
  }
  return out;
}

}  // namespace detail

// All pairs (i < j) with center distance <= cutoff, via a uniform cell list.
// Bin size is at least max(cutoff, extent/64); small grids fall back to the
// direct pair scan. The result is sorted lexicographically.
inline std::vector<IndexPair> neighbor_pairs(const std::vector<Vec2>& x,
                                             double cutoff,
                                             const Domain& domain) {
  if (cutoff <= 0.0) throw std::invalid_argument("cutoff must be > 0");
  const int n = static_cast<int>(x.size());
  if (n < 2) return {};

  // Bounding box of the domain.
  Vec2 origin{0.0, 0.0};
  double extent = 0.0;
  std::visit([&](const auto& s) {
    using T = std::decay_t<decltype(s)>;
    if constexpr (std::is_same_v<T, DiskDomain>) {
      origin = s.center - Vec2{s.R, s.R};
      extent = 2.0 * s.R;
    } else {
      extent = s.L;
    }
  }, domain.shape);

  const double min_bin = std::max(cutoff, extent / 64.0);
  const int nb = std::max(1, static_cast<int>(std::floor(extent / min_bin)));
  if (nb < 4) return detail::brute_force_pairs(x, cutoff, domain);

  const bool periodic = domain.periodic();
  const double bin = extent / nb;
  const auto bin_of = [&](const Vec2& p) -> std::pair<int, int> {
    int bx = static_cast<int>(std::floor((p.x - origin.x) / bin));
    int by = static_cast<int>(std::floor((p.y - origin.y) / bin));
    bx = std::clamp(bx, 0, nb - 1);
    by = std::clamp(by, 0, nb - 1);
    return {bx, by};
  };

  std::vector<std::vector<int>> cells(static_cast<std::size_t>(nb) * nb);
  for (int i = 0; i < n; ++i) {
    const auto [bx, by] = bin_of(x[i]);
    cells[static_cast<std::size_t>(by) * nb + bx].push_back(i);
  }

  std::vector<IndexPair> out;
  const double c2 = cutoff * cutoff;
  for (int by = 0; by < nb; ++by) {
    for (int bx = 0; bx < nb; ++bx) {
      const std::size_t self = static_cast<std::size_t>(by) * nb + bx;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          int ox = bx + dx;
          int oy = by + dy;
          if (periodic) {
            ox = (ox + nb) % nb;
            oy = (oy + nb) % nb;
          } else if (ox < 0 || oy < 0 || ox >= nb || oy >= nb) {
            continue;
          }
          const std::size_t other = static_cast<std::size_t>(oy) * nb + ox;
          if (other < self) continue;  // each unordered bin pair visited once
          for (const int i : cells[self]) {
            for (const int j : cells[other]) {
              if (other == self && j <= i) continue;
              if (displacement(domain, x[i], x[j]).norm2() <= c2) {
                out.emplace_back(std::min(i, j), std::max(i, j));
              }
            }
          }
        }
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace cellflock
