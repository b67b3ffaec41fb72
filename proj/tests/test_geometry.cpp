#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "cellflock/domain.hpp"
#include "cellflock/neighbor.hpp"
#include "cellflock/rng.hpp"

using namespace cellflock;

namespace {

Domain periodic(double L) { return {PeriodicSquare{L}, {}}; }
Domain walled(double L) { return {WalledSquare{L}, {}}; }
Domain disk(Vec2 c, double R) { return {DiskDomain{c, R}, {}}; }

std::vector<Vec2> random_positions(const Domain& dom, int n, std::uint64_t seed) {
  Vec2 origin{0, 0};
  double ext = 200.0;
  std::visit([&](const auto& s) {
    using T = std::decay_t<decltype(s)>;
    if constexpr (std::is_same_v<T, DiskDomain>) {
      origin = s.center - Vec2{s.R, s.R};
      ext = 2 * s.R;
    } else {
      ext = s.L;
    }
  }, dom.shape);
  std::vector<Vec2> x;
  for (int k = 0; static_cast<int>(x.size()) < n; ++k) {
    Vec2 cand{origin.x + ext * rng_uniform(seed, k, 0, RngChannel::init_position, 0),
              origin.y + ext * rng_uniform(seed, k, 0, RngChannel::init_position, 1)};
    if (const auto* d = std::get_if<DiskDomain>(&dom.shape)) {
      if ((cand - d->center).norm() > 0.95 * d->R) continue;
    }
    x.push_back(cand);
  }
  return x;
}

}  // namespace

TEST_CASE("displacement follows the minimum image convention") {
  const Domain per = periodic(200.0);
  const Vec2 d1 = displacement(per, {10, 10}, {190, 10});
  CHECK(d1.x == Catch::Approx(-20.0));
  CHECK(d1.y == Catch::Approx(0.0));

  const Vec2 d2 = displacement(walled(200.0), {10, 10}, {190, 10});
  CHECK(d2.x == Catch::Approx(180.0));

  // Ties resolve to +L/2: components stay in (-L/2, L/2].
  const Vec2 d3 = displacement(per, {0, 0}, {100, 0});
  CHECK(d3.x == Catch::Approx(100.0));

  const double L = 200.0;
  for (int t = 0; t < 200; ++t) {
    const Vec2 a{L * rng_uniform(7, t, 0, RngChannel::init_position, 0),
                 L * rng_uniform(7, t, 0, RngChannel::init_position, 1)};
    const Vec2 b{L * rng_uniform(7, t, 1, RngChannel::init_position, 0),
                 L * rng_uniform(7, t, 1, RngChannel::init_position, 1)};
    const Vec2 d = displacement(per, a, b);
    CHECK(d.norm() <= L * std::sqrt(2.0) / 2.0 + 1e-12);
    CHECK(d.x > -L / 2 - 1e-12);
    CHECK(d.x <= L / 2 + 1e-12);
  }
}

TEST_CASE("pair_gap basics") {
  const Domain dom = walled(200.0);
  auto g = pair_gap(dom, {0, 0}, {15, 0}, 7.5);
  CHECK(g.gap == Catch::Approx(0.0).margin(1e-12));
  CHECK(g.dir.x == Catch::Approx(-1.0));

  g = pair_gap(dom, {0, 0}, {20, 0}, 7.5);
  CHECK(g.gap == Catch::Approx(5.0));
  CHECK(g.dir.x == Catch::Approx(-1.0));

  // Overlap through the periodic boundary.
  g = pair_gap(periodic(200.0), {1, 0}, {199, 0}, 7.5);
  CHECK(g.gap == Catch::Approx(-13.0));
  CHECK(g.dir.x == Catch::Approx(1.0));

  CHECK_THROWS(pair_gap(dom, {5, 5}, {5, 5}, 7.5));
}

TEST_CASE("pair_gap symmetry") {
  for (const Domain& dom : {periodic(200.0), walled(200.0), disk({0, 0}, 113.0)}) {
    const auto x = random_positions(dom, 20, 11);
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (std::size_t j = i + 1; j < x.size(); ++j) {
        const auto gij = pair_gap(dom, x[i], x[j], 7.5);
        const auto gji = pair_gap(dom, x[j], x[i], 7.5);
        CHECK(gij.gap == Catch::Approx(gji.gap));
        CHECK(gij.dir.x == Catch::Approx(-gji.dir.x).margin(1e-12));
        CHECK(gij.dir.y == Catch::Approx(-gji.dir.y).margin(1e-12));
      }
    }
  }
}

TEST_CASE("boundary_gaps per shape") {
  CHECK(boundary_gaps(periodic(200.0), {50, 50}, 7.5).empty());

  auto bg = boundary_gaps(disk({0, 0}, 113.0), {100, 0}, 7.5);
  REQUIRE(bg.size() == 1);
  CHECK(bg[0].gap == Catch::Approx(5.5));
  CHECK(bg[0].normal.x == Catch::Approx(-1.0));

  bg = boundary_gaps(walled(200.0), {10, 100}, 7.5);
  REQUIRE(bg.size() == 4);
  CHECK(bg[0].gap == Catch::Approx(2.5));
  CHECK(bg[0].normal.x == Catch::Approx(1.0));
  CHECK(bg[1].gap == Catch::Approx(182.5));
  CHECK(bg[1].normal.x == Catch::Approx(-1.0));

  Domain dom = walled(200.0);
  dom.obstacles.push_back({{100, 100}, 7.5});
  bg = boundary_gaps(dom, {120, 100}, 7.5);
  REQUIRE(bg.size() == 5);
  CHECK(bg[4].gap == Catch::Approx(5.0));
  CHECK(bg[4].normal.x == Catch::Approx(1.0));
  CHECK(bg[4].is_obstacle);

  CHECK_THROWS(boundary_gaps(disk({0, 0}, 113.0), {0, 0}, 7.5));
  CHECK_THROWS(boundary_gaps(dom, {100, 100}, 7.5));
}

TEST_CASE("gap gradients match central finite differences") {
  const double h = 1e-6;
  Domain obst = walled(200.0);
  obst.obstacles.push_back({{100.0, 100.0}, 7.5});
  int idx = 0;
  for (const Domain& dom :
       {periodic(200.0), walled(200.0), disk({0, 0}, 113.0), obst}) {
    ++idx;
    const auto x = random_positions(dom, 100, 100 + idx);
    for (std::size_t k = 0; k + 1 < x.size(); k += 2) {
      // pair gradient wrt Xi
      const auto g = pair_gap(dom, x[k], x[k + 1], 7.5);
      for (int c = 0; c < 2; ++c) {
        Vec2 dp = x[k], dm = x[k];
        (c == 0 ? dp.x : dp.y) += h;
        (c == 0 ? dm.x : dm.y) -= h;
        const double fd = (pair_gap(dom, dp, x[k + 1], 7.5).gap -
                           pair_gap(dom, dm, x[k + 1], 7.5).gap) /
                          (2 * h);
        const double grad = c == 0 ? g.dir.x : g.dir.y;
        CHECK(std::abs(fd - grad) <= 1e-5 * std::max(1.0, std::abs(grad)));
      }
      // boundary gradients
      const auto bgs = boundary_gaps(dom, x[k], 7.5);
      for (std::size_t b = 0; b < bgs.size(); ++b) {
        for (int c = 0; c < 2; ++c) {
          Vec2 dp = x[k], dm = x[k];
          (c == 0 ? dp.x : dp.y) += h;
          (c == 0 ? dm.x : dm.y) -= h;
          const double fd = (boundary_gaps(dom, dp, 7.5)[b].gap -
                             boundary_gaps(dom, dm, 7.5)[b].gap) /
                            (2 * h);
          const double grad = c == 0 ? bgs[b].normal.x : bgs[b].normal.y;
          CHECK(std::abs(fd - grad) <= 1e-5 * std::max(1.0, std::abs(grad)));
        }
      }
    }
  }
}

TEST_CASE("neighbor_pairs on collinear cells") {
  const Domain dom = walled(200.0);
  const std::vector<Vec2> x{{0, 100}, {10, 100}, {30, 100}};
  auto pairs = neighbor_pairs(x, 19.0, dom);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0] == IndexPair{0, 1});

  pairs = neighbor_pairs(x, 21.0, dom);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0] == IndexPair{0, 1});
  CHECK(pairs[1] == IndexPair{1, 2});
}

TEST_CASE("neighbor_pairs equals the brute-force pair scan") {
  for (const Domain& dom : {periodic(200.0), walled(200.0), disk({50, 50}, 113.0)}) {
    for (const int n : {5, 50, 100, 200}) {
      for (const double cutoff : {5.0, 19.0, 60.0, 250.0}) {
        const auto x = random_positions(dom, n, 1000 + n);
        const auto fast = neighbor_pairs(x, cutoff, dom);
        const auto slow = detail::brute_force_pairs(x, cutoff, dom);
        CHECK(fast == slow);
      }
    }
  }
}

TEST_CASE("area and density reproduce the reference values") {
  CHECK(density(160, 7.5, periodic(200.0)) == Catch::Approx(0.707).epsilon(1e-3));
  CHECK(density(190, 7.5, periodic(200.0)) == Catch::Approx(0.839).epsilon(1e-3));
  CHECK(std::numbers::pi / (2 * std::sqrt(3.0)) == Catch::Approx(0.9069).epsilon(1e-3));
  // disk of radius 200/sqrt(pi) has the same area as the square
  const Domain d = disk({0, 0}, 200.0 / std::sqrt(std::numbers::pi));
  CHECK(area(d) == Catch::Approx(200.0 * 200.0));
}

TEST_CASE("periodic domains reject obstacles") {
  Domain dom = periodic(200.0);
  dom.obstacles.push_back({{100, 100}, 7.5});
  CHECK_THROWS(dom.validate());
}
