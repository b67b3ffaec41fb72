#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cellflock/forces.hpp"
#include "cellflock/rng.hpp"

using namespace cellflock;

namespace {

const Domain kBox{WalledSquare{200.0}, {}};

std::vector<Vec2> random_cluster(int n, std::uint64_t seed) {
  // clustered enough that most pairs interact
  std::vector<Vec2> x;
  for (int k = 0; k < n; ++k) {
    x.push_back({60.0 + 80.0 * rng_uniform(seed, k, 0, RngChannel::init_position, 0),
                 60.0 + 80.0 * rng_uniform(seed, k, 0, RngChannel::init_position, 1)});
  }
  return x;
}

double total_energy(const std::vector<Vec2>& x, const ForceParams& p) {
  double e = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double r = displacement(kBox, x[i], x[j]).norm();
      if (r <= p.Rint_ar) e += pair_potential(r, p);
    }
  }
  return e;
}

}  // namespace

TEST_CASE("potential values") {
  const ForceParams p{1e4, 1e-5, 9.5, 19.0};
  CHECK(pair_potential(0.0, p) == Catch::Approx(0.0));
  // force vanishes at the comfort distance 2 Rc
  CHECK(pair_potential_derivative(2 * p.Rc, p) == Catch::Approx(0.0).margin(1e-9));
  CHECK(pair_potential_derivative(15.0, p) ==
        Catch::Approx(-1e4 * (15.0 - 225.0 / 19.0)));
  CHECK(pair_potential_derivative(15.0, p) == Catch::Approx(-3.158e4).epsilon(1e-3));
}

TEST_CASE("pair force sign and magnitude") {
  const ForceParams p{1e4, 1e-5, 9.5, 19.0};

  // isolated cell
  auto f = total_force({{100, 100}, {100 + 2 * p.Rint_ar, 100}}, kBox, p);
  CHECK(f[0].norm() == Catch::Approx(0.0).margin(1e-12));

  // exactly at the comfort distance: no force
  f = total_force({{100, 100}, {100 + 2 * p.Rc, 100}}, kBox, p);
  CHECK(f[0].norm() == Catch::Approx(0.0).margin(1e-6));

  // r = 15 < 2 Rc: repulsive with magnitude |W'(15)|
  f = total_force({{100, 100}, {115, 100}}, kBox, p);
  CHECK(f[0].x == Catch::Approx(-std::abs(pair_potential_derivative(15.0, p))));
  CHECK(f[1].x == Catch::Approx(+std::abs(pair_potential_derivative(15.0, p))));

  // 2 Rc < r <= Rint_ar: attractive
  const ForceParams pa{1e4, 1e-5, 9.5, 21.0};
  f = total_force({{100, 100}, {120, 100}}, kBox, pa);
  CHECK(f[0].x > 0.0);
  CHECK(f[1].x < 0.0);
}

TEST_CASE("internal forces conserve momentum") {
  const ForceParams p{1e4, 1e-5, 9.5, 21.0};
  for (const std::uint64_t seed : {1u, 2u, 3u}) {
    const auto x = random_cluster(40, seed);
    const auto f = total_force(x, kBox, p);
    Vec2 sum{};
    double scale = 0.0;
    for (const auto& fk : f) {
      sum += fk;
      scale = std::max(scale, fk.norm());
    }
    CHECK(sum.norm() <= 1e-9 * std::max(scale, 1.0));
  }
}

TEST_CASE("total force is minus the energy gradient") {
  const ForceParams p{1e4, 1e-5, 9.5, 21.0};
  const double h = 1e-6;
  for (const std::uint64_t seed : {10u, 11u}) {
    const auto x = random_cluster(12, seed);
    const auto f = total_force(x, kBox, p);
    for (std::size_t k = 0; k < x.size(); ++k) {
      for (int c = 0; c < 2; ++c) {
        auto xp = x, xm = x;
        (c == 0 ? xp[k].x : xp[k].y) += h;
        (c == 0 ? xm[k].x : xm[k].y) -= h;
        const double fd = -(total_energy(xp, p) - total_energy(xm, p)) / (2 * h);
        const double fc = c == 0 ? f[k].x : f[k].y;
        CHECK(std::abs(fd - fc) <= 1e-5 * std::max(std::abs(fd), 1.0));
      }
    }
  }
}
