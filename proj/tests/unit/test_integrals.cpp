#include <doctest.h>

#include <cmath>
#include <numbers>

#include "clusterkit/calibration.hpp"
#include "clusterkit/errors.hpp"
#include "clusterkit/integrals.hpp"

using namespace clusterkit;
using doctest::Approx;
using E = std::vector<std::pair<int, int>>;

constexpr double kPi = std::numbers::pi;
const double kBall = 4.0 * kPi / 3.0;

TEST_CASE("analytic graph integrals") {
  const auto hs = PairPotential::hard_sphere(1.0);
  auto e = zeta_bullet(ColoredGraph::from_edges(2, 0, E{{1, 2}}), pair_anchors(0.5), hs);
  CHECK(e.value == -1.0);
  CHECK(e.exact);
  CHECK(e.std_error == 0.0);

  const auto path = ColoredGraph::from_edges(2, 1, E{{1, 3}, {2, 3}});
  e = zeta_bullet(path, pair_anchors(0.0), hs);
  CHECK(e.exact);
  CHECK(e.value == Approx(kBall).epsilon(1e-14));
  e = zeta_bullet(path, pair_anchors(2.5), hs);
  CHECK(e.exact);
  CHECK(e.value == 0.0);

  // Lens volume pi/12 (4 + r)(2 - r)^2 for unit spheres.
  e = zeta_bullet(path, pair_anchors(0.8), hs);
  CHECK(e.value == Approx(kPi / 12.0 * 4.8 * 1.2 * 1.2).epsilon(1e-13));
}

TEST_CASE("hard-rod exact engine") {
  const auto tri = ColoredGraph::from_edges(2, 1, E{{1, 2}, {1, 3}, {2, 3}});
  const Rational v = zeta_exact_hard_rod(tri, {Rational(0), Rational(0)});
  CHECK(v == Rational(-2));
  const auto hr = PairPotential::hard_rod(1.0);
  const auto e = zeta_bullet(tri, {Point{0, 0, 0}, Point{0, 0, 0}}, hr);
  CHECK(e.exact);
  REQUIRE(e.exact_value);
  CHECK(*e.exact_value == Rational(-2));
  // sigma scaling: triangle with one black scales as sigma^1.
  const auto hr2 = PairPotential::hard_rod(2.0);
  CHECK(zeta_bullet(tri, {Point{0, 0, 0}, Point{0, 0, 0}}, hr2).value == Approx(-4.0));
  // Path 1-3-2 at separation r: overlap length 2 - r.
  const auto path = ColoredGraph::from_edges(2, 1, E{{1, 3}, {2, 3}});
  CHECK(zeta_exact_hard_rod(path, {Rational(0), Rational(1, 2)}) == Rational(3, 2));
}

TEST_CASE("translation invariance") {
  const auto hr = PairPotential::hard_rod(1.0);
  const auto ring = ColoredGraph::from_edges(2, 2, E{{1, 3}, {2, 3}, {2, 4}, {1, 4}});
  const auto a = zeta_exact_hard_rod(ring, {Rational(0), Rational(3, 4)});
  const auto b = zeta_exact_hard_rod(ring, {Rational(5, 2), Rational(13, 4)});
  CHECK(a == b);

  const auto hs = PairPotential::hard_sphere(1.0);
  const auto path = ColoredGraph::from_edges(2, 1, E{{1, 3}, {2, 3}});
  const double v1 = zeta_bullet(path, {Point{0, 0, 0}, Point{0.7, 0, 0}}, hs).value;
  const double v2 = zeta_bullet(path, {Point{1, 2, 3}, Point{1, 2.7, 3}}, hs).value;
  CHECK(v1 == Approx(v2).epsilon(1e-13));

  McConfig cfg;
  cfg.n_samples = 40000;
  const auto tri = ColoredGraph::from_edges(2, 2, E{{1, 3}, {2, 3}, {3, 4}, {1, 4}, {2, 4}});
  const auto m1 = zeta_bullet(tri, {Point{0, 0, 0}, Point{0.7, 0, 0}}, hs, cfg);
  const auto m2 = zeta_bullet(tri, {Point{1, 2, 3}, Point{1, 2.7, 3}}, hs, cfg);
  CHECK(std::fabs(m1.value - m2.value) <= 4 * std::hypot(m1.std_error, m2.std_error));
}

TEST_CASE("factorization across an articulation vertex") {
  // White 1 bonded to black 2, which carries the triangle {2, 3, 4}.
  const auto g = ColoredGraph::from_edges(1, 3, E{{1, 2}, {2, 3}, {2, 4}, {3, 4}});
  const auto edge = ColoredGraph::from_edges(1, 1, E{{1, 2}});
  const auto tri = ColoredGraph::from_edges(1, 2, E{{1, 2}, {1, 3}, {2, 3}});
  const Rational zero(0);
  CHECK(zeta_exact_hard_rod(g, {zero}) ==
        zeta_exact_hard_rod(edge, {zero}) * zeta_exact_hard_rod(tri, {zero}));
}

TEST_CASE("Monte Carlo determinism") {
  const auto hs = PairPotential::hard_sphere(1.0);
  const auto g = ColoredGraph::from_edges(2, 2, E{{1, 3}, {2, 3}, {3, 4}, {1, 4}});
  McConfig cfg;
  cfg.n_samples = 20000;
  cfg.threads = 1;
  const auto a = zeta_bullet_mc(g, pair_anchors(0.6), hs, cfg);
  cfg.threads = 4;
  const auto b = zeta_bullet_mc(g, pair_anchors(0.6), hs, cfg);
  CHECK(a.value == b.value);
  CHECK(a.std_error == b.std_error);
  cfg.seed += 1;
  const auto c = zeta_bullet_mc(g, pair_anchors(0.6), hs, cfg);
  CHECK(a.value != c.value);
  CHECK(a.method == Method::MonteCarlo);
  CHECK(a.std_error > 0.0);
}

TEST_CASE("estimates stay inside the trivial envelope") {
  const auto hs = PairPotential::hard_sphere(1.0);
  McConfig cfg;
  cfg.n_samples = 5000;
  for (const auto& g : {ColoredGraph::from_edges(2, 2, E{{1, 3}, {2, 3}, {3, 4}, {1, 4}}),
                        ColoredGraph::from_edges(1, 3, E{{1, 2}, {2, 3}, {3, 4}, {4, 1}})}) {
    const auto e = zeta_bullet(g, std::vector<Point>(g.n_white(), Point{0, 0, 0}), hs, cfg);
    CHECK(std::fabs(e.value) <= e.envelope + 4 * e.std_error);
  }
}

TEST_CASE("disconnected graphs are rejected") {
  const auto hs = PairPotential::hard_sphere(1.0);
  CHECK_THROWS_AS(zeta_bullet(ColoredGraph::from_edges(2, 1, E{{1, 2}}), pair_anchors(0), hs),
                  DomainError);
}

TEST_CASE("finite-volume factor") {
  CHECK(finite_volume_factor(2, 1.0, 2) == 2.0);
  CHECK(finite_volume_factor(5, 10.0, 0) == 1.0);
  CHECK(finite_volume_factor(3, 1.0, 4) == 0.0);
  CHECK(finite_volume_factor(10, 2.0, 3) == Approx(720.0 / 8.0));
}

TEST_CASE("torus integration approaches the infinite-volume value") {
  const auto hs = PairPotential::hard_sphere(1.0);
  McConfig cfg;
  cfg.n_samples = 200000;
  const auto e = zeta_bullet_torus(ColoredGraph::from_edges(1, 1, E{{1, 2}}), {Point{0, 0, 0}},
                                   hs, 4.0, cfg);
  CHECK(std::fabs(e.value + kBall) <= 4 * e.std_error + 1e-12);
}

TEST_CASE("ball overlap and bond-pair integrals") {
  CHECK(ball_overlap_volume(3, 1.0, 0.0) == Approx(kBall));
  CHECK(ball_overlap_volume(3, 1.0, 2.5) == 0.0);
  CHECK(ball_overlap_volume(1, 1.0, 0.5) == Approx(1.5));
  const auto hs = PairPotential::hard_sphere(1.0);
  for (double r : {0.0, 0.3, 1.0, 1.7})
    CHECK(bond_pair_integral(hs, r) == Approx(ball_overlap_volume(3, 1.0, r)).epsilon(1e-9));
}

TEST_CASE("calibration on a few seeds") {
  McConfig cfg;
  cfg.n_samples = 4000;
  const auto cases = calibration_cases();
  CHECK(cases.size() == 20);
  const auto res = run_calibration(cases, 10, cfg);
  int runs = 0, within = 0;
  for (const auto& r : res) {
    runs += r.runs;
    within += r.within;
  }
  CHECK(runs == 200);
  CHECK(within >= 190);
}
