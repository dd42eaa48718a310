#include <doctest.h>

#include <cmath>
#include <numbers>

#include "clusterkit/closures.hpp"
#include "clusterkit/errors.hpp"
#include "oracles/liquids.hpp"

using namespace clusterkit;
using doctest::Approx;

constexpr double kPi = std::numbers::pi;

TEST_CASE("zero density") {
  const auto hs = PairPotential::hard_sphere(1.0);
  const auto res = py_solve(hs, 0.0, {0.01, 256});
  const auto& f = res.fields;
  for (std::size_t j = 0; j < f.y.size(); ++j) {
    CHECK(f.y[j] == 1.0);
    CHECK(f.t[j] == 0.0);
    if (!f.g.is_split(j)) CHECK(f.g[j] == hs.boltzmann(f.g.r(j)));
  }
}

TEST_CASE("hard rods reproduce the exact pair correlation") {
  const double rho = 0.3, dr = 0.005;
  const auto res = py_solve(PairPotential::hard_rod(1.0), rho, {dr, 4000});
  double err = 0.0;
  for (std::size_t j = 0; j < res.fields.g.size(); ++j) {
    const double r = res.fields.g.r(j);
    if (r <= 1.0 || r > 15.0 || res.fields.g.is_split(j)) continue;
    err = std::max(err, std::fabs(res.fields.g[j] - oracle::tonks_g(r, rho)));
  }
  CHECK(err < 5e-3);
  CHECK(res.fields.g.right(200) == Approx(1.0 / (1.0 - rho)).epsilon(1e-3));
}

TEST_CASE("hard spheres reproduce the closed-form direct correlation") {
  const double eta = 0.2, rho = 6.0 * eta / kPi, dr = 0.0025;
  PyOptions opts;
  opts.mixing = 0.2;
  const auto res = py_solve(PairPotential::hard_sphere(1.0), rho, {dr, 4096}, opts);
  double err = 0.0;
  for (std::size_t j = 0; j < res.fields.c.size(); ++j) {
    if (res.fields.c.is_split(j)) continue;
    err = std::max(err, std::fabs(res.fields.c[j] - oracle::wertheim_c(res.fields.c.r(j), eta)));
  }
  CHECK(err < 1e-3);
  CHECK(res.diagnostics.residual < 1e-8);
  CHECK(res.diagnostics.t_form_difference >= 0.0);
  CHECK(res.diagnostics.t_form_difference < 1e-8);
}

TEST_CASE("closure algebra after convergence") {
  const auto hs = PairPotential::hard_sphere(1.0);
  const auto res = py_solve(hs, 0.3, {0.01, 1024});
  const auto& f = res.fields;
  for (std::size_t j = 0; j < f.h.size(); ++j) {
    CHECK(f.h[j] == Approx(f.c[j] + f.t[j]).epsilon(1e-12).scale(1.0));
    CHECK(f.g[j] == Approx(f.boltzmann[j] * f.y[j]).epsilon(1e-12).scale(1.0));
    if (f.g.r(j) < 1.0) CHECK(f.g[j] == 0.0);
  }
  const std::size_t contact = 100;
  REQUIRE(f.g.is_split(contact));
  CHECK(f.g.left(contact) == 0.0);
  CHECK(f.g.right(contact) > 1.0);
  CHECK(res.diagnostics.residual < 1e-9);
  CHECK(res.diagnostics.history.back().first == res.diagnostics.iterations);
}

TEST_CASE("solver failures") {
  const auto hs = PairPotential::hard_sphere(1.0);
  PyOptions few;
  few.max_iter = 3;
  CHECK_THROWS_AS(py_solve(hs, 0.3, {0.01, 512}, few), ConvergenceError);
  CHECK_THROWS_AS(py_solve(hs, 3.0, {0.01, 512}), DivergenceError);
  CHECK_THROWS_AS(py_solve(hs, -0.1, {0.01, 512}), DomainError);
}

TEST_CASE("determinism") {
  const auto hs = PairPotential::hard_sphere(1.0);
  const auto a = py_solve(hs, 0.2, {0.01, 512});
  const auto b = py_solve(hs, 0.2, {0.01, 512});
  CHECK(fields_csv(a.fields, "x") == fields_csv(b.fields, "x"));
  CHECK(fields_csv(a.fields, "x").rfind("# manifest: x\n", 0) == 0);
}

TEST_CASE("t-form agrees with the y-form") {
  const auto hs = PairPotential::hard_sphere(1.0);
  const auto y = py_solve(hs, 0.25, {0.01, 1024});
  const auto t = py_solve_t_form(hs, 0.25, {0.01, 1024});
  double diff = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j) diff = std::max(diff, std::fabs(t[j] - y.fields.t[j]));
  CHECK(diff < 1e-8);
}

TEST_CASE("error order needs three densities") {
  const auto hs = PairPotential::hard_sphere(1.0);
  CHECK_THROWS_AS(py_error_order(hs, {0.01}, 2), DomainError);
  CHECK_THROWS_AS(py_error_order(hs, {0.01, 0.02, 0.03}, 1), DomainError);
}

TEST_CASE("rod closure error decays with the series order") {
  PyErrorOptions opts;
  opts.grid = {0.005, 4000};
  opts.anchor_radii = {0.5, 1.25, 1.75, 2.5};
  const auto pts = py_error_decay(PairPotential::hard_rod(1.0), 0.1, 3, opts);
  REQUIRE(pts.size() == 4);
  for (std::size_t k = 1; k < pts.size(); ++k) CHECK(pts[k].error < pts[k - 1].error);
}

TEST_CASE("closure defect") {
  const auto hs = PairPotential::hard_sphere(1.0);
  McConfig cfg;
  cfg.n_samples = 20000;
  const double dr = 0.05;
  std::vector<double> radii;
  for (int j = 0; j < 50; ++j) radii.push_back(dr * j);
  const auto table = build_c2_table(1, radii, hs, cfg);
  const auto zero = py_solve(hs, 0.0, {dr, 256});
  const auto defect = closure_defect(zero.fields, table, 0.0);
  for (double v : defect.values()) CHECK(v == Approx(0.0).scale(1.0));

  // No first-order defect: every 2-connected graph with one black vertex is in f t.
  for (const auto& p : defect_coefficient(1, {0.0, 0.5, 1.2, 1.7}, hs, cfg))
    CHECK(std::fabs(p.value) <= 4 * p.std_error + 1e-9);
}
