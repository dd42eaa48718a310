#include <doctest.h>

#include <cmath>
#include <numbers>

#include "clusterkit/errors.hpp"
#include "clusterkit/oz.hpp"
#include "oracles/liquids.hpp"

using namespace clusterkit;
using doctest::Approx;

constexpr double kPi = std::numbers::pi;

namespace {

double lens(double r) { return r < 2.0 ? kPi / 12.0 * (4.0 + r) * (2.0 - r) * (2.0 - r) : 0.0; }

RadialFunction ball(double dr, std::size_t n) {
  return RadialFunction::sample(dr, n, 3, [](double r) { return r < 1.0 ? 1.0 : 0.0; }, {1.0});
}

}  // namespace

TEST_CASE("radial function basics") {
  const auto b = ball(0.01, 300);
  CHECK(b.is_split(100));
  CHECK(b.left(100) == 1.0);
  CHECK(b.right(100) == 0.0);
  CHECK(b[100] == 0.5);
  CHECK(b.at(0.505) == 1.0);
  CHECK(b.at(1.0) == 0.0);
  CHECK(b.to_csv("abc").rfind("# manifest: abc\nr,value\n", 0) == 0);
  CHECK_THROWS_AS(RadialFunction(0.0, {1.0, 2.0}, 3), DomainError);
  CHECK_THROWS_AS(RadialFunction(0.1, {1.0, 2.0}, 2), DomainError);
}

TEST_CASE("transform round trip") {
  for (int d : {1, 3}) {
    const std::size_t n = 512;
    const double dr = 0.02;
    RadialTransform tr(n, dr, d);
    std::vector<double> a(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double r = dr * static_cast<double>(j);
      a[j] = std::exp(-r * r) * (1.0 + 0.3 * r * r);
    }
    const auto back = tr.inverse(tr.forward(a), false);
    double err = 0.0;
    for (std::size_t j = 0; j < n; ++j) err = std::max(err, std::fabs(back[j] - a[j]));
    CAPTURE(d);
    CHECK(err < 1e-10);
  }
}

TEST_CASE("transform of a Gaussian matches the closed form") {
  const std::size_t n = 1024;
  const double dr = 0.01;
  RadialTransform tr(n, dr, 3);
  std::vector<double> a(n);
  for (std::size_t j = 0; j < n; ++j) a[j] = std::exp(-std::pow(dr * static_cast<double>(j), 2));
  const auto hat = tr.forward(a);
  const auto k = tr.kappa();
  for (std::size_t m = 0; m < 200; m += 17) {
    const double want = std::pow(kPi, 1.5) * std::exp(-k[m] * k[m] / 4.0);
    CHECK(hat[m] == Approx(want).epsilon(1e-8));
  }
}

TEST_CASE("convolution of ball indicators") {
  const double dr = 0.005;
  const auto b = ball(dr, 1200);
  const double rho = 0.7;
  const auto conv = radial_convolve(b, b, rho);
  CHECK(conv[0] == Approx(rho * 4.0 * kPi / 3.0).epsilon(2e-4));
  for (double r : {0.5, 1.0, 1.5}) {
    const auto j = static_cast<std::size_t>(std::lround(r / dr));
    CHECK(conv[j] == Approx(rho * lens(r)).epsilon(2e-3));
  }
  CHECK(std::fabs(conv[static_cast<std::size_t>(2.5 / dr)]) < 1e-4);

  const RadialFunction zero(dr, std::vector<double>(1200, 0.0), 3);
  const auto cz = radial_convolve(b, zero, rho);
  for (double v : cz.values()) CHECK(v == 0.0);
  const auto c0 = radial_convolve(b, b, 0.0);
  for (double v : c0.values()) CHECK(v == 0.0);
  CHECK_THROWS_AS(radial_convolve(b, ball(dr, 600), rho), DomainError);
}

TEST_CASE("1D convolution matches the cosine-transform route") {
  const std::size_t n = 400;
  const double dr = 0.01;
  const auto a = RadialFunction::sample(dr, n, 1, [](double r) { return std::exp(-r) * std::cos(3 * r); });
  const auto b = RadialFunction::sample(dr, n, 1, [](double r) { return r < 1.0 ? -1.0 : 0.0; }, {1.0});
  const auto direct = radial_convolve(a, b, 1.0);
  RadialTransform tr(n, dr, 1);
  auto ah = tr.forward(a.values());
  const auto bh = tr.forward(b.values());
  for (std::size_t m = 0; m < ah.size(); ++m) ah[m] *= bh[m];
  const auto via = tr.inverse(ah, false);
  double err = 0.0;
  for (std::size_t j = 0; j < n / 2; ++j) err = std::max(err, std::fabs(direct[j] - via[j]));
  CHECK(err < 1e-12);
}

TEST_CASE("OZ solve") {
  const double dr = 0.005;
  const std::size_t n = 2048;
  const RadialFunction zero(dr, std::vector<double>(n, 0.0), 3);
  const auto hz = oz_solve_h(zero, 0.5);
  for (double v : hz.values()) CHECK(v == 0.0);

  const double eta = 0.2, rho = 6.0 * eta / kPi;
  const auto c = RadialFunction::sample(
      dr, n, 3, [&](double r) { return oracle::wertheim_c(r, eta); }, {1.0});
  const auto same = oz_solve_h(c, 0.0);
  for (std::size_t j = 0; j < n; ++j) CHECK(same[j] == c[j]);

  OzSolveReport rep;
  const auto h = oz_solve_h(c, rho, &rep);
  CHECK(rep.residual_sup < 1e-8);
  CHECK(rep.min_denominator > 0.0);
  // The exact PY direct correlation function must give g = 0 in the core.
  for (double r : {0.1, 0.4, 0.7, 0.9}) CHECK(h.at(r) == Approx(-1.0).epsilon(2e-3));
}

TEST_CASE("OZ solve refuses a vanishing denominator") {
  const double dr = 0.01;
  const auto c = RadialFunction::sample(dr, 256, 1, [](double r) { return r < 1.0 ? 1.0 : 0.0; }, {1.0});
  RadialTransform tr(256, dr, 1);
  const double c0 = tr.forward(c.values())[0];
  CHECK_THROWS_AS(oz_solve_h(c, 1.0 / c0), DivergenceError);
}

TEST_CASE("census identity") {
  const std::size_t af[] = {1, 2, 16, 328};
  const std::size_t two[] = {1, 1, 10, 238};
  const std::size_t nodal[] = {0, 1, 6, 90};
  for (int k = 0; k <= 3; ++k) {
    const auto c = oz_census_identity(k);
    CAPTURE(k);
    CHECK(c.articulation_free == af[k]);
    CHECK(c.two_connected == two[k]);
    CHECK(c.nodal_split == nodal[k]);
    CHECK(c.holds);
  }
  // Without the factor k the split undercounts from k = 2 on.
  CHECK(oz_census_identity(1).holds_without_label_factor);
  CHECK(oz_census_identity(2).nodal_split_without_label_factor == 3);
  CHECK_FALSE(oz_census_identity(2).holds_without_label_factor);
  CHECK(oz_census_identity(3).nodal_split_without_label_factor == 30);
  CHECK_FALSE(oz_census_identity(3).holds_without_label_factor);
}

TEST_CASE("order-by-order OZ residuals") {
  McConfig cfg;
  cfg.n_samples = 20000;
  const auto hs = PairPotential::hard_sphere(1.0);
  const auto r0 = oz_order_check(0, {0.0, 0.5, 1.5}, hs, cfg);
  for (const auto& a : r0.anchors) CHECK(a.residual == 0.0);
  CHECK(r0.pass);

  const auto r1 = oz_order_check(1, {0.0, 0.6, 1.2, 1.8, 2.5}, hs, cfg);
  for (const auto& a : r1.anchors) CHECK(std::fabs(a.residual) < 1e-7);
  CHECK(r1.pass);

  const auto sw = PairPotential::square_well(1.0, 0.5, 1.5, 1.0, 0.5);
  CHECK(oz_order_check(1, {0.0, 1.2, 2.1}, sw, cfg).pass);

  const auto r2 = oz_order_check(2, {0.3, 1.4}, hs, cfg);
  CHECK(r2.pass);

  EnumerationOptions small;
  small.max_vertices = 4;
  OzCheckOptions opts;
  opts.enum_opts = small;
  CHECK_THROWS_AS(oz_order_check(3, {0.5}, hs, cfg, opts), SizeLimitError);
}

TEST_CASE("quadrature convolution") {
  auto ind = [](double r) { return r < 1.0 ? 1.0 : 0.0; };
  CHECK(quadrature_convolution(ind, 1.0, ind, 1.0, {1.0}, 3, 0.0, 1e-10) ==
        Approx(4.0 * kPi / 3.0).epsilon(1e-9));
  CHECK(quadrature_convolution(ind, 1.0, ind, 1.0, {1.0}, 3, 0.8, 1e-10) ==
        Approx(lens(0.8)).epsilon(1e-8));
  CHECK(quadrature_convolution(ind, 1.0, ind, 1.0, {1.0}, 1, 0.5, 1e-10) == Approx(1.5));
}
