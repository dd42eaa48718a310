#include <doctest.h>

#include <random>

#include "clusterkit/errors.hpp"
#include "clusterkit/series.hpp"
#include "clusterkit/uncertain.hpp"

using namespace clusterkit;
using S = FormalSeries<Rational>;

namespace {

S random_series(std::mt19937_64& rng, std::size_t order, bool zero_constant) {
  std::uniform_int_distribution<int> num(-9, 9), den(1, 7);
  S s(order);
  for (std::size_t i = 0; i <= order; ++i) s[i] = Rational(num(rng), den(rng));
  if (zero_constant) s[0] = 0;
  if (zero_constant && s[1] == 0) s[1] = Rational(3, 2);
  return s;
}

bool is_identity(const S& s) {
  for (std::size_t i = 0; i <= s.order(); ++i)
    if (s[i] != (i == 1 ? Rational(1) : Rational(0))) return false;
  return true;
}

}  // namespace

TEST_CASE("reversion composes to the identity") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t K = 1 + trial % 6;
    const S s = random_series(rng, K, true);
    const S r = s.reversion();
    CHECK(is_identity(r.compose(s)));
    CHECK(is_identity(s.compose(r)));
  }
}

TEST_CASE("ring laws and reciprocal") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const S a = random_series(rng, 5, false), b = random_series(rng, 5, false),
            c = random_series(rng, 5, false);
    const auto ab = a * b;
    const auto ba = b * a;
    const auto lhs = a * (b + c);
    const auto rhs = a * b + a * c;
    for (std::size_t i = 0; i <= 5; ++i) {
      CHECK(ab[i] == ba[i]);
      CHECK(lhs[i] == rhs[i]);
    }
    if (a[0] != 0) {
      const S one = a * a.reciprocal();
      CHECK(one[0] == 1);
      for (std::size_t i = 1; i <= 5; ++i) CHECK(one[i] == 0);
    }
  }
}

TEST_CASE("log and exp are inverse") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const S s = random_series(rng, 6, true);
    const S back = s.exp().log();
    for (std::size_t i = 0; i <= 6; ++i) CHECK(back[i] == s[i]);
  }
  // log(1 + x) = x - x^2/2 + x^3/3.
  S one_plus_x(3);
  one_plus_x[0] = 1;
  one_plus_x[1] = 1;
  const S l = one_plus_x.log();
  CHECK(l[1] == 1);
  CHECK(l[2] == Rational(-1, 2));
  CHECK(l[3] == Rational(1, 3));
}

TEST_CASE("domain errors") {
  S s(3);
  s[0] = 1;
  s[1] = 1;
  CHECK_THROWS_AS(s.compose(s), DomainError);
  CHECK_THROWS_AS(S(3).reciprocal(), DomainError);
  CHECK_THROWS_AS(s.exp(), DomainError);
  S two(2);
  two[0] = 2;
  CHECK_THROWS_AS(two.log(), DomainError);
  CHECK_THROWS_AS(S(std::vector<Rational>{}), DomainError);
}

TEST_CASE("truncation is closed") {
  S a(4), b(2);
  a[1] = 1;
  b[1] = 1;
  CHECK((a * b).order() == 2);
  CHECK((a + b).order() == 2);
}

TEST_CASE("correlated uncertainties") {
  const Uncertain a = Uncertain::measured(1.0, 0.1, 7);
  const Uncertain b = Uncertain::measured(2.0, 0.2, 8);
  CHECK((a - a).std_error() == doctest::Approx(0.0));
  CHECK((a + a).std_error() == doctest::Approx(0.2));
  CHECK((a + b).std_error() == doctest::Approx(std::hypot(0.1, 0.2)));
  CHECK((a * b).value() == doctest::Approx(2.0));
  CHECK(Uncertain(0.0).is_exact_zero());
}
