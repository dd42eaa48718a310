#include <doctest.h>

#include <set>

#include "clusterkit/cancellation.hpp"
#include "clusterkit/errors.hpp"
#include "clusterkit/graphs.hpp"
#include "oracles/brute_graphs.hpp"

using namespace clusterkit;
using E = std::vector<std::pair<int, int>>;

namespace {

VertexMask labels(std::initializer_list<int> one_based) {
  VertexMask m = 0;
  for (int v : one_based) m |= VertexMask{1} << (v - 1);
  return m;
}

}  // namespace

TEST_CASE("small enumerations") {
  const auto two = enumerate(2, 0, GraphClass::TwoConnected);
  REQUIRE(two.size() == 1);
  CHECK(two[0] == ColoredGraph::from_edges(2, 0, E{{1, 2}}));

  const auto tri = enumerate(2, 1, GraphClass::TwoConnected);
  REQUIRE(tri.size() == 1);
  CHECK(tri[0].edge_count() == 3);

  const auto af = enumerate(2, 1, GraphClass::ArticulationFree);
  REQUIRE(af.size() == 2);
  std::set<EdgeMask> masks{af[0].mask(), af[1].mask()};
  CHECK(masks.count(ColoredGraph::from_edges(2, 1, E{{1, 3}, {2, 3}}).mask()) == 1);

  CHECK(count(4, 0, GraphClass::Connected) == 38);
  CHECK(count(2, 0, GraphClass::ArticulationFree) == 1);
}

TEST_CASE("enumeration order is increasing in the edge mask") {
  const auto gs = enumerate(2, 3, GraphClass::Connected);
  for (std::size_t i = 1; i < gs.size(); ++i) CHECK(gs[i - 1].mask() < gs[i].mask());
}

TEST_CASE("counts match brute force up to six vertices") {
  for (int w = 1; w <= 3; ++w)
    for (int b = 0; w + b <= 6; ++b) {
      if (w + b < 2) continue;
      const auto want = oracle::census(w, b);
      CAPTURE(w);
      CAPTURE(b);
      CHECK(count(w, b, GraphClass::All) == want.all);
      CHECK(count(w, b, GraphClass::Connected) == want.conn);
      CHECK(count(w, b, GraphClass::ArticulationFree) == want.af);
      CHECK(count(w, b, GraphClass::TwoConnected) == want.two);
    }
}

TEST_CASE("all-black connected counts with one root") {
  const std::size_t known[] = {1, 4, 38, 728, 26704};
  for (int n = 2; n <= 6; ++n) CHECK(count(1, n - 1, GraphClass::Connected) == known[n - 2]);
}

TEST_CASE("class nesting and the cutpoint partition") {
  for (int w = 1; w <= 4; ++w)
    for (int b = 0; w + b <= 6; ++b) {
      if (w + b < 2) continue;
      for (const auto& g : enumerate(w, b, GraphClass::Connected)) {
        const bool two = in_class(g, GraphClass::TwoConnected);
        const bool af = in_class(g, GraphClass::ArticulationFree);
        CHECK((!two || af));
        const auto vc = classify_vertices(g);
        CHECK((vc.articulation & ~vc.cutpoints) == 0);
        if (w >= 2) {
          CHECK((vc.articulation & vc.nodal) == 0);
          CHECK((vc.articulation | vc.nodal) == vc.cutpoints);
        }
      }
    }
}

TEST_CASE("classification against vertex deletion") {
  for (int w = 1; w <= 3; ++w)
    for (int b = 0; w + b <= 5; ++b) {
      if (w + b < 2) continue;
      const int n = w + b;
      for (const auto& g : enumerate(w, b, GraphClass::Connected)) {
        std::uint64_t subset = 0;
        int bit = 0;
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j, ++bit)
            if (g.has_edge(i, j)) subset |= std::uint64_t{1} << bit;
        const auto bg = oracle::from_subset(w, n, subset);
        const auto vc = classify_vertices(g);
        for (int v = 0; v < n; ++v) {
          CHECK(((vc.cutpoints >> v) & 1U) == oracle::is_cutpoint(bg, v));
          CHECK(((vc.articulation >> v) & 1U) == oracle::is_articulation(bg, v));
        }
      }
    }
}

TEST_CASE("classify_vertices examples") {
  const auto path = ColoredGraph::from_edges(2, 1, E{{1, 3}, {3, 2}});
  auto vc = classify_vertices(path);
  CHECK(vc.cutpoints == labels({3}));
  CHECK(vc.articulation == 0);
  CHECK(vc.nodal == labels({3}));

  vc = classify_vertices(ColoredGraph::from_edges(2, 1, E{{1, 2}, {1, 3}, {2, 3}}));
  CHECK(vc.cutpoints == 0);
  CHECK(vc.articulation == 0);
  CHECK(vc.nodal == 0);

  vc = classify_vertices(ColoredGraph::from_edges(2, 1, E{{3, 1}, {1, 2}}));
  CHECK(vc.cutpoints == labels({1}));
  CHECK(vc.articulation == labels({1}));
  CHECK(vc.nodal == 0);

  CHECK_THROWS_AS(classify_vertices(ColoredGraph::from_edges(2, 1, E{{1, 2}})), DomainError);
}

TEST_CASE("invalid graphs") {
  CHECK_THROWS_AS(ColoredGraph(1, 0, 0), DomainError);
  CHECK_THROWS_AS(ColoredGraph(0, 2, 1), DomainError);
  CHECK_THROWS_AS(ColoredGraph::from_edges(2, 0, E{{1, 1}}), DomainError);
  CHECK_THROWS_AS(ColoredGraph::from_edges(2, 0, E{{1, 3}}), DomainError);
}

TEST_CASE("enumeration cap") {
  EnumerationOptions opts;
  opts.max_vertices = 5;
  CHECK_THROWS_AS(count(2, 4, GraphClass::All, opts), SizeLimitError);
  CHECK_THROWS_AS(enumerate(2, 8, GraphClass::Connected), SizeLimitError);
}

TEST_CASE("cancellation sum examples") {
  CHECK(multiindex_cancellation_sum(ColoredGraph::from_edges(2, 1, E{{1, 2}, {1, 3}, {2, 3}})) == 1);
  CHECK(multiindex_cancellation_sum(ColoredGraph::from_edges(2, 1, E{{3, 1}, {1, 2}})) == 0);
  CHECK(multiindex_cancellation_sum(ColoredGraph::from_edges(2, 0, E{{1, 2}})) == 1);
  CHECK_THROWS_AS(multiindex_cancellation_sum(ColoredGraph::from_edges(2, 1, E{{1, 2}})),
                  DomainError);
}

TEST_CASE("cancellation sum is the articulation-free indicator up to five vertices") {
  for (int w = 1; w <= 5; ++w)
    for (int b = 0; w + b <= 5; ++b) {
      if (w + b < 2) continue;
      for (const auto& g : enumerate(w, b, GraphClass::Connected)) {
        const std::int64_t s = multiindex_cancellation_sum(g);
        CHECK(s == (in_class(g, GraphClass::ArticulationFree) ? 1 : 0));
      }
    }
}

TEST_CASE("polymer coefficients") {
  MultiIndex single{{labels({1, 2})}, {1}};
  auto c = polymer_coefficient(single);
  CHECK(c.numerator == c.denominator);
  // Two overlapping polymers: the incompatibility graph is one edge, c = -1.
  MultiIndex pair{{labels({1, 2}), labels({2, 3})}, {1, 1}};
  c = polymer_coefficient(pair);
  CHECK(c.numerator == -c.denominator);
}

TEST_CASE("isomorphism classes") {
  const auto af3 = enumerate(2, 1, GraphClass::ArticulationFree);
  const auto cls = iso_classes(af3);
  CHECK(cls.size() == 2);
  for (const auto& c : cls) CHECK(c.multiplicity == 1);

  for (int b = 2; b <= 3; ++b) {
    const auto gs = enumerate(2, b, GraphClass::ArticulationFree);
    std::size_t total = 0;
    std::set<EdgeMask> canon;
    for (const auto& c : iso_classes(gs)) {
      total += c.multiplicity;
      canon.insert(c.canonical);
      CHECK(canonical_mask(c.representative) == c.canonical);
    }
    CHECK(total == gs.size());
    CHECK(canon.size() == iso_classes(gs).size());
  }
  CHECK(iso_classes({ColoredGraph::from_edges(1, 1, E{{1, 2}})}).front().multiplicity == 1);
  CHECK_THROWS_AS(iso_classes({ColoredGraph::from_edges(1, 1, E{{1, 2}}),
                               ColoredGraph::from_edges(2, 0, E{{1, 2}})}),
                  DomainError);
}

TEST_CASE("canonical form ignores black labels only") {
  const auto a = ColoredGraph::from_edges(1, 2, E{{1, 2}, {2, 3}});
  const auto b = ColoredGraph::from_edges(1, 2, E{{1, 3}, {3, 2}});
  CHECK(canonical_mask(a) == canonical_mask(b));
  const auto c = ColoredGraph::from_edges(2, 1, E{{1, 3}, {1, 2}});
  const auto d = ColoredGraph::from_edges(2, 1, E{{2, 3}, {1, 2}});
  CHECK(canonical_mask(c) != canonical_mask(d));
}
