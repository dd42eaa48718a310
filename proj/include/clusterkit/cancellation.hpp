#ifndef CLUSTERKIT_CANCELLATION_HPP
#define CLUSTERKIT_CANCELLATION_HPP

// Polymer multi-indices over the vertex labels of a single graph and the
// signed coefficient sum that singles out articulation-free graphs.

#include <cstdint>
#include <vector>

#include "clusterkit/graphs.hpp"

namespace clusterkit {

inline constexpr int kCancellationVertexCap = 7;

/// A multiset of polymers (vertex subsets); multiplicity[i] >= 1 belongs to
/// polymers[i].
struct MultiIndex {
  std::vector<VertexMask> polymers;
  std::vector<int> multiplicity;

  VertexMask support_union() const;
};

/// c_I = (1/I!) * sum over connected spanning subgraphs G of the
/// incompatibility graph G_I of (-1)^|E(G)|. Two polymers are incompatible
/// when they share a vertex; a polymer of multiplicity m becomes a complete
/// graph on m copies. Exact as a rational; returned as numerator over I!.
struct PolymerCoefficient {
  std::int64_t numerator = 0;
  std::int64_t denominator = 1;
};
PolymerCoefficient polymer_coefficient(const MultiIndex& index);

/// Articulation-free components of a connected graph. The component holding
/// the whites (first entry) is what remains after repeatedly stripping leaf
/// blocks that carry no white vertex of their own; the stripped parts are
/// split into ordinary blocks. With a single white every block is its own
/// component and the first entry is just the first block touching it.
std::vector<VertexMask> articulation_free_components(const ColoredGraph& g);

/// All multi-indices I ~ g entering the cancellation sum: polymers are
/// vertex sets of connected unions of articulation-free components, I(V) = 1,
/// pairwise overlaps of at most one vertex, every edge inside some polymer,
/// the union is V(g), one polymer contains every white, and
/// n + k = |V0| + sum over the other polymers of (|V| - 1).
std::vector<MultiIndex> admissible_multiindices(const ColoredGraph& g);

/// Sum of c_I over admissible_multiindices(g). Equals 1 on articulation-free
/// graphs and 0 on the other connected graphs. Requires a connected graph
/// (DomainError) with at most kCancellationVertexCap vertices
/// (SizeLimitError).
std::int64_t multiindex_cancellation_sum(const ColoredGraph& g);

}  // namespace clusterkit

#endif  // CLUSTERKIT_CANCELLATION_HPP
