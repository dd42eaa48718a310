#ifndef CLUSTERKIT_GRAPHS_HPP
#define CLUSTERKIT_GRAPHS_HPP

// Labeled two-colored graphs: n "white" root vertices and k "black" field
// vertices. Internally vertices are 0-based (whites are 0..n-1); every
// user-facing representation (JSON, CLI, Python) is 1-based.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace clusterkit {

using EdgeMask = std::uint64_t;
using VertexMask = std::uint32_t;

/// 11 vertices -> 55 vertex pairs, the most that fit in an EdgeMask.
inline constexpr int kMaxGraphVertices = 11;
inline constexpr int kDefaultEnumerationCap = 9;

/// Bit position of the pair {i, j} (0-based, i != j). Pairs are ordered
/// colexicographically: (0,1), (0,2), (1,2), (0,3), ... so a mask on N
/// vertices is also a valid mask on N+1 vertices.
constexpr int pair_index(int i, int j) {
  if (i > j) std::swap(i, j);
  return j * (j - 1) / 2 + i;
}

constexpr int pair_count(int n_vertices) { return n_vertices * (n_vertices - 1) / 2; }

enum class GraphClass { All, Connected, ArticulationFree, TwoConnected };

std::string to_string(GraphClass cls);
GraphClass graph_class_from_string(const std::string& name);

class ColoredGraph {
 public:
  /// Throws DomainError unless n_white >= 1, n_white + n_black >= 2 and the
  /// mask only uses pairs of the n_white + n_black vertices.
  ColoredGraph(int n_white, int n_black, EdgeMask edges);

  /// Build from 1-based label pairs.
  static ColoredGraph from_edges(int n_white, int n_black,
                                 const std::vector<std::pair<int, int>>& edges);

  int n_white() const { return n_white_; }
  int n_black() const { return n_black_; }
  int n_vertices() const { return n_white_ + n_black_; }
  EdgeMask mask() const { return edges_; }
  int edge_count() const;

  bool has_edge(int i, int j) const { return (edges_ >> pair_index(i, j)) & 1U; }
  bool is_white(int v) const { return v < n_white_; }
  VertexMask white_mask() const { return (VertexMask{1} << n_white_) - 1; }
  VertexMask all_vertices() const { return (VertexMask{1} << n_vertices()) - 1; }

  /// Neighbor set of v as a vertex bitmask.
  VertexMask neighbors(int v) const;

  /// 0-based endpoint pairs in pair_index order.
  std::vector<std::pair<int, int>> edges() const;

  friend bool operator==(const ColoredGraph&, const ColoredGraph&) = default;

 private:
  int n_white_;
  int n_black_;
  EdgeMask edges_;
};

/// Cutpoint, articulation and nodal vertex sets as 0-based vertex masks.
struct VertexClassification {
  VertexMask cutpoints = 0;
  VertexMask articulation = 0;
  VertexMask nodal = 0;
};

/// Is the subgraph induced on `subset` connected? The empty set is not.
bool is_connected(const ColoredGraph& g, VertexMask subset);
bool is_connected(const ColoredGraph& g);

/// Connected components of g restricted to `subset`.
std::vector<VertexMask> components(const ColoredGraph& g, VertexMask subset);

/// Requires a connected graph (DomainError otherwise). Cutpoints are found
/// with a depth-first lowpoint search. A cutpoint is an articulation vertex
/// when one of the pieces left by its removal holds no white vertex; it is
/// nodal when it separates two white vertices and is not an articulation
/// vertex, so cutpoints = articulation (+) nodal.
VertexClassification classify_vertices(const ColoredGraph& g);

bool in_class(const ColoredGraph& g, GraphClass cls);

/// Maximal 2-connected subgraphs (blocks) of a connected graph, as vertex
/// masks. A bridge is a two-vertex block.
std::vector<VertexMask> blocks(const ColoredGraph& g);

struct EnumerationOptions {
  int max_vertices = kDefaultEnumerationCap;
  int threads = 1;
};

/// Every labeled graph of the class on n_white white and n_black black
/// vertices, exactly once, in increasing edge-mask order.
std::vector<ColoredGraph> enumerate(int n_white, int n_black, GraphClass cls,
                                    const EnumerationOptions& opts = {});

/// Same as enumerate(...).size() without materializing the list.
std::size_t count(int n_white, int n_black, GraphClass cls,
                  const EnumerationOptions& opts = {});

/// Relabel black vertices: black vertex n_white + i goes to n_white + perm[i].
ColoredGraph permute_black(const ColoredGraph& g, const std::vector<int>& perm);

/// Smallest edge mask over all black relabelings (whites stay fixed).
/// At most 7 black vertices (SizeLimitError beyond).
EdgeMask canonical_mask(const ColoredGraph& g);

struct IsoClass {
  ColoredGraph representative;  // first member met in input order
  std::size_t multiplicity = 0;
  EdgeMask canonical = 0;
};

/// Group graphs by white-fixing, black-permuting isomorphism. All graphs
/// must share (n_white, n_black); classes appear in first-seen order.
std::vector<IsoClass> iso_classes(const std::vector<ColoredGraph>& graphs);

}  // namespace clusterkit

#endif  // CLUSTERKIT_GRAPHS_HPP
