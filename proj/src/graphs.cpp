#include "clusterkit/graphs.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <numeric>
#include <unordered_map>

#include "clusterkit/errors.hpp"
#include "clusterkit/parallel.hpp"

namespace clusterkit {

std::string to_string(GraphClass cls) {
  switch (cls) {
    case GraphClass::All: return "all";
    case GraphClass::Connected: return "conn";
    case GraphClass::ArticulationFree: return "af";
    case GraphClass::TwoConnected: return "two";
  }
  return "?";
}

GraphClass graph_class_from_string(const std::string& name) {
  if (name == "all") return GraphClass::All;
  if (name == "conn" || name == "connected") return GraphClass::Connected;
  if (name == "af" || name == "articulation-free") return GraphClass::ArticulationFree;
  if (name == "two" || name == "2conn" || name == "two-connected") return GraphClass::TwoConnected;
  throw ConfigError("unknown graph class '" + name + "' (expected all|conn|af|two)");
}

ColoredGraph::ColoredGraph(int n_white, int n_black, EdgeMask edges)
    : n_white_(n_white), n_black_(n_black), edges_(edges) {
  if (n_white < 1) throw DomainError("a colored graph needs at least one white vertex");
  if (n_black < 0) throw DomainError("negative black vertex count");
  const int n = n_white + n_black;
  if (n < 2) throw DomainError("single vertices are not graphs (need n_white + n_black >= 2)");
  if (n > kMaxGraphVertices)
    throw SizeLimitError("graph has too many vertices for a 64-bit edge mask", kMaxGraphVertices);
  const int pairs = pair_count(n);
  if (pairs < 64 && (edges >> pairs) != 0)
    throw DomainError("edge mask references a vertex outside 1..n_white+n_black");
}

ColoredGraph ColoredGraph::from_edges(int n_white, int n_black,
                                      const std::vector<std::pair<int, int>>& edges) {
  const int n = n_white + n_black;
  EdgeMask mask = 0;
  for (auto [a, b] : edges) {
    if (a == b) throw DomainError("self-loops are not allowed");
    if (a < 1 || b < 1 || a > n || b > n)
      throw DomainError("edge endpoint outside 1.." + std::to_string(n));
    mask |= EdgeMask{1} << pair_index(a - 1, b - 1);
  }
  return ColoredGraph(n_white, n_black, mask);
}

int ColoredGraph::edge_count() const { return std::popcount(edges_); }

VertexMask ColoredGraph::neighbors(int v) const {
  VertexMask out = 0;
  for (int u = 0; u < n_vertices(); ++u)
    if (u != v && has_edge(u, v)) out |= VertexMask{1} << u;
  return out;
}

std::vector<std::pair<int, int>> ColoredGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int j = 1; j < n_vertices(); ++j)
    for (int i = 0; i < j; ++i)
      if (has_edge(i, j)) out.emplace_back(i, j);
  std::sort(out.begin(), out.end(), [](auto a, auto b) {
    return pair_index(a.first, a.second) < pair_index(b.first, b.second);
  });
  return out;
}

namespace {

struct Adjacency {
  int n = 0;
  VertexMask nbr[kMaxGraphVertices] = {};
  explicit Adjacency(const ColoredGraph& g) : n(g.n_vertices()) {
    for (int j = 1; j < n; ++j)
      for (int i = 0; i < j; ++i)
        if (g.has_edge(i, j)) {
          nbr[i] |= VertexMask{1} << j;
          nbr[j] |= VertexMask{1} << i;
        }
  }
};

VertexMask reach(const Adjacency& adj, int start, VertexMask subset) {
  VertexMask seen = VertexMask{1} << start;
  VertexMask frontier = seen;
  while (frontier) {
    VertexMask next = 0;
    for (VertexMask f = frontier; f; f &= f - 1) next |= adj.nbr[std::countr_zero(f)];
    next &= subset & ~seen;
    seen |= next;
    frontier = next;
  }
  return seen;
}

std::vector<VertexMask> split_components(const Adjacency& adj, VertexMask subset) {
  std::vector<VertexMask> out;
  VertexMask left = subset;
  while (left) {
    const VertexMask c = reach(adj, std::countr_zero(left), subset);
    out.push_back(c);
    left &= ~c;
  }
  return out;
}

// Hopcroft-Tarjan lowpoint search. Returns the cutpoint mask; when `blocks`
// is non-null also collects the vertex sets of the blocks.
VertexMask lowpoint_search(const Adjacency& adj, std::vector<VertexMask>* blocks) {
  int disc[kMaxGraphVertices];
  int low[kMaxGraphVertices];
  std::fill(disc, disc + adj.n, -1);
  int timer = 0;
  VertexMask cut = 0;
  std::vector<std::pair<int, int>> edge_stack;

  std::function<void(int, int)> dfs = [&](int u, int parent) {
    disc[u] = low[u] = timer++;
    int children = 0;
    for (VertexMask nb = adj.nbr[u]; nb; nb &= nb - 1) {
      const int v = std::countr_zero(nb);
      if (disc[v] < 0) {
        ++children;
        edge_stack.emplace_back(u, v);
        dfs(v, u);
        low[u] = std::min(low[u], low[v]);
        if (low[v] >= disc[u]) {
          if (parent >= 0) cut |= VertexMask{1} << u;
          VertexMask block = 0;
          while (!edge_stack.empty()) {
            auto [a, b] = edge_stack.back();
            edge_stack.pop_back();
            block |= (VertexMask{1} << a) | (VertexMask{1} << b);
            if (a == u && b == v) break;
          }
          if (blocks) blocks->push_back(block);
        }
      } else if (v != parent && disc[v] < disc[u]) {
        edge_stack.emplace_back(u, v);
        low[u] = std::min(low[u], disc[v]);
      }
    }
    if (parent < 0 && children > 1) cut |= VertexMask{1} << u;
  };
  dfs(0, -1);
  return cut;
}

}  // namespace

bool is_connected(const ColoredGraph& g, VertexMask subset) {
  if (subset == 0) return false;
  Adjacency adj(g);
  return reach(adj, std::countr_zero(subset), subset) == subset;
}

bool is_connected(const ColoredGraph& g) { return is_connected(g, g.all_vertices()); }

std::vector<VertexMask> components(const ColoredGraph& g, VertexMask subset) {
  return split_components(Adjacency(g), subset);
}

VertexClassification classify_vertices(const ColoredGraph& g) {
  Adjacency adj(g);
  const VertexMask all = g.all_vertices();
  if (reach(adj, 0, all) != all) throw DomainError("classify_vertices requires a connected graph");
  VertexClassification out;
  out.cutpoints = lowpoint_search(adj, nullptr);
  const VertexMask whites = g.white_mask();
  for (VertexMask c = out.cutpoints; c; c &= c - 1) {
    const int v = std::countr_zero(c);
    const VertexMask v_bit = VertexMask{1} << v;
    int pieces_with_white = 0;
    bool whiteless_piece = false;
    for (VertexMask piece : split_components(adj, all & ~v_bit)) {
      if (piece & whites)
        ++pieces_with_white;
      else
        whiteless_piece = true;
    }
    if (whiteless_piece)
      out.articulation |= v_bit;
    else if (pieces_with_white >= 2)
      out.nodal |= v_bit;
  }
  return out;
}

bool in_class(const ColoredGraph& g, GraphClass cls) {
  if (cls == GraphClass::All) return true;
  if (!is_connected(g)) return false;
  if (cls == GraphClass::Connected) return true;
  const auto vc = classify_vertices(g);
  if (cls == GraphClass::ArticulationFree) return vc.articulation == 0;
  return vc.cutpoints == 0;
}

std::vector<VertexMask> blocks(const ColoredGraph& g) {
  Adjacency adj(g);
  if (reach(adj, 0, g.all_vertices()) != g.all_vertices())
    throw DomainError("blocks() requires a connected graph");
  std::vector<VertexMask> out;
  lowpoint_search(adj, &out);
  return out;
}

namespace {

void check_enumeration(int n_white, int n_black, const EnumerationOptions& opts) {
  if (n_white < 1) throw DomainError("enumerate needs n_white >= 1");
  if (n_black < 0) throw DomainError("enumerate needs n_black >= 0");
  if (n_white + n_black < 2) throw DomainError("enumerate needs n_white + n_black >= 2");
  const int cap = std::min(opts.max_vertices, kMaxGraphVertices);
  if (n_white + n_black > cap)
    throw SizeLimitError("enumeration of " + std::to_string(n_white + n_black) +
                             " vertices exceeds the configured vertex cap",
                         cap);
}

// Cheap necessary conditions on degrees, checked before classification.
bool passes_degree_filter(const Adjacency& adj, int n_white, GraphClass cls) {
  if (cls == GraphClass::All) return true;
  for (int v = 0; v < adj.n; ++v) {
    const int deg = std::popcount(adj.nbr[v]);
    if (deg == 0) return false;
    if (adj.n >= 3) {
      if (cls == GraphClass::TwoConnected && deg < 2) return false;
      // A black leaf makes its neighbor an articulation vertex.
      if (cls == GraphClass::ArticulationFree && v >= n_white && deg < 2) return false;
    }
  }
  return true;
}

template <class Sink>
void scan(int n_white, int n_black, GraphClass cls, const EnumerationOptions& opts,
          Sink&& sink_factory) {
  const int n = n_white + n_black;
  const int pairs = pair_count(n);
  const std::uint64_t total = std::uint64_t{1} << pairs;
  // Partition on the leading edge bits; chunks are merged in order.
  const std::size_t chunks = std::min<std::uint64_t>(total, 256);
  parallel_for(chunks, opts.threads, [&](std::size_t c) {
    auto& sink = sink_factory(c);
    const std::uint64_t begin = total * c / chunks;
    const std::uint64_t end = total * (c + 1) / chunks;
    for (std::uint64_t m = begin; m < end; ++m) {
      const ColoredGraph g(n_white, n_black, m);
      if (cls != GraphClass::All) {
        Adjacency adj(g);
        if (!passes_degree_filter(adj, n_white, cls)) continue;
        if (!in_class(g, cls)) continue;
      }
      sink(g);
    }
  });
}

}  // namespace

std::vector<ColoredGraph> enumerate(int n_white, int n_black, GraphClass cls,
                                    const EnumerationOptions& opts) {
  check_enumeration(n_white, n_black, opts);
  struct Bucket {
    std::vector<ColoredGraph> graphs;
    void operator()(const ColoredGraph& g) { graphs.push_back(g); }
  };
  std::vector<Bucket> buckets(256);
  scan(n_white, n_black, cls, opts, [&](std::size_t c) -> Bucket& { return buckets[c]; });
  std::vector<ColoredGraph> out;
  for (auto& b : buckets) out.insert(out.end(), b.graphs.begin(), b.graphs.end());
  return out;
}

std::size_t count(int n_white, int n_black, GraphClass cls, const EnumerationOptions& opts) {
  check_enumeration(n_white, n_black, opts);
  struct Counter {
    std::size_t n = 0;
    void operator()(const ColoredGraph&) { ++n; }
  };
  std::vector<Counter> counters(256);
  scan(n_white, n_black, cls, opts, [&](std::size_t c) -> Counter& { return counters[c]; });
  std::size_t total = 0;
  for (auto& c : counters) total += c.n;
  return total;
}

ColoredGraph permute_black(const ColoredGraph& g, const std::vector<int>& perm) {
  const int nw = g.n_white();
  auto image = [&](int v) { return v < nw ? v : nw + perm[v - nw]; };
  EdgeMask out = 0;
  for (auto [i, j] : g.edges()) out |= EdgeMask{1} << pair_index(image(i), image(j));
  return ColoredGraph(nw, g.n_black(), out);
}

EdgeMask canonical_mask(const ColoredGraph& g) {
  constexpr int kMaxBlack = 7;
  if (g.n_black() > kMaxBlack)
    throw SizeLimitError("canonical form by black permutation is limited", kMaxBlack);
  std::vector<int> perm(g.n_black());
  std::iota(perm.begin(), perm.end(), 0);
  const auto edges = g.edges();
  const int nw = g.n_white();
  EdgeMask best = ~EdgeMask{0};
  do {
    EdgeMask m = 0;
    for (auto [i, j] : edges) {
      const int a = i < nw ? i : nw + perm[i - nw];
      const int b = j < nw ? j : nw + perm[j - nw];
      m |= EdgeMask{1} << pair_index(a, b);
    }
    best = std::min(best, m);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<IsoClass> iso_classes(const std::vector<ColoredGraph>& graphs) {
  std::vector<IsoClass> out;
  if (graphs.empty()) return out;
  const int nw = graphs.front().n_white();
  const int nb = graphs.front().n_black();
  std::unordered_map<EdgeMask, std::size_t> index;
  for (const auto& g : graphs) {
    if (g.n_white() != nw || g.n_black() != nb)
      throw DomainError("iso_classes needs graphs of one (n_white, n_black) size");
    const EdgeMask key = canonical_mask(g);
    auto [it, fresh] = index.try_emplace(key, out.size());
    if (fresh)
      out.push_back(IsoClass{g, 1, key});
    else
      ++out[it->second].multiplicity;
  }
  return out;
}

}  // namespace clusterkit
