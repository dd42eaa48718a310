#ifndef CLUSTERKIT_TESTS_BRUTE_GRAPHS_HPP
#define CLUSTERKIT_TESTS_BRUTE_GRAPHS_HPP

// Graph classes straight from the definitions: adjacency matrices, vertex
// deletion and flood fill. Deliberately slow and independent of the library.

#include <cstdint>
#include <utility>
#include <vector>

namespace oracle {

struct BruteGraph {
  int n_white = 0;
  int n = 0;
  std::vector<std::vector<bool>> adj;
};

inline BruteGraph from_subset(int n_white, int n, std::uint64_t subset) {
  BruteGraph g{n_white, n, std::vector<std::vector<bool>>(n, std::vector<bool>(n, false))};
  int bit = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j, ++bit)
      if ((subset >> bit) & 1U) g.adj[i][j] = g.adj[j][i] = true;
  return g;
}

// Components of the graph with vertex `removed` deleted (-1 keeps all).
inline std::vector<std::vector<int>> pieces(const BruteGraph& g, int removed) {
  std::vector<int> label(g.n, -1);
  std::vector<std::vector<int>> out;
  for (int s = 0; s < g.n; ++s) {
    if (s == removed || label[s] >= 0) continue;
    std::vector<int> comp{s}, stack{s};
    label[s] = static_cast<int>(out.size());
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < g.n; ++v)
        if (v != removed && label[v] < 0 && g.adj[u][v]) {
          label[v] = label[s];
          comp.push_back(v);
          stack.push_back(v);
        }
    }
    out.push_back(comp);
  }
  return out;
}

inline bool connected(const BruteGraph& g) { return pieces(g, -1).size() == 1; }

inline bool is_cutpoint(const BruteGraph& g, int v) { return pieces(g, v).size() > 1; }

// A cutpoint leaving a piece without white vertices.
inline bool is_articulation(const BruteGraph& g, int v) {
  if (!is_cutpoint(g, v)) return false;
  for (const auto& c : pieces(g, v)) {
    bool white = false;
    for (int u : c) white = white || u < g.n_white;
    if (!white) return true;
  }
  return false;
}

struct Counts {
  std::uint64_t all = 0, conn = 0, af = 0, two = 0;
};

inline Counts census(int n_white, int n_black) {
  const int n = n_white + n_black;
  const int pairs = n * (n - 1) / 2;
  Counts c;
  for (std::uint64_t s = 0; s < (std::uint64_t{1} << pairs); ++s) {
    ++c.all;
    const BruteGraph g = from_subset(n_white, n, s);
    if (!connected(g)) continue;
    ++c.conn;
    bool any_cut = false, any_art = false;
    for (int v = 0; v < n; ++v) {
      any_cut = any_cut || is_cutpoint(g, v);
      any_art = any_art || is_articulation(g, v);
    }
    if (!any_art) ++c.af;
    if (!any_cut) ++c.two;
  }
  return c;
}

}  // namespace oracle

#endif  // CLUSTERKIT_TESTS_BRUTE_GRAPHS_HPP
