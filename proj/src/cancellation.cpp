#include "clusterkit/cancellation.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

#include "clusterkit/errors.hpp"

namespace clusterkit {

VertexMask MultiIndex::support_union() const {
  VertexMask u = 0;
  for (VertexMask p : polymers) u |= p;
  return u;
}

namespace {

// Signed count of connected spanning subgraphs of a graph given by adjacency
// masks. Uses C(S) = w(S) - sum_{T contains min(S), T != S} C(T) w(S\T), where
// w(S) = sum over all edge subsets of (-1)^|E| is 1 iff S spans no edge.
std::int64_t signed_connected_count(const std::vector<std::uint32_t>& adj) {
  const int n = static_cast<int>(adj.size());
  if (n == 0) return 0;
  if (n > 20) throw SizeLimitError("incompatibility graph too large", 20);
  const std::uint32_t full = (std::uint32_t{1} << n) - 1;
  std::vector<std::int8_t> independent(std::size_t{1} << n, 0);
  independent[0] = 1;
  for (std::uint32_t s = 1; s <= full; ++s) {
    const int v = std::countr_zero(s);
    const std::uint32_t rest = s & (s - 1);
    independent[s] = independent[rest] && !(adj[v] & rest);
  }
  std::vector<std::int64_t> conn(std::size_t{1} << n, 0);
  for (std::uint32_t s = 1; s <= full; ++s) {
    const std::uint32_t low = s & (~s + 1);
    const std::uint32_t others = s ^ low;
    std::int64_t value = independent[s];
    // Proper subsets T of s that contain the lowest vertex.
    for (std::uint32_t sub = (others - 1) & others;; sub = (sub - 1) & others) {
      if (sub != others) {
        const std::uint32_t t = sub | low;
        value -= conn[t] * independent[s ^ t];
      }
      if (sub == 0) break;
    }
    if (others == 0) value = 1;
    conn[s] = value;
  }
  return conn[full];
}

std::int64_t factorial(int m) {
  std::int64_t f = 1;
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

}  // namespace

PolymerCoefficient polymer_coefficient(const MultiIndex& index) {
  if (index.polymers.size() != index.multiplicity.size())
    throw DomainError("multi-index polymers and multiplicities differ in length");
  std::vector<int> owner;
  std::int64_t denom = 1;
  for (std::size_t i = 0; i < index.polymers.size(); ++i) {
    if (index.multiplicity[i] < 1) throw DomainError("multi-index multiplicity must be >= 1");
    if (index.polymers[i] == 0) throw DomainError("empty polymer in multi-index");
    for (int c = 0; c < index.multiplicity[i]; ++c) owner.push_back(static_cast<int>(i));
    denom *= factorial(index.multiplicity[i]);
  }
  std::vector<std::uint32_t> adj(owner.size(), 0);
  for (std::size_t a = 0; a < owner.size(); ++a)
    for (std::size_t b = a + 1; b < owner.size(); ++b)
      if (index.polymers[owner[a]] & index.polymers[owner[b]]) {
        adj[a] |= std::uint32_t{1} << b;
        adj[b] |= std::uint32_t{1} << a;
      }
  PolymerCoefficient out;
  out.numerator = signed_connected_count(adj);
  out.denominator = denom;
  const std::int64_t g = std::gcd(out.numerator, out.denominator);
  if (g > 1) {
    out.numerator /= g;
    out.denominator /= g;
  }
  return out;
}

std::vector<VertexMask> articulation_free_components(const ColoredGraph& g) {
  std::vector<VertexMask> bl = blocks(g);
  const VertexMask whites = g.white_mask();
  if (g.n_white() == 1) {
    std::stable_partition(bl.begin(), bl.end(), [&](VertexMask b) { return (b & whites) != 0; });
    return bl;
  }
  std::vector<bool> stripped(bl.size(), false);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < bl.size(); ++i) {
      if (stripped[i]) continue;
      VertexMask shared = 0;
      std::size_t alive = 0;
      for (std::size_t j = 0; j < bl.size(); ++j) {
        if (stripped[j]) continue;
        ++alive;
        if (j != i) shared |= bl[i] & bl[j];
      }
      if (alive <= 1) break;
      if (std::popcount(shared) <= 1 && ((bl[i] & ~shared) & whites) == 0) {
        stripped[i] = true;
        changed = true;
      }
    }
  }
  std::vector<VertexMask> out;
  VertexMask core = 0;
  for (std::size_t i = 0; i < bl.size(); ++i)
    if (!stripped[i]) core |= bl[i];
  out.push_back(core);
  for (std::size_t i = 0; i < bl.size(); ++i)
    if (stripped[i]) out.push_back(bl[i]);
  return out;
}

namespace {

// Vertex sets of unions of connected sub-families of the components.
std::vector<VertexMask> candidate_polymers(const std::vector<VertexMask>& comps) {
  const std::size_t m = comps.size();
  std::vector<VertexMask> out;
  for (std::uint32_t fam = 1; fam < (std::uint32_t{1} << m); ++fam) {
    // Connectivity of the component family through shared vertices.
    std::uint32_t seen = fam & (~fam + 1);
    bool grew = true;
    while (grew) {
      grew = false;
      for (std::size_t j = 0; j < m; ++j) {
        if (!((fam >> j) & 1U) || ((seen >> j) & 1U)) continue;
        for (std::size_t i = 0; i < m; ++i)
          if (((seen >> i) & 1U) && (comps[i] & comps[j])) {
            seen |= std::uint32_t{1} << j;
            grew = true;
            break;
          }
      }
    }
    if (seen != fam) continue;
    VertexMask u = 0;
    for (std::size_t j = 0; j < m; ++j)
      if ((fam >> j) & 1U) u |= comps[j];
    out.push_back(u);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool edges_covered(const ColoredGraph& g, const std::vector<VertexMask>& polymers) {
  for (auto [i, j] : g.edges()) {
    const VertexMask e = (VertexMask{1} << i) | (VertexMask{1} << j);
    bool inside = false;
    for (VertexMask p : polymers)
      if ((p & e) == e) {
        inside = true;
        break;
      }
    if (!inside) return false;
  }
  return true;
}

}  // namespace

std::vector<MultiIndex> admissible_multiindices(const ColoredGraph& g) {
  if (g.n_vertices() > kCancellationVertexCap)
    throw SizeLimitError("cancellation brute force is limited by vertex count",
                         kCancellationVertexCap);
  if (!is_connected(g)) throw DomainError("cancellation sum requires a connected graph");
  const auto cands = candidate_polymers(articulation_free_components(g));
  const VertexMask all = g.all_vertices();
  const VertexMask whites = g.white_mask();
  const int total = g.n_vertices();

  std::vector<MultiIndex> out;
  std::vector<VertexMask> chosen;
  auto accept = [&] {
    VertexMask u = 0;
    for (VertexMask p : chosen) u |= p;
    if (u != all) return;
    if (!edges_covered(g, chosen)) return;
    // Some polymer must hold every white; it plays the role of V0.
    for (std::size_t z = 0; z < chosen.size(); ++z) {
      if ((chosen[z] & whites) != whites) continue;
      int size_sum = std::popcount(chosen[z]);
      for (std::size_t i = 0; i < chosen.size(); ++i)
        if (i != z) size_sum += std::popcount(chosen[i]) - 1;
      if (size_sum == total) {
        out.push_back(MultiIndex{chosen, std::vector<int>(chosen.size(), 1)});
        return;
      }
    }
  };
  auto search = [&](auto&& self, std::size_t from) -> void {
    if (!chosen.empty()) accept();
    for (std::size_t i = from; i < cands.size(); ++i) {
      bool ok = true;
      for (VertexMask p : chosen)
        if (std::popcount(p & cands[i]) > 1) {
          ok = false;
          break;
        }
      if (!ok) continue;
      chosen.push_back(cands[i]);
      self(self, i + 1);
      chosen.pop_back();
    }
  };
  search(search, 0);
  return out;
}

std::int64_t multiindex_cancellation_sum(const ColoredGraph& g) {
  std::int64_t sum = 0;
  for (const auto& index : admissible_multiindices(g)) {
    const auto c = polymer_coefficient(index);
    if (c.denominator != 1) throw NumericalError("non-integral polymer coefficient", 0.0);
    sum += c.numerator;
  }
  return sum;
}

}  // namespace clusterkit
