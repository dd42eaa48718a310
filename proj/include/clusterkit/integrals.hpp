#ifndef CLUSTERKIT_INTEGRALS_HPP
#define CLUSTERKIT_INTEGRALS_HPP

// Integrals of products of Mayer bonds over the black vertices of a graph
// with the white vertices pinned at given anchor points.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clusterkit/graphs.hpp"
#include "clusterkit/potentials.hpp"
#include "clusterkit/series.hpp"

namespace clusterkit {

/// A point of R^d; components past the dimension are ignored (and should be 0).
using Point = std::array<double, 3>;

enum class Method { Analytic, Quadrature, MonteCarlo };
std::string to_string(Method m);
Method method_from_string(const std::string& name);

struct MayerEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;
  Method method = Method::Analytic;
  bool exact = false;
  /// Set when the Monte Carlo variance estimate is unreliable (fewer than two
  /// nonzero sample weights).
  bool flagged = false;
  /// C(beta)^k * sup|f|^(|E| - k): a bound on |value|.
  double envelope = 0.0;
  /// Exact rational value in units of sigma^(k d), when known.
  std::optional<Rational> exact_value;
};

enum class Proposal { CoreBall, Gaussian };
std::string to_string(Proposal p);
Proposal proposal_from_string(const std::string& name);

struct McConfig {
  std::uint64_t seed = 20240611;
  std::uint64_t n_samples = 100000;
  Proposal proposal = Proposal::CoreBall;
  /// Draw every black vertex from its own random stream.
  bool stratify_by_vertex = false;
  /// Samples are split into this many strata with derived sub-seeds; the
  /// result depends on the strata count but not on the thread count.
  int strata = 64;
  int threads = 1;
  /// Use Monte Carlo for every graph with black vertices.
  bool force_monte_carlo = false;
  /// Largest black count handled by the exact 1D hard-rod engine.
  int max_exact_black = 3;
};

/// Integral over the black positions of the product of f over the edges of
/// g, whites pinned at `anchors` (one per white vertex).
///
/// Method selection: no black vertex -> product of f at the anchors (exact).
/// 1D hard rods with k <= max_exact_black -> exact piecewise-polynomial
/// integration in rationals. Hard spheres with one black vertex bonded to at
/// most two whites -> ball or lens volume (exact). Other potentials with one
/// such black vertex -> bipolar quadrature. Everything else -> Monte Carlo
/// on a tree proposal, deterministic for a fixed seed.
MayerEstimate zeta_bullet(const ColoredGraph& g, const std::vector<Point>& anchors,
                          const PairPotential& p, const McConfig& cfg = {});

/// Monte Carlo only, whatever the graph.
MayerEstimate zeta_bullet_mc(const ColoredGraph& g, const std::vector<Point>& anchors,
                             const PairPotential& p, const McConfig& cfg);

/// Exact integral for 1D hard rods with sigma = 1 and rational anchors.
Rational zeta_exact_hard_rod(const ColoredGraph& g, const std::vector<Rational>& anchors);

/// Exact rational value of a double.
Rational exact_rational(double x);

/// Volume of the intersection of two d-balls of radius R at center distance r.
double ball_overlap_volume(int dimension, double R, double r);

/// int f(|x - a|) f(|x - b|) dx over R^d with |a - b| = r, by nested
/// Gauss-Kronrod quadrature (3D uses bipolar coordinates).
double bond_pair_integral(const PairPotential& p, double r, double rel_tol = 1e-11,
                          double* error = nullptr);

/// N (N-1) ... (N-n+1) / volume^n, and 0 when n > N.
double finite_volume_factor(std::uint64_t N, double volume, std::uint64_t n);

/// Monte Carlo over a periodic cube of side `box_length` with minimum-image
/// distances; black vertices are uniform in the box.
MayerEstimate zeta_bullet_torus(const ColoredGraph& g, const std::vector<Point>& anchors,
                                const PairPotential& p, double box_length, const McConfig& cfg);

/// Anchor list for two whites at separation r along the first axis.
std::vector<Point> pair_anchors(double r);

/// Sub-seed for (seed, salt) via the splitmix64 finalizer.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace clusterkit

#endif  // CLUSTERKIT_INTEGRALS_HPP
