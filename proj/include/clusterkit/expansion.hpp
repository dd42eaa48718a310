#ifndef CLUSTERKIT_EXPANSION_HPP
#define CLUSTERKIT_EXPANSION_HPP

// Density-series coefficients assembled from graph integrals.
//
// h_coefficient(n, k) = 1/(n! k!) * sum over B^AF_{n,n+k} of zeta
// c2_coefficient(k)   = 1/k!       * sum over B_{2,2+k}    of zeta
//
// With n = 2 the two carry different factorials at k = 0 (f/2 against f).
// Normalization::OzConsistent multiplies h by n! wherever h and c meet (the
// order checks, series evaluation); Normalization::Literal keeps 1/(n! k!).

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "clusterkit/graphs.hpp"
#include "clusterkit/integrals.hpp"
#include "clusterkit/potentials.hpp"
#include "clusterkit/series.hpp"
#include "clusterkit/uncertain.hpp"

namespace clusterkit {

enum class Normalization { OzConsistent, Literal };
std::string to_string(Normalization n);
Normalization normalization_from_string(const std::string& name);

/// Factor that turns a literal h^(n) coefficient into the one that enters
/// the OZ relation: n! for OzConsistent, 1 for Literal.
double h_reconciliation_factor(int n, Normalization norm);

/// Sum of zeta over every labeled graph of a class, evaluated once per
/// black-permutation isomorphism class and weighted by its multiplicity.
struct GraphSum {
  Uncertain total;
  std::size_t graph_count = 0;
  std::size_t class_count = 0;
  std::uint64_t n_samples = 0;
  bool exact = true;
  bool flagged = false;
  Method method = Method::Analytic;  // MonteCarlo if any term needed it
  std::optional<Rational> exact_total;  // in units of sigma^(k d)
};

/// Optional memo of per-class estimates, keyed by graph and anchors.
class EstimateCache {
 public:
  const MayerEstimate* find(const std::string& key) const;
  void store(const std::string& key, const MayerEstimate& e);
  std::size_t size() const { return map_.size(); }

 private:
  std::map<std::string, MayerEstimate> map_;
};

/// Each class is integrated with its own seed derived from cfg.seed and the
/// class's canonical form, so one graph gets the same estimate wherever it
/// appears; its noise source id is derived the same way (plus anchors).
GraphSum graph_sum(int n_white, int n_black, GraphClass cls, const std::vector<Point>& anchors,
                   const PairPotential& p, const McConfig& cfg,
                   const EnumerationOptions& enum_opts = {}, EstimateCache* cache = nullptr);

/// Noise source id of one isomorphism class at one anchor set.
std::uint64_t graph_source_id(int n_white, int n_black, EdgeMask canonical,
                              const std::vector<Point>& anchors);

MayerEstimate to_estimate(const GraphSum& s, const Rational& scale);

/// 1/(n! k!) sum over B^AF_{n,n+k}.
MayerEstimate h_coefficient(int n, int k, const std::vector<Point>& anchors,
                            const PairPotential& p, const McConfig& cfg,
                            const EnumerationOptions& enum_opts = {});
/// Same with correlated error terms, scaled by h_reconciliation_factor.
Uncertain h_coefficient_u(int n, int k, const std::vector<Point>& anchors,
                          const PairPotential& p, const McConfig& cfg, Normalization norm,
                          const EnumerationOptions& enum_opts = {},
                          EstimateCache* cache = nullptr);

/// 1/k! sum over B_{2,2+k}.
MayerEstimate c2_coefficient(int k, const std::vector<Point>& anchors, const PairPotential& p,
                             const McConfig& cfg, const EnumerationOptions& enum_opts = {});
Uncertain c2_coefficient_u(int k, const std::vector<Point>& anchors, const PairPotential& p,
                           const McConfig& cfg, const EnumerationOptions& enum_opts = {},
                           EstimateCache* cache = nullptr);

/// 1/m! sum over B_{1,m+1} with the white vertex at the origin.
MayerEstimate virial_beta(int m, const PairPotential& p, const McConfig& cfg,
                          const EnumerationOptions& enum_opts = {});
Uncertain virial_beta_u(int m, const PairPotential& p, const McConfig& cfg,
                        const EnumerationOptions& enum_opts = {});
/// Hard rods, sigma = 1, exact.
Rational virial_beta_exact_hard_rod(int m, const EnumerationOptions& enum_opts = {});

// ------------------------------------------------------------ tables

enum class TableTarget { H, C2, Virial };
std::string to_string(TableTarget t);
TableTarget table_target_from_string(const std::string& name);

struct CoefficientTable {
  TableTarget target = TableTarget::H;
  int n = 2;  // number of whites for H tables
  Normalization normalization = Normalization::OzConsistent;
  std::vector<std::vector<Point>> anchors;       // shared by all orders
  std::vector<std::vector<MayerEstimate>> orders;  // orders[k][anchor], literal values
  std::vector<std::size_t> graph_counts;           // per order
  std::map<std::string, std::string> provenance;

  int max_order() const { return static_cast<int>(orders.size()) - 1; }
  /// Stored value times the reconciliation factor of the table.
  double value(int k, std::size_t anchor) const;
  double std_error(int k, std::size_t anchor) const;
  double factor() const;

  std::string to_json() const;
  static CoefficientTable from_json(const std::string& text);
  /// Columns k, r, value, std_error (r = |q1 - q2| for two-point tables).
  std::string to_csv() const;
};

/// Two-point tables over anchor separations `radii` for orders 0..K.
CoefficientTable build_h_table(int K, const std::vector<double>& radii, const PairPotential& p,
                               const McConfig& cfg, Normalization norm = Normalization::OzConsistent,
                               const EnumerationOptions& enum_opts = {});
CoefficientTable build_c2_table(int K, const std::vector<double>& radii, const PairPotential& p,
                                const McConfig& cfg, const EnumerationOptions& enum_opts = {});
CoefficientTable build_virial_table(int K, const PairPotential& p, const McConfig& cfg,
                                    const EnumerationOptions& enum_opts = {});

/// Default radial anchor grid 0, sigma/20, ..., 6 sigma.
std::vector<double> default_anchor_radii(double sigma, double step_fraction = 0.05,
                                         double r_max_factor = 6.0);

struct SeriesValue {
  double value = 0.0;
  double std_error = 0.0;
  double tail_estimate = 0.0;
  bool tail_reliable = false;
  std::string note;
};

/// sum_{k <= K} rho^k coeff_k at one anchor plus a geometric tail C e^{-ck}
/// fitted to the last min(4, K) orders.
SeriesValue series_eval(const CoefficientTable& table, double rho, int K, std::size_t anchor = 0);

/// Geometric tail fit on per-order contributions; exposed for reuse.
SeriesValue fit_tail(const std::vector<double>& contributions);

// ------------------------------------------------------------ identities

/// rho/z = sum_{k < K} z^k / k! * sum over C_{1,1+k} of zeta(g; 0),
/// orders 0..K-1.
FormalSeries<Uncertain> activity_series(int K, const PairPotential& p, const McConfig& cfg,
                                        const EnumerationOptions& enum_opts = {});
FormalSeries<Rational> activity_series_exact_hard_rod(int K,
                                                      const EnumerationOptions& enum_opts = {});

struct IdentityResidual {
  int order = 0;
  double residual = 0.0;
  double std_error = 0.0;
  std::optional<Rational> exact_residual;
  bool pass = false;
};

/// log(rho(z)/z) against sum_m beta_m rho(z)^m, coefficient-wise through
/// order K. Exact mode (hard rods only) uses rational arithmetic and passes
/// only on exact zeros; otherwise the bound is 4 propagated errors.
std::vector<IdentityResidual> dissymmetry_check(int K, const PairPotential& p,
                                                const McConfig& cfg, bool exact,
                                                const EnumerationOptions& enum_opts = {});

}  // namespace clusterkit

#endif  // CLUSTERKIT_EXPANSION_HPP
