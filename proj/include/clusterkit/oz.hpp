#ifndef CLUSTERKIT_OZ_HPP
#define CLUSTERKIT_OZ_HPP

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "clusterkit/expansion.hpp"
#include "clusterkit/integrals.hpp"
#include "clusterkit/potentials.hpp"

namespace clusterkit {

/// A node where the function jumps; values[index] holds the midpoint.
struct SplitNode {
  std::size_t index = 0;
  double left = 0.0;
  double right = 0.0;
};

/// Samples a(r_j), r_j = j dr, j = 0..n-1, of a radial function on R^d.
class RadialFunction {
 public:
  RadialFunction(double dr, std::vector<double> values, int dimension,
                 std::vector<SplitNode> splits = {});

  /// Sample fn on the grid. Every point of `jumps` that falls on a node
  /// becomes a split node with one-sided limits and their midpoint.
  static RadialFunction sample(double dr, std::size_t n, int dimension,
                               const std::function<double(double)>& fn,
                               const std::vector<double>& jumps = {});

  double dr() const { return dr_; }
  std::size_t size() const { return values_.size(); }
  int dimension() const { return dimension_; }
  double r(std::size_t j) const { return dr_ * static_cast<double>(j); }
  double operator[](std::size_t j) const { return values_.at(j); }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  const std::vector<SplitNode>& splits() const { return splits_; }
  bool is_split(std::size_t j) const;
  double left(std::size_t j) const;
  double right(std::size_t j) const;
  /// Linear interpolation (one-sided at split nodes: from the right).
  double at(double r) const;

  /// "r,value" rows, optional "# manifest: <hash>" header.
  std::string to_csv(const std::string& manifest_hash = "") const;

 private:
  double dr_;
  std::vector<double> values_;
  int dimension_;
  std::vector<SplitNode> splits_;
};

/// Radial Fourier transform on a zero-padded grid of M = 2n nodes.
/// d = 3: a_hat(k_m) = (4 pi dr / k_m) sum_j r_j a_j sin(pi j m / M), with
/// k_m = m pi / (M dr), m = 1..M-1, via a type-I sine transform.
/// d = 1: a_hat(k_m) = dr (a_0 + 2 sum_j a_j cos(pi j m / M)), m = 0..M,
/// via a type-I cosine transform.
/// Products of transforms invert to trapezoid-rule convolutions.
class RadialTransform {
 public:
  RadialTransform(std::size_t n_points, double dr, int dimension);
  ~RadialTransform();
  RadialTransform(const RadialTransform&) = delete;
  RadialTransform& operator=(const RadialTransform&) = delete;

  std::size_t n_points() const { return n_; }
  /// Real-space length after padding (M for d = 3, M + 1 for d = 1).
  std::size_t padded_size() const;
  std::size_t n_modes() const;
  std::vector<double> kappa() const;

  /// Input may be n_points long or padded_size() long.
  std::vector<double> forward(const std::vector<double>& a) const;
  /// Returns padded_size() values. For d = 3 the truncated k sum carries a
  /// dr^2 / r error near r = 0; origin_fit replaces the first few nodes by a
  /// polynomial fit of r a(r) taken just outside that band.
  std::vector<double> inverse(const std::vector<double>& a_hat, bool origin_fit = true) const;

 private:
  struct Impl;
  std::size_t n_;
  double dr_;
  int d_;
  std::unique_ptr<Impl> impl_;
};

/// rho * (a * b) on the grid of a. d = 3 through RadialTransform, d = 1 by
/// direct trapezoid summation.
RadialFunction radial_convolve(const RadialFunction& a, const RadialFunction& b, double rho);

struct OzSolveReport {
  double residual_sup = 0.0;
  double residual_l1 = 0.0;
  double min_denominator = 0.0;
};

/// h with h_hat = c_hat / (1 - rho c_hat). Throws DivergenceError when
/// min |1 - rho c_hat| < min_denominator and NumericalError when the
/// a-posteriori residual exceeds 1e-8.
RadialFunction oz_solve_h(const RadialFunction& c, double rho, OzSolveReport* report = nullptr,
                          double min_denominator = 1e-8);

// ------------------------------------------------------------ census

struct CensusIdentity {
  int k = 0;
  std::size_t articulation_free = 0;
  std::size_t two_connected = 0;
  /// k * sum_l C(k-1, l) |B_{2,2+l}| |B^AF_{2,1+k-l}|: the first nodal vertex
  /// can be any of the k black labels.
  std::size_t nodal_split = 0;
  /// The same sum without the factor k.
  std::size_t nodal_split_without_label_factor = 0;
  bool holds = false;
  bool holds_without_label_factor = false;
};

CensusIdentity oz_census_identity(int k, const EnumerationOptions& enum_opts = {});

// ------------------------------------------------------------ order check

struct OzCheckOptions {
  Normalization normalization = Normalization::OzConsistent;
  double quad_tol = 1e-9;
  double n_sigma = 4.0;
  EnumerationOptions enum_opts;
};

struct OzAnchorResidual {
  double r = 0.0;
  double h_k = 0.0;
  double c_k = 0.0;
  double convolution = 0.0;
  double residual = 0.0;
  double std_error = 0.0;
  /// Residual with the literal 1/(2! k!) on h, for comparison.
  double literal_residual = 0.0;
  bool pass = false;
};

struct OzOrderReport {
  int k = 0;
  Normalization normalization = Normalization::OzConsistent;
  std::vector<OzAnchorResidual> anchors;
  CensusIdentity census;
  bool pass = false;
};

/// residual(r) = H_k - C_k - sum_{l<k} (C_l * H_{k-1-l})(r) at each
/// separation. H_k and C_k are graph sums. Convolutions of orders <= 1 use
/// closed forms for the lower-order functions and bipolar quadrature; higher
/// orders glue the two graph families at a shared black vertex and integrate
/// by Monte Carlo. Passes when |residual| <= n_sigma * error + quad_tol.
OzOrderReport oz_order_check(int k, const std::vector<double>& radii, const PairPotential& p,
                             const McConfig& cfg, const OzCheckOptions& opts = {});

/// Radial convolution of two callables by nested quadrature:
/// 3D bipolar form for r > 0, 4 pi int s^2 a b ds at r = 0; 1D on the line.
/// `cuts` lists radii where either function jumps or kinks; support_a and
/// support_b bound the supports.
double quadrature_convolution(const std::function<double(double)>& a, double support_a,
                              const std::function<double(double)>& b, double support_b,
                              const std::vector<double>& cuts, int dimension, double r,
                              double tol);

}  // namespace clusterkit

#endif  // CLUSTERKIT_OZ_HPP
