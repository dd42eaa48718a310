#ifndef CLUSTERKIT_CLOSURES_HPP
#define CLUSTERKIT_CLOSURES_HPP

// Percus-Yevick closure on a radial grid.
//
//   t = c * h          (rho-weighted convolution)
//   h = c + t
//   c = f (1 + t) + m
//   g = e^{-beta V} y,  y = 1 + t + d,  m = e^{-beta V} d
//
// so that y = 1 + d + [f y + d] * [e^{-beta V} y - 1]. PY sets d = 0.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "clusterkit/expansion.hpp"
#include "clusterkit/integrals.hpp"
#include "clusterkit/oz.hpp"
#include "clusterkit/potentials.hpp"

namespace clusterkit {

struct GridSpec {
  double dr = 0.01;
  std::size_t n_points = 1024;
};

struct ClosureFields {
  RadialFunction t;
  RadialFunction y;
  RadialFunction d;
  RadialFunction m;
  RadialFunction c;
  RadialFunction h;
  RadialFunction g;
  RadialFunction f;
  RadialFunction boltzmann;
  double rho = 0.0;
};

struct PyOptions {
  double mixing = 0.5;
  int max_iter = 10000;
  double tol = 1e-10;
  /// DivergenceError when min |1 - rho c_hat| drops below this.
  double min_denominator = 1e-8;
  /// Also iterate the t-form and require agreement within 10 tol.
  bool t_form_check = true;
  /// Fixed d(r); empty means d = 0.
  std::function<double(double)> d_term;
};

struct PyDiagnostics {
  int iterations = 0;
  double last_change = 0.0;
  /// sup |y - 1 - d - [f y + d] * [e y - 1]| after convergence.
  double residual = 0.0;
  /// sup |t_yform - t_tform|, or -1 when the cross-check is off.
  double t_form_difference = -1.0;
  double min_denominator = 0.0;
  /// Iterations whose sup-node change exceeded the previous one.
  int monotonicity_violations = 0;
  /// sup-node change at iterations 1, 2, 4, 8, ... and the last one.
  std::vector<std::pair<int, double>> history;

  std::string to_json() const;
};

struct PyResult {
  ClosureFields fields;
  PyDiagnostics diagnostics;
};

/// Damped Picard iteration on y. ConvergenceError at max_iter (carrying the
/// last change), DivergenceError from the denominator monitor or a
/// non-finite iterate.
PyResult py_solve(const PairPotential& p, double rho, const GridSpec& grid,
                  const PyOptions& opts = {});

/// The same fixed point iterated on t with m = 0:
/// t <- [f (1 + t)] * [f (1 + t) + t].
RadialFunction py_solve_t_form(const PairPotential& p, double rho, const GridSpec& grid,
                               const PyOptions& opts = {});

/// g, h, c, t columns, "# manifest: <hash>" header when given.
std::string fields_csv(const ClosureFields& f, const std::string& manifest_hash = "");

// ------------------------------------------------------------ error order

struct PyErrorOptions {
  GridSpec grid{1e-3, 12000};
  PyOptions solver;
  /// Separations in units of sigma; empty selects 0, 0.1, ..., 0.9, 1.1, ..., 3.0.
  std::vector<double> anchor_radii;
  McConfig mc;
  EnumerationOptions enum_opts;
  int threads = 1;
  /// Precomputed OZ-normalized h table over the anchors; built when empty.
  std::optional<CoefficientTable> h_table;
};

struct PyErrorPoint {
  double rho = 0.0;
  double error = 0.0;
  /// MC error of the truncated series at the worst anchor, sqrt(sum rho^2k err_k^2).
  double noise_floor = 0.0;
  double worst_r = 0.0;
};

struct PyErrorOrder {
  int K = 0;
  std::vector<PyErrorPoint> points;
  double slope = 0.0;
  double slope_std_error = 0.0;
  double band_lo = 0.0;
  double band_hi = 0.0;
  bool above_noise_floor = false;
  bool pass = false;
  std::string to_json() const;
};

/// e(rho) = max over anchors of |h_PY(r) - sum_{k <= K} rho^k H_k(r)|, fitted as
/// log e = a + s log rho by least squares. The band is s +- t_{0.975} se.
/// Passes when s >= 1.8 and every e(rho) exceeds 3 noise floors.
/// DomainError with fewer than 3 densities or K < 2.
PyErrorOrder py_error_order(const PairPotential& p, const std::vector<double>& rho_list, int K,
                            const PyErrorOptions& opts = {});

/// e(rho) at series orders 0..K_max for one density; the fit is skipped.
std::vector<PyErrorPoint> py_error_decay(const PairPotential& p, double rho, int K_max,
                                         const PyErrorOptions& opts = {});

// ------------------------------------------------------------ defect

/// m(r) = c_series(r) - f(r) (1 + t(r)) at the table separations, which must
/// be the uniform grid 0, dr, 2 dr, ...; c_series = sum_k rho^k C_k.
RadialFunction closure_defect(const ClosureFields& fields, const CoefficientTable& c2_table,
                              double rho);

struct DefectPoint {
  double r = 0.0;
  double value = 0.0;
  double std_error = 0.0;
};

/// Coefficient of rho^k in m: C_k - f (H_k - C_k), with correlated errors.
std::vector<DefectPoint> defect_coefficient(int k, const std::vector<double>& radii,
                                            const PairPotential& p, const McConfig& cfg,
                                            const EnumerationOptions& enum_opts = {});

}  // namespace clusterkit

#endif  // CLUSTERKIT_CLOSURES_HPP
