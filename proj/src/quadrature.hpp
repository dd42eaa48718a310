#ifndef CLUSTERKIT_SRC_QUADRATURE_HPP
#define CLUSTERKIT_SRC_QUADRATURE_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace clusterkit::detail {

/// Bisecting Gauss-Kronrod (15/31) against an absolute error target.
template <class F>
double adaptive_gk(F& f, double a, double b, double abs_tol, int depth, double* err) {
  double e = 0.0;
  const double v =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &e);
  if (depth <= 0 || e <= abs_tol) {
    *err += e;
    return v;
  }
  const double m = 0.5 * (a + b);
  return adaptive_gk(f, a, m, 0.5 * abs_tol, depth - 1, err) +
         adaptive_gk(f, m, b, 0.5 * abs_tol, depth - 1, err);
}

/// Integral over [cuts.front(), cuts.back()] split at every cut. Each piece
/// aims for max(rel_tol * int |f|, abs_tol).
template <class F>
double integrate_pieces(F&& f, std::vector<double> cuts, double rel_tol, double abs_tol,
                        double* err = nullptr, int max_depth = 12) {
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  double e_total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i];
    const double b = cuts[i + 1];
    double e = 0.0;
    double l1 = 0.0;
    const double v0 =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &e, &l1);
    const double target = std::max(rel_tol * l1, abs_tol);
    if (e <= target) {
      total += v0;
      e_total += e;
      continue;
    }
    total += adaptive_gk(f, a, b, target, max_depth, &e_total);
  }
  if (err) *err += e_total;
  return total;
}

}  // namespace clusterkit::detail

#endif  // CLUSTERKIT_SRC_QUADRATURE_HPP
