#ifndef CLUSTERKIT_TESTS_LIQUIDS_HPP
#define CLUSTERKIT_TESTS_LIQUIDS_HPP

// Closed forms for two exactly solvable cases.

#include <cmath>

namespace oracle {

/// Pair correlation of hard rods (length sigma) at density rho: a sum over
/// the number n of rods between the pair, each gap exponential with mean
/// L = 1/rho - sigma.
inline double tonks_g(double r, double rho, double sigma = 1.0) {
  const double L = 1.0 / rho - sigma;
  double s = 0.0;
  for (int n = 1; n * sigma < r; ++n) {
    const double x = r - n * sigma;
    s += std::exp((n - 1) * std::log(x) - std::lgamma(n) - n * std::log(L) - x / L);
  }
  return s / rho;
}

/// Percus-Yevick direct correlation of hard spheres at packing fraction eta.
inline double wertheim_c(double r, double eta, double sigma = 1.0) {
  const double x = r / sigma;
  if (x >= 1.0) return 0.0;
  const double q = std::pow(1.0 - eta, 4);
  const double a = std::pow(1.0 + 2.0 * eta, 2) / q;
  const double b = std::pow(1.0 + 0.5 * eta, 2) / q;
  return -a + 6.0 * eta * b * x - 0.5 * eta * a * x * x * x;
}

}  // namespace oracle

#endif  // CLUSTERKIT_TESTS_LIQUIDS_HPP
