#ifndef CLUSTERKIT_CALIBRATION_HPP
#define CLUSTERKIT_CALIBRATION_HPP

// Monte Carlo calibration against integrals with known values.

#include <string>
#include <vector>

#include "clusterkit/integrals.hpp"

namespace clusterkit {

struct CalibrationCase {
  std::string name;
  ColoredGraph graph;
  std::vector<Point> anchors;
  PairPotential potential;
  double exact = 0.0;
};

/// Twenty cases: ball and lens volumes, factorizing trees, the hard-sphere
/// triangle, square-well bond integrals and exact 1D hard-rod values.
std::vector<CalibrationCase> calibration_cases();

struct CalibrationResult {
  std::string name;
  double exact = 0.0;
  int runs = 0;
  int within = 0;  // |estimate - exact| <= n_sigma * std_error
  int flagged = 0;
  double worst_z = 0.0;
};

/// Each case estimated by Monte Carlo with seeds derive_seed(cfg.seed, s),
/// s = 0..n_seeds-1.
std::vector<CalibrationResult> run_calibration(const std::vector<CalibrationCase>& cases,
                                               int n_seeds, const McConfig& cfg,
                                               double n_sigma = 4.0);

}  // namespace clusterkit

#endif  // CLUSTERKIT_CALIBRATION_HPP
