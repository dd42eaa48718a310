#ifndef CLUSTERKIT_POTENTIALS_HPP
#define CLUSTERKIT_POTENTIALS_HPP

#include <map>
#include <string>
#include <vector>

namespace clusterkit {

enum class PotentialKind { HardRod, HardSphere, SquareWell, Tabulated };

std::string to_string(PotentialKind kind);
PotentialKind potential_kind_from_string(const std::string& name);

/// Spherically symmetric pair potential in d = 1 or d = 3.
///
/// Hard rods and hard spheres have V = +inf for r < sigma and 0 beyond. The
/// square well adds V = -epsilon on sigma <= r < lambda * sigma. A tabulated
/// potential is hard below sigma, piecewise linear through the table on
/// [sigma, r_last] (constant below the first row) and zero past r_last.
class PairPotential {
 public:
  static PairPotential hard_rod(double sigma = 1.0, double beta = 1.0);
  static PairPotential hard_sphere(double sigma = 1.0, double beta = 1.0);
  static PairPotential square_well(double sigma, double epsilon, double lambda_range,
                                   double beta, double stability_B, int dimension = 3);
  static PairPotential tabulated(std::vector<double> r, std::vector<double> v, double sigma,
                                 double beta, double stability_B, int dimension = 3);

  PotentialKind kind() const { return kind_; }
  int dimension() const { return dimension_; }
  double sigma() const { return sigma_; }
  double epsilon() const { return epsilon_; }
  double lambda_range() const { return lambda_; }
  double beta() const { return beta_; }
  double stability_B() const { return stability_B_; }
  const std::vector<double>& table_r() const { return table_r_; }
  const std::vector<double>& table_v() const { return table_v_; }

  /// V(r); +inf inside the core. Negative r is folded to |r|.
  double energy(double r) const;
  /// exp(-beta V(r)), 0 inside the core.
  double boltzmann(double r) const;
  /// Radius beyond which V = 0.
  double range() const;
  /// sup |f|.
  double f_sup() const;
  /// Radii where f jumps or has a kink, in increasing order, ending at range().
  std::vector<double> breakpoints() const;

 private:
  PairPotential() = default;
  void validate() const;

  PotentialKind kind_ = PotentialKind::HardSphere;
  int dimension_ = 3;
  double sigma_ = 1.0;
  double epsilon_ = 0.0;
  double lambda_ = 1.0;
  double beta_ = 1.0;
  double stability_B_ = 0.0;
  std::vector<double> table_r_;
  std::vector<double> table_v_;
};

/// Mayer bond exp(-beta V(r)) - 1. Exactly -1 on the hard core.
double mayer_f(const PairPotential& p, double r);

/// Surface area of the unit sphere in R^d times r^(d-1) (2 for d = 1).
double shell_measure(int dimension, double r);
/// Volume of the d-ball of radius r.
double ball_volume(int dimension, double r);

/// Integral of |f| over R^d. Closed form for hard-core and square-well
/// kinds, adaptive quadrature for tabulated ones.
double c_beta(const PairPotential& p);

/// The same integral by piecewise Gauss-Kronrod quadrature between
/// breakpoints. Throws NumericalError when rel_tol is not reached.
double c_beta_quadrature(const PairPotential& p, double rel_tol = 1e-10);

/// Build a potential from key/value pairs: kind, d, sigma, epsilon, lambda,
/// beta, stability_B, table_path. Relative table paths resolve against
/// base_dir. Throws ConfigError on missing or malformed keys.
PairPotential potential_from_keys(const std::map<std::string, std::string>& keys,
                                  const std::string& base_dir = ".");

/// Read an INI-style potential file (keys at top level or under
/// [potential]).
PairPotential load_potential(const std::string& path);

/// Two-column CSV (r, V); '#' comments and a non-numeric header row are
/// skipped.
void read_table_csv(const std::string& path, std::vector<double>& r, std::vector<double>& v);

/// Key/value description of a potential, inverse of potential_from_keys
/// (tabulated data is inlined as table_r / table_v lists).
std::map<std::string, std::string> potential_keys(const PairPotential& p);

}  // namespace clusterkit

#endif  // CLUSTERKIT_POTENTIALS_HPP
