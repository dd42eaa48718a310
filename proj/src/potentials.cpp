#include "clusterkit/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "clusterkit/errors.hpp"

namespace clusterkit {

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::HardRod: return "hard_rod";
    case PotentialKind::HardSphere: return "hard_sphere";
    case PotentialKind::SquareWell: return "square_well";
    case PotentialKind::Tabulated: return "tabulated";
  }
  return "?";
}

PotentialKind potential_kind_from_string(const std::string& name) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return c == '-' ? '_' : static_cast<char>(std::tolower(c));
  });
  if (s == "hard_rod" || s == "hardrod" || s == "rod") return PotentialKind::HardRod;
  if (s == "hard_sphere" || s == "hardsphere" || s == "hs") return PotentialKind::HardSphere;
  if (s == "square_well" || s == "squarewell" || s == "sw") return PotentialKind::SquareWell;
  if (s == "tabulated" || s == "table") return PotentialKind::Tabulated;
  throw ConfigError("unknown potential kind '" + name + "'");
}

PairPotential PairPotential::hard_rod(double sigma, double beta) {
  PairPotential p;
  p.kind_ = PotentialKind::HardRod;
  p.dimension_ = 1;
  p.sigma_ = sigma;
  p.beta_ = beta;
  p.validate();
  return p;
}

PairPotential PairPotential::hard_sphere(double sigma, double beta) {
  PairPotential p;
  p.kind_ = PotentialKind::HardSphere;
  p.dimension_ = 3;
  p.sigma_ = sigma;
  p.beta_ = beta;
  p.validate();
  return p;
}

PairPotential PairPotential::square_well(double sigma, double epsilon, double lambda_range,
                                         double beta, double stability_B, int dimension) {
  PairPotential p;
  p.kind_ = PotentialKind::SquareWell;
  p.dimension_ = dimension;
  p.sigma_ = sigma;
  p.epsilon_ = epsilon;
  p.lambda_ = lambda_range;
  p.beta_ = beta;
  p.stability_B_ = stability_B;
  p.validate();
  return p;
}

PairPotential PairPotential::tabulated(std::vector<double> r, std::vector<double> v, double sigma,
                                       double beta, double stability_B, int dimension) {
  PairPotential p;
  p.kind_ = PotentialKind::Tabulated;
  p.dimension_ = dimension;
  p.sigma_ = sigma;
  p.beta_ = beta;
  p.stability_B_ = stability_B;
  p.table_r_ = std::move(r);
  p.table_v_ = std::move(v);
  p.validate();
  return p;
}

void PairPotential::validate() const {
  if (dimension_ != 1 && dimension_ != 3)
    throw DomainError("only dimensions 1 and 3 are supported");
  if (!(sigma_ > 0) || !std::isfinite(sigma_)) throw DomainError("sigma must be positive");
  if (!(beta_ > 0) || !std::isfinite(beta_)) throw DomainError("beta must be positive");
  if (!(stability_B_ >= 0)) throw DomainError("stability_B must be non-negative");
  if (kind_ == PotentialKind::HardRod && dimension_ != 1)
    throw DomainError("hard rods live in d = 1");
  if (kind_ == PotentialKind::HardSphere && dimension_ != 3)
    throw DomainError("hard spheres live in d = 3");
  if ((kind_ == PotentialKind::HardRod || kind_ == PotentialKind::HardSphere) &&
      stability_B_ != 0)
    throw DomainError("purely repulsive potentials have stability_B = 0");
  if (kind_ == PotentialKind::SquareWell) {
    if (!(epsilon_ >= 0)) throw DomainError("square-well depth must be >= 0");
    if (!(lambda_ > 1)) throw DomainError("square-well lambda must exceed 1");
  }
  if (kind_ == PotentialKind::Tabulated) {
    if (table_r_.size() < 2 || table_r_.size() != table_v_.size())
      throw DomainError("a potential table needs at least two (r, V) rows");
    for (std::size_t i = 0; i < table_r_.size(); ++i) {
      if (!std::isfinite(table_r_[i]) || !std::isfinite(table_v_[i]))
        throw DomainError("non-finite entry in potential table");
      if (i > 0 && !(table_r_[i] > table_r_[i - 1]))
        throw DomainError("potential table radii must increase strictly");
    }
    if (table_r_.back() <= sigma_) throw DomainError("potential table ends inside the core");
  }
}

double PairPotential::energy(double r) const {
  r = std::fabs(r);
  if (r < sigma_) return std::numeric_limits<double>::infinity();
  switch (kind_) {
    case PotentialKind::HardRod:
    case PotentialKind::HardSphere: return 0.0;
    case PotentialKind::SquareWell: return r < lambda_ * sigma_ ? -epsilon_ : 0.0;
    case PotentialKind::Tabulated: {
      if (r > table_r_.back()) return 0.0;
      if (r <= table_r_.front()) return table_v_.front();
      const auto it = std::upper_bound(table_r_.begin(), table_r_.end(), r);
      const std::size_t j = static_cast<std::size_t>(it - table_r_.begin());
      const double t = (r - table_r_[j - 1]) / (table_r_[j] - table_r_[j - 1]);
      return table_v_[j - 1] + t * (table_v_[j] - table_v_[j - 1]);
    }
  }
  return 0.0;
}

double PairPotential::boltzmann(double r) const {
  const double v = energy(r);
  if (std::isinf(v)) return 0.0;
  return std::exp(-beta_ * v);
}

double PairPotential::range() const {
  switch (kind_) {
    case PotentialKind::SquareWell: return lambda_ * sigma_;
    case PotentialKind::Tabulated: return table_r_.back();
    default: return sigma_;
  }
}

double PairPotential::f_sup() const {
  double s = 1.0;
  if (kind_ == PotentialKind::SquareWell) s = std::max(s, std::expm1(beta_ * epsilon_));
  if (kind_ == PotentialKind::Tabulated)
    for (double v : table_v_) s = std::max(s, std::fabs(std::expm1(-beta_ * v)));
  return s;
}

std::vector<double> PairPotential::breakpoints() const {
  std::vector<double> out{sigma_};
  if (kind_ == PotentialKind::SquareWell) out.push_back(lambda_ * sigma_);
  if (kind_ == PotentialKind::Tabulated) {
    for (double r : table_r_)
      if (r > sigma_) out.push_back(r);
  }
  return out;
}

double mayer_f(const PairPotential& p, double r) {
  if (std::fabs(r) < p.sigma()) return -1.0;
  return std::expm1(-p.beta() * p.energy(r));
}

double shell_measure(int dimension, double r) {
  if (dimension == 1) return 2.0;
  if (dimension == 3) return 4.0 * std::numbers::pi * r * r;
  throw DomainError("only dimensions 1 and 3 are supported");
}

double ball_volume(int dimension, double r) {
  if (dimension == 1) return 2.0 * r;
  if (dimension == 3) return 4.0 / 3.0 * std::numbers::pi * r * r * r;
  throw DomainError("only dimensions 1 and 3 are supported");
}

double c_beta(const PairPotential& p) {
  const int d = p.dimension();
  switch (p.kind()) {
    case PotentialKind::HardRod:
    case PotentialKind::HardSphere: return ball_volume(d, p.sigma());
    case PotentialKind::SquareWell:
      return ball_volume(d, p.sigma()) +
             std::expm1(p.beta() * p.epsilon()) *
                 (ball_volume(d, p.lambda_range() * p.sigma()) - ball_volume(d, p.sigma()));
    case PotentialKind::Tabulated: return c_beta_quadrature(p);
  }
  return 0.0;
}

double c_beta_quadrature(const PairPotential& p, double rel_tol) {
  using boost::math::quadrature::gauss_kronrod;
  const int d = p.dimension();
  auto integrand = [&](double r) { return std::fabs(mayer_f(p, r)) * shell_measure(d, r); };
  double total = 0.0;
  double err_total = 0.0;
  double a = 0.0;
  for (double b : p.breakpoints()) {
    if (b <= a) continue;
    double err = 0.0;
    // Interior of each piece only; the endpoints carry the jumps.
    total += gauss_kronrod<double, 61>::integrate(integrand, a, b, 15, rel_tol * 1e-2, &err);
    err_total += err;
    a = b;
  }
  if (err_total > rel_tol * std::fabs(total))
    throw NumericalError("C(beta) quadrature did not reach the requested tolerance",
                         err_total / std::fabs(total));
  return total;
}

namespace {

double parse_double(const std::map<std::string, std::string>& keys, const std::string& key,
                    double fallback, bool required) {
  const auto it = keys.find(key);
  if (it == keys.end()) {
    if (required) throw ConfigError("potential definition is missing key '" + key + "'");
    return fallback;
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("potential key '" + key + "' is not a number: '" + it->second + "'");
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("bad number '" + item + "' in list");
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void read_table_csv(const std::string& path, std::vector<double>& r, std::vector<double>& v) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open potential table '" + path + "'");
  r.clear();
  v.clear();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a = 0.0, b = 0.0;
    if (!(row >> a >> b)) {
      if (r.empty() && lineno == 1) continue;  // header
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected two numbers");
    }
    r.push_back(a);
    v.push_back(b);
  }
}

PairPotential potential_from_keys(const std::map<std::string, std::string>& keys,
                                  const std::string& base_dir) {
  const auto kind_it = keys.find("kind");
  if (kind_it == keys.end()) throw ConfigError("potential definition is missing key 'kind'");
  const PotentialKind kind = potential_kind_from_string(kind_it->second);
  const double sigma = parse_double(keys, "sigma", 1.0, false);
  const double beta = parse_double(keys, "beta", 1.0, false);
  const double stability = parse_double(keys, "stability_B", 0.0, false);
  const int default_d = kind == PotentialKind::HardRod ? 1 : 3;
  const int d = static_cast<int>(parse_double(keys, "d", default_d, false));
  try {
    switch (kind) {
      case PotentialKind::HardRod:
        if (d != 1) throw ConfigError("hard_rod requires d = 1");
        return PairPotential::hard_rod(sigma, beta);
      case PotentialKind::HardSphere:
        if (d != 3) throw ConfigError("hard_sphere requires d = 3");
        return PairPotential::hard_sphere(sigma, beta);
      case PotentialKind::SquareWell:
        return PairPotential::square_well(sigma, parse_double(keys, "epsilon", 0, true),
                                          parse_double(keys, "lambda", 0, true), beta,
                                          stability, d);
      case PotentialKind::Tabulated: {
        std::vector<double> r, v;
        if (keys.count("table_r") && keys.count("table_v")) {
          r = parse_list(keys.at("table_r"));
          v = parse_list(keys.at("table_v"));
        } else {
          const auto path_it = keys.find("table_path");
          if (path_it == keys.end())
            throw ConfigError("tabulated potential needs 'table_path'");
          std::filesystem::path path(path_it->second);
          if (path.is_relative()) path = std::filesystem::path(base_dir) / path;
          read_table_csv(path.string(), r, v);
        }
        return PairPotential::tabulated(std::move(r), std::move(v), sigma, beta, stability, d);
      }
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid potential: ") + e.what());
  }
  throw ConfigError("unreachable potential kind");
}

PairPotential load_potential(const std::string& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("potential file not found: " + path);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("cannot parse potential file: ") + e.what());
  }
  std::map<std::string, std::string> keys;
  for (const auto& [key, node] : tree)
    if (node.empty()) keys[key] = node.data();
  if (auto section = tree.get_child_optional("potential"))
    for (const auto& [key, node] : *section) keys[key] = node.data();
  const auto base = std::filesystem::path(path).parent_path().string();
  return potential_from_keys(keys, base.empty() ? "." : base);
}

std::map<std::string, std::string> potential_keys(const PairPotential& p) {
  std::map<std::string, std::string> out;
  out["kind"] = to_string(p.kind());
  out["d"] = std::to_string(p.dimension());
  out["sigma"] = fmt(p.sigma());
  out["beta"] = fmt(p.beta());
  out["stability_B"] = fmt(p.stability_B());
  if (p.kind() == PotentialKind::SquareWell) {
    out["epsilon"] = fmt(p.epsilon());
    out["lambda"] = fmt(p.lambda_range());
  }
  if (p.kind() == PotentialKind::Tabulated) {
    std::string rs, vs;
    for (std::size_t i = 0; i < p.table_r().size(); ++i) {
      if (i) {
        rs += ',';
        vs += ',';
      }
      rs += fmt(p.table_r()[i]);
      vs += fmt(p.table_v()[i]);
    }
    out["table_r"] = rs;
    out["table_v"] = vs;
  }
  return out;
}

}  // namespace clusterkit
