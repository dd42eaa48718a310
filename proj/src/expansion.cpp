#include "clusterkit/expansion.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "clusterkit/errors.hpp"
#include "clusterkit/hashing.hpp"

namespace clusterkit {

using nlohmann::json;

std::string to_string(Normalization n) {
  return n == Normalization::OzConsistent ? "oz_consistent" : "literal";
}

Normalization normalization_from_string(const std::string& name) {
  if (name == "oz_consistent" || name == "oz") return Normalization::OzConsistent;
  if (name == "literal") return Normalization::Literal;
  throw ConfigError("unknown normalization '" + name + "' (oz_consistent|literal)");
}

namespace {

double factorial(int m) {
  double f = 1.0;
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

Rational rational_factorial(int m) {
  Rational f(1);
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

}  // namespace

double h_reconciliation_factor(int n, Normalization norm) {
  return norm == Normalization::OzConsistent ? factorial(n) : 1.0;
}

const MayerEstimate* EstimateCache::find(const std::string& key) const {
  const auto it = map_.find(key);
  return it == map_.end() ? nullptr : &it->second;
}

void EstimateCache::store(const std::string& key, const MayerEstimate& e) { map_[key] = e; }

std::uint64_t graph_source_id(int n_white, int n_black, EdgeMask canonical,
                              const std::vector<Point>& anchors) {
  Fnv1a h;
  h.value(n_white).value(n_black).value(canonical);
  for (const auto& a : anchors) h.value(a);
  return h.digest();
}

namespace {

std::uint64_t class_seed(std::uint64_t seed, int n_white, int n_black, EdgeMask canonical) {
  Fnv1a h;
  h.value(n_white).value(n_black).value(canonical);
  return derive_seed(seed, h.digest());
}

std::string cache_key(int n_white, int n_black, EdgeMask canonical,
                      const std::vector<Point>& anchors, const McConfig& cfg) {
  std::ostringstream os;
  os << n_white << ':' << n_black << ':' << canonical << ':' << cfg.seed << ':' << cfg.n_samples
     << ':' << cfg.force_monte_carlo << ':' << static_cast<int>(cfg.proposal);
  for (const auto& a : anchors) {
    char buf[80];
    std::snprintf(buf, sizeof buf, ":%a,%a,%a", a[0], a[1], a[2]);
    os << buf;
  }
  return os.str();
}

}  // namespace

GraphSum graph_sum(int n_white, int n_black, GraphClass cls, const std::vector<Point>& anchors,
                   const PairPotential& p, const McConfig& cfg,
                   const EnumerationOptions& enum_opts, EstimateCache* cache) {
  const auto graphs = enumerate(n_white, n_black, cls, enum_opts);
  GraphSum out;
  out.graph_count = graphs.size();
  if (graphs.empty()) {
    out.exact_total = Rational(0);
    return out;
  }
  const auto classes = iso_classes(graphs);
  out.class_count = classes.size();
  Rational exact_sum(0);
  bool all_rational = true;
  for (const auto& cls_rep : classes) {
    const ColoredGraph rep(n_white, n_black, cls_rep.canonical);
    McConfig local = cfg;
    local.seed = class_seed(cfg.seed, n_white, n_black, cls_rep.canonical);
    MayerEstimate e;
    const std::string key = cache ? cache_key(n_white, n_black, cls_rep.canonical, anchors, cfg) : "";
    if (const MayerEstimate* hit = cache ? cache->find(key) : nullptr) {
      e = *hit;
    } else {
      e = zeta_bullet(rep, anchors, p, local);
      if (cache) cache->store(key, e);
    }
    const double mult = static_cast<double>(cls_rep.multiplicity);
    out.total += Uncertain(mult) *
                 Uncertain::measured(e.value, e.std_error,
                                     graph_source_id(n_white, n_black, cls_rep.canonical, anchors));
    out.n_samples += e.n_samples;
    out.exact = out.exact && e.exact;
    out.flagged = out.flagged || e.flagged;
    if (e.method == Method::MonteCarlo ||
        (e.method == Method::Quadrature && out.method == Method::Analytic))
      out.method = e.method;
    if (e.exact_value)
      exact_sum += Rational(static_cast<long long>(cls_rep.multiplicity)) * *e.exact_value;
    else
      all_rational = false;
  }
  if (all_rational) out.exact_total = exact_sum;
  return out;
}

MayerEstimate to_estimate(const GraphSum& s, const Rational& exact_scale) {
  const double scale = static_cast<double>(exact_scale);
  MayerEstimate e;
  e.value = scale * s.total.value();
  e.std_error = std::fabs(scale) * s.total.std_error();
  e.n_samples = s.n_samples;
  e.method = s.method;
  e.exact = s.exact;
  e.flagged = s.flagged;
  if (s.exact_total) e.exact_value = *s.exact_total * exact_scale;
  return e;
}

namespace {

void check_orders(int n, int k) {
  if (n < 1) throw DomainError("need at least one white vertex");
  if (k < 0) throw DomainError("order k must be >= 0");
}

}  // namespace

MayerEstimate h_coefficient(int n, int k, const std::vector<Point>& anchors,
                            const PairPotential& p, const McConfig& cfg,
                            const EnumerationOptions& enum_opts) {
  check_orders(n, k);
  if (n < 2) throw DomainError("h coefficients need n >= 2");
  const auto s = graph_sum(n, k, GraphClass::ArticulationFree, anchors, p, cfg, enum_opts);
  return to_estimate(s, 1 / (rational_factorial(n) * rational_factorial(k)));
}

Uncertain h_coefficient_u(int n, int k, const std::vector<Point>& anchors,
                          const PairPotential& p, const McConfig& cfg, Normalization norm,
                          const EnumerationOptions& enum_opts, EstimateCache* cache) {
  check_orders(n, k);
  if (n < 2) throw DomainError("h coefficients need n >= 2");
  const auto s = graph_sum(n, k, GraphClass::ArticulationFree, anchors, p, cfg, enum_opts, cache);
  return Uncertain(h_reconciliation_factor(n, norm) / (factorial(n) * factorial(k))) * s.total;
}

MayerEstimate c2_coefficient(int k, const std::vector<Point>& anchors, const PairPotential& p,
                             const McConfig& cfg, const EnumerationOptions& enum_opts) {
  check_orders(2, k);
  const auto s = graph_sum(2, k, GraphClass::TwoConnected, anchors, p, cfg, enum_opts);
  return to_estimate(s, 1 / rational_factorial(k));
}

Uncertain c2_coefficient_u(int k, const std::vector<Point>& anchors, const PairPotential& p,
                           const McConfig& cfg, const EnumerationOptions& enum_opts,
                           EstimateCache* cache) {
  check_orders(2, k);
  const auto s = graph_sum(2, k, GraphClass::TwoConnected, anchors, p, cfg, enum_opts, cache);
  return Uncertain(1.0 / factorial(k)) * s.total;
}

namespace {

std::vector<Point> origin() { return {Point{0, 0, 0}}; }

}  // namespace

MayerEstimate virial_beta(int m, const PairPotential& p, const McConfig& cfg,
                          const EnumerationOptions& enum_opts) {
  if (m < 1) throw DomainError("virial coefficients start at m = 1");
  const auto s = graph_sum(1, m, GraphClass::TwoConnected, origin(), p, cfg, enum_opts);
  return to_estimate(s, 1 / rational_factorial(m));
}

Uncertain virial_beta_u(int m, const PairPotential& p, const McConfig& cfg,
                        const EnumerationOptions& enum_opts) {
  if (m < 1) throw DomainError("virial coefficients start at m = 1");
  const auto s = graph_sum(1, m, GraphClass::TwoConnected, origin(), p, cfg, enum_opts);
  return Uncertain(1.0 / factorial(m)) * s.total;
}

Rational virial_beta_exact_hard_rod(int m, const EnumerationOptions& enum_opts) {
  if (m < 1) throw DomainError("virial coefficients start at m = 1");
  Rational sum(0);
  for (const auto& c : iso_classes(enumerate(1, m, GraphClass::TwoConnected, enum_opts)))
    sum += Rational(static_cast<long long>(c.multiplicity)) *
           zeta_exact_hard_rod(ColoredGraph(1, m, c.canonical), {Rational(0)});
  return sum / rational_factorial(m);
}

// ------------------------------------------------------------ tables

std::string to_string(TableTarget t) {
  switch (t) {
    case TableTarget::H: return "h";
    case TableTarget::C2: return "c2";
    case TableTarget::Virial: return "virial";
  }
  return "?";
}

TableTarget table_target_from_string(const std::string& name) {
  if (name == "h" || name == "h2") return TableTarget::H;
  if (name == "c2") return TableTarget::C2;
  if (name == "virial") return TableTarget::Virial;
  throw ConfigError("unknown table target '" + name + "'");
}

double CoefficientTable::factor() const {
  return target == TableTarget::H ? h_reconciliation_factor(n, normalization) : 1.0;
}

double CoefficientTable::value(int k, std::size_t anchor) const {
  return factor() * orders.at(static_cast<std::size_t>(k)).at(anchor).value;
}

double CoefficientTable::std_error(int k, std::size_t anchor) const {
  return factor() * orders.at(static_cast<std::size_t>(k)).at(anchor).std_error;
}

namespace {

json estimate_json(const MayerEstimate& e) {
  json j = {{"value", e.value},         {"std_error", e.std_error}, {"n_samples", e.n_samples},
            {"method", to_string(e.method)}, {"exact", e.exact}};
  if (e.flagged) j["flagged"] = true;
  if (e.exact_value) j["exact_value"] = e.exact_value->str();
  return j;
}

MayerEstimate estimate_from_json(const json& j) {
  MayerEstimate e;
  e.value = j.at("value").get<double>();
  e.std_error = j.at("std_error").get<double>();
  e.n_samples = j.at("n_samples").get<std::uint64_t>();
  e.method = method_from_string(j.at("method").get<std::string>());
  e.exact = j.at("exact").get<bool>();
  e.flagged = j.value("flagged", false);
  if (j.contains("exact_value")) e.exact_value = Rational(j.at("exact_value").get<std::string>());
  return e;
}

}  // namespace

std::string CoefficientTable::to_json() const {
  json j;
  j["target"] = to_string(target);
  j["n"] = n;
  j["normalization"] = to_string(normalization);
  j["reconciliation_factor"] = factor();
  j["max_order"] = max_order();
  j["anchors"] = json::array();
  for (const auto& set : anchors) {
    json pts = json::array();
    for (const auto& pt : set) pts.push_back({pt[0], pt[1], pt[2]});
    j["anchors"].push_back(pts);
  }
  j["orders"] = json::array();
  for (std::size_t k = 0; k < orders.size(); ++k) {
    json entries = json::array();
    for (const auto& e : orders[k]) entries.push_back(estimate_json(e));
    j["orders"].push_back({{"k", k}, {"graph_count", graph_counts.at(k)}, {"entries", entries}});
  }
  j["provenance"] = provenance;
  return j.dump(2);
}

CoefficientTable CoefficientTable::from_json(const std::string& text) {
  CoefficientTable t;
  try {
    const json j = json::parse(text);
    t.target = table_target_from_string(j.at("target").get<std::string>());
    t.n = j.at("n").get<int>();
    t.normalization = normalization_from_string(j.at("normalization").get<std::string>());
    for (const auto& set : j.at("anchors")) {
      std::vector<Point> pts;
      for (const auto& pt : set) pts.push_back(Point{pt[0].get<double>(), pt[1].get<double>(), pt[2].get<double>()});
      t.anchors.push_back(pts);
    }
    for (const auto& order : j.at("orders")) {
      std::vector<MayerEstimate> row;
      for (const auto& e : order.at("entries")) row.push_back(estimate_from_json(e));
      t.orders.push_back(row);
      t.graph_counts.push_back(order.at("graph_count").get<std::size_t>());
    }
    if (j.contains("provenance")) t.provenance = j.at("provenance").get<std::map<std::string, std::string>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed coefficient table: ") + e.what());
  }
  return t;
}

std::string CoefficientTable::to_csv() const {
  std::string out = "k,r,value,std_error\n";
  char buf[160];
  for (std::size_t k = 0; k < orders.size(); ++k)
    for (std::size_t a = 0; a < orders[k].size(); ++a) {
      double r = 0.0;
      if (anchors[a].size() >= 2) {
        double s = 0.0;
        for (int c = 0; c < 3; ++c) s += std::pow(anchors[a][1][c] - anchors[a][0][c], 2);
        r = std::sqrt(s);
      }
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", k, r,
                    value(static_cast<int>(k), a), std_error(static_cast<int>(k), a));
      out += buf;
    }
  return out;
}

namespace {

std::map<std::string, std::string> base_provenance(const PairPotential& p, const McConfig& cfg) {
  auto prov = potential_keys(p);
  std::map<std::string, std::string> out;
  for (auto& [k, v] : prov) out["potential." + k] = v;
  out["seed"] = std::to_string(cfg.seed);
  out["n_samples"] = std::to_string(cfg.n_samples);
  out["proposal"] = to_string(cfg.proposal);
  out["strata"] = std::to_string(cfg.strata);
  out["stratify_by_vertex"] = cfg.stratify_by_vertex ? "true" : "false";
  out["force_monte_carlo"] = cfg.force_monte_carlo ? "true" : "false";
  return out;
}

template <class Eval>
CoefficientTable build_pair_table(TableTarget target, int K, const std::vector<double>& radii,
                                  const PairPotential& p, const McConfig& cfg, Eval&& eval) {
  if (K < 0) throw DomainError("table order must be >= 0");
  if (radii.empty()) throw DomainError("need at least one anchor separation");
  CoefficientTable t;
  t.target = target;
  t.n = 2;
  for (double r : radii) t.anchors.push_back(pair_anchors(r));
  for (int k = 0; k <= K; ++k) {
    std::vector<MayerEstimate> row;
    std::size_t count = 0;
    for (const auto& a : t.anchors) {
      GraphSum s;
      row.push_back(eval(k, a, s));
      count = s.graph_count;
    }
    t.orders.push_back(row);
    t.graph_counts.push_back(count);
  }
  t.provenance = base_provenance(p, cfg);
  return t;
}

}  // namespace

CoefficientTable build_h_table(int K, const std::vector<double>& radii, const PairPotential& p,
                               const McConfig& cfg, Normalization norm,
                               const EnumerationOptions& enum_opts) {
  auto t = build_pair_table(TableTarget::H, K, radii, p, cfg,
                            [&](int k, const std::vector<Point>& a, GraphSum& s) {
                              s = graph_sum(2, k, GraphClass::ArticulationFree, a, p, cfg, enum_opts);
                              return to_estimate(s, 1 / (2 * rational_factorial(k)));
                            });
  t.normalization = norm;
  return t;
}

CoefficientTable build_c2_table(int K, const std::vector<double>& radii, const PairPotential& p,
                                const McConfig& cfg, const EnumerationOptions& enum_opts) {
  return build_pair_table(TableTarget::C2, K, radii, p, cfg,
                          [&](int k, const std::vector<Point>& a, GraphSum& s) {
                            s = graph_sum(2, k, GraphClass::TwoConnected, a, p, cfg, enum_opts);
                            return to_estimate(s, 1 / rational_factorial(k));
                          });
}

CoefficientTable build_virial_table(int K, const PairPotential& p, const McConfig& cfg,
                                    const EnumerationOptions& enum_opts) {
  if (K < 1) throw DomainError("virial tables start at m = 1");
  CoefficientTable t;
  t.target = TableTarget::Virial;
  t.n = 1;
  t.anchors.push_back(origin());
  // Order 0 is a placeholder so that orders[m] holds beta_m.
  t.orders.push_back({MayerEstimate{}});
  t.orders.back().front().exact = true;
  t.graph_counts.push_back(0);
  for (int m = 1; m <= K; ++m) {
    t.orders.push_back({virial_beta(m, p, cfg, enum_opts)});
    t.graph_counts.push_back(count(1, m, GraphClass::TwoConnected, enum_opts));
  }
  t.provenance = base_provenance(p, cfg);
  return t;
}

std::vector<double> default_anchor_radii(double sigma, double step_fraction, double r_max_factor) {
  std::vector<double> out;
  const int steps = static_cast<int>(std::lround(r_max_factor / step_fraction));
  for (int i = 0; i <= steps; ++i) out.push_back(sigma * step_fraction * i);
  return out;
}

SeriesValue fit_tail(const std::vector<double>& contributions) {
  SeriesValue out;
  if (contributions.empty()) throw DomainError("empty coefficient table");
  const int K = static_cast<int>(contributions.size()) - 1;
  for (double c : contributions) out.value += c;
  if (K == 0) {
    out.note = "too few orders for a tail fit";
    return out;
  }
  const int m = std::min(4, K);
  std::vector<double> ks, logs;
  bool all_zero = true;
  for (int k = K - m + 1; k <= K; ++k) {
    const double c = std::fabs(contributions[static_cast<std::size_t>(k)]);
    if (c > 0) {
      all_zero = false;
      ks.push_back(k);
      logs.push_back(std::log(c));
    }
  }
  if (all_zero) {
    out.tail_reliable = true;
    out.note = "trailing orders vanish";
    return out;
  }
  if (ks.size() < 2) {
    out.note = "fewer than two nonzero trailing orders";
    return out;
  }
  double mk = 0, ml = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    mk += ks[i];
    ml += logs[i];
  }
  mk /= static_cast<double>(ks.size());
  ml /= static_cast<double>(ks.size());
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    sxx += (ks[i] - mk) * (ks[i] - mk);
    sxy += (ks[i] - mk) * (logs[i] - ml);
  }
  const double slope = sxy / sxx;
  const double decay = -slope;
  const double log_c = ml - slope * mk;
  if (!(decay > 0)) {
    out.note = "fitted decay rate is not positive";
    return out;
  }
  out.tail_estimate = std::exp(log_c - decay * (K + 1)) / -std::expm1(-decay);
  out.tail_reliable = true;
  return out;
}

SeriesValue series_eval(const CoefficientTable& table, double rho, int K, std::size_t anchor) {
  if (table.orders.empty()) throw DomainError("empty coefficient table");
  if (!(rho > 0)) throw DomainError("series evaluation needs rho > 0");
  if (K < 0 || K > table.max_order())
    throw DomainError("table is populated only through order " + std::to_string(table.max_order()));
  if (anchor >= table.anchors.size()) throw DomainError("anchor index out of range");
  std::vector<double> contributions;
  double var = 0.0;
  for (int k = 0; k <= K; ++k) {
    const double w = std::pow(rho, k);
    contributions.push_back(w * table.value(k, anchor));
    var += std::pow(w * table.std_error(k, anchor), 2);
  }
  SeriesValue out = fit_tail(contributions);
  out.std_error = std::sqrt(var);
  return out;
}

// ------------------------------------------------------------ identities

FormalSeries<Uncertain> activity_series(int K, const PairPotential& p, const McConfig& cfg,
                                        const EnumerationOptions& enum_opts) {
  if (K < 1) throw DomainError("activity series needs K >= 1");
  FormalSeries<Uncertain> s(static_cast<std::size_t>(K - 1), "z");
  s[0] = Uncertain(1.0);
  for (int k = 1; k < K; ++k) {
    const auto sum = graph_sum(1, k, GraphClass::Connected, origin(), p, cfg, enum_opts);
    s[static_cast<std::size_t>(k)] = Uncertain(1.0 / factorial(k)) * sum.total;
  }
  return s;
}

FormalSeries<Rational> activity_series_exact_hard_rod(int K, const EnumerationOptions& enum_opts) {
  if (K < 1) throw DomainError("activity series needs K >= 1");
  FormalSeries<Rational> s(static_cast<std::size_t>(K - 1), "z");
  s[0] = Rational(1);
  for (int k = 1; k < K; ++k) {
    Rational sum(0);
    for (const auto& c : iso_classes(enumerate(1, k, GraphClass::Connected, enum_opts)))
      sum += Rational(static_cast<long long>(c.multiplicity)) *
             zeta_exact_hard_rod(ColoredGraph(1, k, c.canonical), {Rational(0)});
    s[static_cast<std::size_t>(k)] = sum / rational_factorial(k);
  }
  return s;
}

namespace {

// rho(z) = z * (rho/z), same order as rho/z plus one, truncated to K.
template <class T>
FormalSeries<T> shift_up(const FormalSeries<T>& s, std::size_t K) {
  FormalSeries<T> out(K, s.var());
  for (std::size_t i = 1; i <= K && i - 1 <= s.order(); ++i) out[i] = s[i - 1];
  return out;
}

}  // namespace

std::vector<IdentityResidual> dissymmetry_check(int K, const PairPotential& p,
                                                const McConfig& cfg, bool exact,
                                                const EnumerationOptions& enum_opts) {
  if (K < 0) throw DomainError("order must be >= 0");
  const auto k = static_cast<std::size_t>(K);
  std::vector<IdentityResidual> out;
  if (exact) {
    if (p.kind() != PotentialKind::HardRod)
      throw DomainError("exact dissymmetry check is available for hard rods only");
    const auto a = activity_series_exact_hard_rod(K + 1, enum_opts);
    const auto L = a.log();
    FormalSeries<Rational> beta(k, "rho");
    for (int m = 1; m <= K; ++m) beta[static_cast<std::size_t>(m)] = virial_beta_exact_hard_rod(m, enum_opts);
    const auto R = beta.compose(shift_up(a, k));
    for (std::size_t i = 0; i <= k; ++i) {
      IdentityResidual r;
      r.order = static_cast<int>(i);
      const Rational d = L[i] - R[i];
      // sigma^i scaling of an exact zero is still zero.
      r.exact_residual = d;
      r.residual = static_cast<double>(d) * std::pow(p.sigma(), static_cast<double>(i));
      r.pass = d == 0;
      out.push_back(r);
    }
    return out;
  }
  const auto a = activity_series(K + 1, p, cfg, enum_opts);
  const auto L = a.log();
  FormalSeries<Uncertain> beta(k, "rho");
  for (int m = 1; m <= K; ++m) beta[static_cast<std::size_t>(m)] = virial_beta_u(m, p, cfg, enum_opts);
  const auto R = beta.compose(shift_up(a, k));
  for (std::size_t i = 0; i <= k; ++i) {
    IdentityResidual r;
    r.order = static_cast<int>(i);
    const Uncertain d = L[i] - R[i];
    r.residual = d.value();
    r.std_error = d.std_error();
    const double scale = std::max(1.0, std::fabs(L[i].value()));
    r.pass = std::fabs(r.residual) <= 4.0 * r.std_error + 1e-12 * scale;
    out.push_back(r);
  }
  return out;
}

}  // namespace clusterkit
