#include "clusterkit/integrals.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>


#include "clusterkit/errors.hpp"
#include "clusterkit/parallel.hpp"
#include "quadrature.hpp"

namespace clusterkit {

std::string to_string(Method m) {
  switch (m) {
    case Method::Analytic: return "analytic";
    case Method::Quadrature: return "quadrature";
    case Method::MonteCarlo: return "monte_carlo";
  }
  return "?";
}

Method method_from_string(const std::string& name) {
  if (name == "analytic") return Method::Analytic;
  if (name == "quadrature") return Method::Quadrature;
  if (name == "monte_carlo" || name == "mc") return Method::MonteCarlo;
  throw ConfigError("unknown method '" + name + "'");
}

std::string to_string(Proposal p) { return p == Proposal::CoreBall ? "core_ball" : "gaussian"; }

Proposal proposal_from_string(const std::string& name) {
  if (name == "core_ball" || name == "coreball" || name == "ball") return Proposal::CoreBall;
  if (name == "gaussian") return Proposal::Gaussian;
  throw ConfigError("unknown proposal '" + name + "'");
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<Point> pair_anchors(double r) { return {Point{0, 0, 0}, Point{r, 0, 0}}; }

Rational exact_rational(double x) {
  if (!std::isfinite(x)) throw DomainError("cannot convert a non-finite value to a rational");
  if (x == 0.0) return Rational(0);
  int exp = 0;
  const double mant = std::frexp(x, &exp);  // x = mant * 2^exp, 0.5 <= |mant| < 1
  const auto scaled = static_cast<std::int64_t>(std::ldexp(mant, 53));
  exp -= 53;
  boost::multiprecision::cpp_int num = scaled;
  boost::multiprecision::cpp_int den = 1;
  if (exp > 0)
    num <<= exp;
  else
    den <<= -exp;
  return Rational(num, den);
}

double ball_overlap_volume(int dimension, double R, double r) {
  r = std::fabs(r);
  if (r >= 2 * R) return 0.0;
  if (dimension == 1) return 2 * R - r;
  if (dimension == 3) return std::numbers::pi / 12.0 * (4 * R + r) * (2 * R - r) * (2 * R - r);
  throw DomainError("only dimensions 1 and 3 are supported");
}

double finite_volume_factor(std::uint64_t N, double volume, std::uint64_t n) {
  if (!(volume > 0)) throw DomainError("volume must be positive");
  if (n > N) return 0.0;
  double out = 1.0;
  for (std::uint64_t i = 0; i < n; ++i) out *= static_cast<double>(N - i) / volume;
  return out;
}

namespace {

double distance(const Point& a, const Point& b, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

void check_inputs(const ColoredGraph& g, const std::vector<Point>& anchors) {
  if (static_cast<int>(anchors.size()) != g.n_white())
    throw DomainError("need one anchor per white vertex");
  for (const auto& a : anchors)
    for (double c : a)
      if (!std::isfinite(c)) throw DomainError("non-finite anchor coordinate");
  if (!is_connected(g)) throw DomainError("graph integrals need a connected graph");
}

double envelope(const ColoredGraph& g, const PairPotential& p) {
  return std::pow(c_beta(p), g.n_black()) * std::pow(p.f_sup(), g.edge_count() - g.n_black());
}

// ---------------------------------------------------------------- exact 1D

// Open Newton-Cotes weights on [0, 1] with nodes (i+1)/(D+2), i = 0..D,
// exact for polynomials of degree D.
const std::vector<Rational>& open_weights(int degree) {
  static std::mutex m;
  static std::map<int, std::vector<Rational>> cache;
  std::lock_guard lock(m);
  auto it = cache.find(degree);
  if (it != cache.end()) return it->second;
  const int npts = degree + 1;
  std::vector<Rational> nodes(npts);
  for (int i = 0; i < npts; ++i) nodes[i] = Rational(i + 1, degree + 2);
  std::vector<Rational> w(npts);
  for (int i = 0; i < npts; ++i) {
    // Lagrange basis polynomial coefficients.
    std::vector<Rational> poly{Rational(1)};
    Rational denom(1);
    for (int j = 0; j < npts; ++j) {
      if (j == i) continue;
      std::vector<Rational> next(poly.size() + 1, Rational(0));
      for (std::size_t a = 0; a < poly.size(); ++a) {
        next[a + 1] += poly[a];
        next[a] -= poly[a] * nodes[j];
      }
      poly = std::move(next);
      denom *= nodes[i] - nodes[j];
    }
    Rational integral(0);
    for (std::size_t a = 0; a < poly.size(); ++a) integral += poly[a] / Rational(a + 1);
    w[i] = integral / denom;
  }
  return cache.emplace(degree, std::move(w)).first->second;
}

class HardRodEngine {
 public:
  HardRodEngine(const ColoredGraph& g, const std::vector<Rational>& anchors)
      : n_(g.n_white()), k_(g.n_black()), pos_(g.n_vertices()) {
    for (int v = 0; v < g.n_vertices(); ++v) nbr_[v] = g.neighbors(v);
    for (int i = 0; i < n_; ++i) pos_[i] = anchors[i];
  }

  Rational run() {
    // Bonds among the whites.
    int sign = 1;
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j)
        if ((nbr_[i] >> j) & 1U) {
          if (abs(pos_[i] - pos_[j]) >= 1) return Rational(0);
          sign = -sign;
        }
    if (k_ == 0) return Rational(sign);
    return Rational(sign) * integrate(0);
  }

 private:
  // Product of bonds between vertex v (just placed) and earlier vertices.
  int bonds_to_fixed(int v) const {
    int sign = 1;
    for (VertexMask nb = nbr_[v] & ((VertexMask{1} << v) - 1); nb; nb &= nb - 1) {
      const int u = std::countr_zero(nb);
      if (abs(pos_[v] - pos_[u]) >= 1) return 0;
      sign = -sign;
    }
    return sign;
  }

  Rational integrate(int j) {
    const int v = n_ + j;
    const int remaining = k_ - j;
    std::vector<Rational> cuts;
    cuts.reserve(static_cast<std::size_t>(v * (2 * remaining + 1)));
    for (int u = 0; u < v; ++u)
      for (int m = -remaining; m <= remaining; ++m) cuts.push_back(pos_[u] + m);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    const int degree = remaining - 1;
    const auto& w = open_weights(degree);
    Rational total(0);
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      const Rational a = cuts[c];
      const Rational len = cuts[c + 1] - a;
      // Bonds to fixed vertices are constant on the piece.
      pos_[v] = a + len / 2;
      const int s = bonds_to_fixed(v);
      if (s == 0) continue;
      Rational piece(0);
      for (int i = 0; i <= degree; ++i) {
        pos_[v] = a + len * Rational(i + 1, degree + 2);
        piece += w[i] * (j + 1 == k_ ? Rational(1) : integrate(j + 1));
      }
      total += Rational(s) * piece * len;
    }
    return total;
  }

  int n_, k_;
  std::vector<Rational> pos_;
  VertexMask nbr_[kMaxGraphVertices] = {};
};

// ---------------------------------------------------------------- quadrature

template <class F>
double piecewise(F&& fn, std::vector<double> cuts, double tol, double* err) {
  double e = 0.0;
  const double v = detail::integrate_pieces(fn, std::move(cuts), tol, 1e-15, &e);
  if (err) *err += e;
  return v;
}

// Signed integral of f over R^d.
double bond_integral(const PairPotential& p, double* err) {
  std::vector<double> cuts{0.0};
  for (double b : p.breakpoints()) cuts.push_back(b);
  return piecewise([&](double s) { return mayer_f(p, s) * shell_measure(p.dimension(), s); },
                   cuts, 1e-13, err);
}

}  // namespace

double bond_pair_integral(const PairPotential& p, double r, double rel_tol, double* error) {
  r = std::fabs(r);
  const double rc = p.range();
  const auto bps = p.breakpoints();
  double err = 0.0;
  double value = 0.0;
  if (p.dimension() == 1) {
    std::vector<double> cuts{-rc, rc, r - rc, r + rc};
    for (double b : bps)
      for (double c : {-b, b, r - b, r + b}) cuts.push_back(c);
    const double lo = std::max(-rc, r - rc);
    const double hi = std::min(rc, r + rc);
    if (lo >= hi) return 0.0;
    std::vector<double> kept{lo, hi};
    for (double c : cuts)
      if (c > lo && c < hi) kept.push_back(c);
    value = piecewise([&](double x) { return mayer_f(p, x) * mayer_f(p, x - r); }, kept,
                      rel_tol, &err);
  } else if (r == 0.0) {
    std::vector<double> cuts{0.0};
    for (double b : bps) cuts.push_back(b);
    value = piecewise(
        [&](double s) {
          const double f = mayer_f(p, s);
          return 4.0 * std::numbers::pi * s * s * f * f;
        },
        cuts, rel_tol, &err);
  } else {
    // Bipolar coordinates: dx = (2 pi / r) s t ds dt.
    auto inner = [&](double s) {
      const double lo = std::fabs(r - s);
      const double hi = std::min(r + s, rc);
      if (lo >= hi) return 0.0;
      std::vector<double> kept{lo, hi};
      for (double b : bps)
        if (b > lo && b < hi) kept.push_back(b);
      double e = 0.0;
      return piecewise([&](double t) { return t * mayer_f(p, t); }, kept, rel_tol * 0.1, &e);
    };
    std::vector<double> cuts{0.0, rc};
    if (r < rc) cuts.push_back(r);
    for (double b : bps)
      for (double c : {b, r - b, b - r, r + b})
        if (c > 0 && c < rc) cuts.push_back(c);
    value = 2.0 * std::numbers::pi / r *
            piecewise([&](double s) { return s * mayer_f(p, s) * inner(s); }, cuts, rel_tol, &err);
    err *= 2.0 * std::numbers::pi / r;
  }
  if (error) *error = err;
  return value;
}

Rational zeta_exact_hard_rod(const ColoredGraph& g, const std::vector<Rational>& anchors) {
  if (static_cast<int>(anchors.size()) != g.n_white())
    throw DomainError("need one anchor per white vertex");
  if (!is_connected(g)) throw DomainError("graph integrals need a connected graph");
  return HardRodEngine(g, anchors).run();
}

namespace {

// ---------------------------------------------------------------- Monte Carlo

struct Moments {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  std::uint64_t nonzero = 0;

  void add(double x) {
    ++n;
    if (x != 0.0) ++nonzero;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
  }
  void merge(const Moments& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double total = static_cast<double>(n + o.n);
    const double delta = o.mean - mean;
    mean += delta * static_cast<double>(o.n) / total;
    m2 += o.m2 + delta * delta * static_cast<double>(n) * static_cast<double>(o.n) / total;
    n += o.n;
    nonzero += o.nonzero;
  }
};

double unit_double(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

double std_normal(std::mt19937_64& gen) {
  const double u1 = 1.0 - unit_double(gen);
  const double u2 = unit_double(gen);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

struct TreePlan {
  std::vector<int> order;   // black vertices in breadth-first order
  std::vector<int> parent;  // parent vertex of order[i]
};

TreePlan tree_plan(const ColoredGraph& g) {
  TreePlan plan;
  VertexMask seen = g.white_mask();
  std::vector<int> queue;
  for (int w = 0; w < g.n_white(); ++w) queue.push_back(w);
  for (std::size_t h = 0; h < queue.size(); ++h) {
    const int u = queue[h];
    for (VertexMask nb = g.neighbors(u) & ~seen; nb; nb &= nb - 1) {
      const int v = std::countr_zero(nb);
      seen |= VertexMask{1} << v;
      queue.push_back(v);
      plan.order.push_back(v);
      plan.parent.push_back(u);
    }
  }
  return plan;
}

class Sampler {
 public:
  Sampler(const ColoredGraph& g, const std::vector<Point>& anchors, const PairPotential& p,
          const McConfig& cfg)
      : g_(g), p_(p), cfg_(cfg), d_(p.dimension()), plan_(tree_plan(g)), edges_(g.edges()) {
    for (int i = 0; i < g.n_white(); ++i) base_[i] = anchors[i];
    radius_ = p.range();
    if (cfg.proposal == Proposal::CoreBall) {
      log_q_ = -std::log(ball_volume(d_, radius_));
    } else {
      scale_ = 0.6 * radius_;
    }
  }

  Moments run_stratum(std::uint64_t seed, std::uint64_t count) const {
    Moments m;
    std::vector<std::mt19937_64> streams;
    if (cfg_.stratify_by_vertex) {
      for (std::size_t j = 0; j < plan_.order.size(); ++j)
        streams.emplace_back(derive_seed(seed, j + 1));
    } else {
      streams.emplace_back(seed);
    }
    Point pos[kMaxGraphVertices];
    for (int i = 0; i < g_.n_white(); ++i) pos[i] = base_[i];
    for (std::uint64_t s = 0; s < count; ++s) {
      double log_q = 0.0;
      for (std::size_t j = 0; j < plan_.order.size(); ++j) {
        auto& gen = streams[cfg_.stratify_by_vertex ? j : 0];
        Point disp{0, 0, 0};
        log_q += draw(gen, disp);
        const Point& from = pos[plan_.parent[j]];
        Point& to = pos[plan_.order[j]];
        for (int c = 0; c < 3; ++c) to[c] = from[c] + disp[c];
      }
      double w = 1.0;
      for (auto [a, b] : edges_) {
        w *= mayer_f(p_, distance(pos[a], pos[b], d_));
        if (w == 0.0) break;
      }
      m.add(w == 0.0 ? 0.0 : w * std::exp(-log_q));
    }
    return m;
  }

 private:
  // Fills disp and returns log of the proposal density at disp.
  double draw(std::mt19937_64& gen, Point& disp) const {
    if (cfg_.proposal == Proposal::CoreBall) {
      for (;;) {
        double r2 = 0.0;
        for (int c = 0; c < d_; ++c) {
          disp[c] = radius_ * (2.0 * unit_double(gen) - 1.0);
          r2 += disp[c] * disp[c];
        }
        if (r2 < radius_ * radius_) return log_q_;
      }
    }
    double lq = 0.0;
    for (int c = 0; c < d_; ++c) {
      const double z = std_normal(gen);
      disp[c] = scale_ * z;
      lq += -0.5 * z * z - std::log(scale_ * std::sqrt(2.0 * std::numbers::pi));
    }
    return lq;
  }

  const ColoredGraph& g_;
  const PairPotential& p_;
  const McConfig& cfg_;
  int d_;
  TreePlan plan_;
  std::vector<std::pair<int, int>> edges_;
  Point base_[kMaxGraphVertices] = {};
  double radius_ = 1.0;
  double log_q_ = 0.0;
  double scale_ = 1.0;
};

template <class Stratum>
Moments run_strata(const McConfig& cfg, Stratum&& stratum) {
  if (cfg.n_samples < 1) throw DomainError("Monte Carlo needs n_samples >= 1");
  if (cfg.strata < 1) throw DomainError("Monte Carlo needs at least one stratum");
  const std::uint64_t strata =
      std::min<std::uint64_t>(static_cast<std::uint64_t>(cfg.strata), cfg.n_samples);
  std::vector<Moments> parts(strata);
  parallel_for(strata, cfg.threads, [&](std::size_t s) {
    const std::uint64_t count = cfg.n_samples / strata + (s < cfg.n_samples % strata ? 1 : 0);
    parts[s] = stratum(derive_seed(cfg.seed, s), count);
  });
  Moments total;
  for (const auto& part : parts) total.merge(part);
  return total;
}

MayerEstimate from_moments(const Moments& m, double scale) {
  MayerEstimate e;
  e.method = Method::MonteCarlo;
  e.n_samples = m.n;
  e.value = scale * m.mean;
  if (m.n > 1)
    e.std_error = std::fabs(scale) *
                  std::sqrt(m.m2 / static_cast<double>(m.n - 1) / static_cast<double>(m.n));
  e.flagged = m.nonzero < 2;
  return e;
}

double white_bond_product(const ColoredGraph& g, const std::vector<Point>& anchors,
                          const PairPotential& p) {
  double w = 1.0;
  for (int i = 0; i < g.n_white(); ++i)
    for (int j = i + 1; j < g.n_white(); ++j)
      if (g.has_edge(i, j)) w *= mayer_f(p, distance(anchors[i], anchors[j], p.dimension()));
  return w;
}

}  // namespace

MayerEstimate zeta_bullet_mc(const ColoredGraph& g, const std::vector<Point>& anchors,
                             const PairPotential& p, const McConfig& cfg) {
  check_inputs(g, anchors);
  const Sampler sampler(g, anchors, p, cfg);
  const Moments m = run_strata(
      cfg, [&](std::uint64_t seed, std::uint64_t count) { return sampler.run_stratum(seed, count); });
  MayerEstimate e = from_moments(m, 1.0);
  e.envelope = envelope(g, p);
  return e;
}

MayerEstimate zeta_bullet(const ColoredGraph& g, const std::vector<Point>& anchors,
                          const PairPotential& p, const McConfig& cfg) {
  check_inputs(g, anchors);
  const int k = g.n_black();
  MayerEstimate e;
  e.envelope = envelope(g, p);
  if (k == 0) {
    e.value = white_bond_product(g, anchors, p);
    e.exact = true;
    if (p.kind() == PotentialKind::HardRod) e.exact_value = Rational(static_cast<int>(e.value));
    return e;
  }
  if (cfg.force_monte_carlo) return zeta_bullet_mc(g, anchors, p, cfg);

  if (p.kind() == PotentialKind::HardRod && k <= cfg.max_exact_black) {
    std::vector<Rational> a;
    for (const auto& pt : anchors) a.push_back(exact_rational(pt[0] / p.sigma()));
    const Rational r = zeta_exact_hard_rod(g, a);
    e.value = static_cast<double>(r) * std::pow(p.sigma(), k);
    e.exact = true;
    e.exact_value = r;
    return e;
  }

  if (k == 1) {
    const int black = g.n_white();
    const VertexMask nb = g.neighbors(black);
    if (std::popcount(nb) <= 2) {
      const double ww = white_bond_product(g, anchors, p);
      const int a = std::countr_zero(nb);
      const bool pair = std::popcount(nb) == 2;
      const double r =
          pair ? distance(anchors[a], anchors[std::countr_zero(nb & (nb - 1))], p.dimension())
               : 0.0;
      if (p.kind() == PotentialKind::HardSphere || p.kind() == PotentialKind::HardRod) {
        const double v = pair ? ball_overlap_volume(p.dimension(), p.sigma(), r)
                              : -ball_volume(p.dimension(), p.sigma());
        e.value = ww * v;
        e.exact = true;
        return e;
      }
      double err = 0.0;
      const double v = pair ? bond_pair_integral(p, r, 1e-11, &err) : bond_integral(p, &err);
      e.value = ww * v;
      e.std_error = std::fabs(ww) * err;
      e.method = Method::Quadrature;
      return e;
    }
  }
  return zeta_bullet_mc(g, anchors, p, cfg);
}

MayerEstimate zeta_bullet_torus(const ColoredGraph& g, const std::vector<Point>& anchors,
                                const PairPotential& p, double box_length, const McConfig& cfg) {
  check_inputs(g, anchors);
  if (!(box_length > 0)) throw DomainError("box length must be positive");
  const int d = p.dimension();
  const auto edges = g.edges();
  auto min_image = [&](const Point& a, const Point& b) {
    double s = 0.0;
    for (int c = 0; c < d; ++c) {
      double x = a[c] - b[c];
      x -= box_length * std::round(x / box_length);
      s += x * x;
    }
    return std::sqrt(s);
  };
  const Moments m = run_strata(cfg, [&](std::uint64_t seed, std::uint64_t count) {
    std::mt19937_64 gen(seed);
    Moments mom;
    Point pos[kMaxGraphVertices] = {};
    for (int i = 0; i < g.n_white(); ++i) pos[i] = anchors[i];
    for (std::uint64_t s = 0; s < count; ++s) {
      for (int v = g.n_white(); v < g.n_vertices(); ++v)
        for (int c = 0; c < d; ++c) pos[v][c] = box_length * unit_double(gen);
      double w = 1.0;
      for (auto [a, b] : edges) {
        w *= mayer_f(p, min_image(pos[a], pos[b]));
        if (w == 0.0) break;
      }
      mom.add(w);
    }
    return mom;
  });
  MayerEstimate e = from_moments(m, std::pow(box_length, d * g.n_black()));
  e.envelope = envelope(g, p);
  return e;
}

}  // namespace clusterkit
