#include "clusterkit/closures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "clusterkit/errors.hpp"
#include "clusterkit/parallel.hpp"

namespace clusterkit {

using nlohmann::json;

namespace {

void check_inputs(const PairPotential& p, double rho, const GridSpec& grid, const PyOptions& o) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw DomainError("density must be finite and >= 0");
  if (!(grid.dr > 0.0)) throw DomainError("grid spacing must be positive");
  if (grid.n_points < 16) throw DomainError("grid needs at least 16 points");
  if (p.dimension() != 1 && p.dimension() != 3)
    throw DomainError("closures support d = 1 and d = 3");
  if (!(o.mixing > 0.0 && o.mixing <= 1.0)) throw DomainError("mixing must lie in (0, 1]");
  if (!(o.tol > 0.0)) throw DomainError("tolerance must be positive");
  if (o.max_iter < 1) throw DomainError("max_iter must be >= 1");
}

struct Inputs {
  RadialFunction f;
  RadialFunction e;
  RadialFunction d;
};

Inputs sample_inputs(const PairPotential& p, const GridSpec& grid, const PyOptions& o) {
  const auto jumps = p.breakpoints();
  auto f = RadialFunction::sample(grid.dr, grid.n_points, p.dimension(),
                                  [&](double r) { return mayer_f(p, r); }, jumps);
  auto e = RadialFunction::sample(grid.dr, grid.n_points, p.dimension(),
                                  [&](double r) { return 1.0 + mayer_f(p, r); }, jumps);
  auto d = RadialFunction::sample(grid.dr, grid.n_points, p.dimension(),
                                  [&](double r) { return o.d_term ? o.d_term(r) : 0.0; }, jumps);
  return {std::move(f), std::move(e), std::move(d)};
}

/// rho * (a * b) through a shared transform; also returns min |1 - rho a_hat|.
std::vector<double> convolve(const RadialTransform& tr, const std::vector<double>& a,
                             const std::vector<double>& b, double rho, double* min_den) {
  auto fa = tr.forward(a);
  const auto fb = tr.forward(b);
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < fa.size(); ++i) {
    dmin = std::min(dmin, std::fabs(1.0 - rho * fa[i]));
    fa[i] *= rho * fb[i];
  }
  if (min_den) *min_den = dmin;
  auto out = tr.inverse(fa);
  out.resize(a.size());
  return out;
}

/// Split nodes of a * y + shift, from the splits of a.
std::vector<SplitNode> scaled_splits(const RadialFunction& a, const std::vector<double>& y,
                                     const RadialFunction& shift) {
  std::vector<SplitNode> out;
  for (const auto& s : a.splits())
    out.push_back({s.index, s.left * y[s.index] + shift.left(s.index),
                   s.right * y[s.index] + shift.right(s.index)});
  return out;
}

bool is_record_point(int it) { return (it & (it - 1)) == 0; }

}  // namespace

std::string PyDiagnostics::to_json() const {
  json j;
  j["iterations"] = iterations;
  j["last_change"] = last_change;
  j["residual"] = residual;
  j["t_form_difference"] = t_form_difference;
  j["min_denominator"] = min_denominator;
  j["monotonicity_violations"] = monotonicity_violations;
  json h = json::array();
  for (const auto& [it, ch] : history) h.push_back({{"iteration", it}, {"change", ch}});
  j["history"] = h;
  return j.dump(2);
}

PyResult py_solve(const PairPotential& p, double rho, const GridSpec& grid, const PyOptions& opts) {
  check_inputs(p, rho, grid, opts);
  const Inputs in = sample_inputs(p, grid, opts);
  const std::size_t n = grid.n_points;
  const RadialTransform tr(n, grid.dr, p.dimension());
  std::vector<double> y(n, 1.0);
  std::vector<double> c(n);
  std::vector<double> h(n);
  PyDiagnostics diag;
  double prev_change = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int it = 1; it <= opts.max_iter; ++it) {
    for (std::size_t j = 0; j < n; ++j) {
      c[j] = in.f[j] * y[j] + in.d[j];
      h[j] = in.e[j] * y[j] - 1.0;
    }
    double dmin = 1.0;
    const auto conv = rho == 0.0 ? std::vector<double>(n, 0.0) : convolve(tr, c, h, rho, &dmin);
    diag.min_denominator = it == 1 ? dmin : std::min(diag.min_denominator, dmin);
    if (dmin < opts.min_denominator)
      throw DivergenceError("density too high: 1 - rho c_hat nearly vanishes", dmin);
    double change = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double target = 1.0 + in.d[j] + conv[j];
      if (!std::isfinite(target)) throw DivergenceError("non-finite iterate", target);
      change = std::max(change, std::fabs(target - y[j]));
      y[j] += opts.mixing * (target - y[j]);
    }
    if (change > 1e8) throw DivergenceError("iteration diverged", change);
    if (change > prev_change) ++diag.monotonicity_violations;
    prev_change = change;
    diag.iterations = it;
    diag.last_change = change;
    if (is_record_point(it)) diag.history.emplace_back(it, change);
    if (change < opts.tol) {
      converged = true;
      break;
    }
  }
  if (diag.history.empty() || diag.history.back().first != diag.iterations)
    diag.history.emplace_back(diag.iterations, diag.last_change);
  if (!converged)
    throw ConvergenceError("closure iteration did not converge within max_iter", diag.last_change);

  for (std::size_t j = 0; j < n; ++j) {
    c[j] = in.f[j] * y[j] + in.d[j];
    h[j] = in.e[j] * y[j] - 1.0;
  }
  const auto conv = rho == 0.0 ? std::vector<double>(n, 0.0) : convolve(tr, c, h, rho, nullptr);
  double res = 0.0;
  for (std::size_t j = 0; j < n; ++j) res = std::max(res, std::fabs(y[j] - 1.0 - in.d[j] - conv[j]));
  diag.residual = res;

  const int dim = p.dimension();
  const double dr = grid.dr;
  std::vector<double> t(n), g(n), m(n);
  for (std::size_t j = 0; j < n; ++j) {
    t[j] = y[j] - 1.0 - in.d[j];
    g[j] = in.e[j] * y[j];
    m[j] = in.e[j] * in.d[j];
  }
  const RadialFunction zero(dr, std::vector<double>(n, 0.0), dim);
  const RadialFunction minus_one(dr, std::vector<double>(n, -1.0), dim);
  std::vector<SplitNode> m_splits;
  for (const auto& s : in.e.splits())
    m_splits.push_back({s.index, s.left * in.d.left(s.index), s.right * in.d.right(s.index)});

  ClosureFields fields{
      RadialFunction(dr, t, dim),
      RadialFunction(dr, y, dim),
      in.d,
      RadialFunction(dr, m, dim, m_splits),
      RadialFunction(dr, c, dim, scaled_splits(in.f, y, in.d)),
      RadialFunction(dr, h, dim, scaled_splits(in.e, y, minus_one)),
      RadialFunction(dr, g, dim, scaled_splits(in.e, y, zero)),
      in.f,
      in.e,
      rho};

  if (opts.t_form_check) {
    const RadialFunction tt = py_solve_t_form(p, rho, grid, opts);
    double diff = 0.0;
    for (std::size_t j = 0; j < n; ++j) diff = std::max(diff, std::fabs(tt[j] - t[j]));
    diag.t_form_difference = diff;
  }
  return {std::move(fields), std::move(diag)};
}

RadialFunction py_solve_t_form(const PairPotential& p, double rho, const GridSpec& grid,
                               const PyOptions& opts) {
  check_inputs(p, rho, grid, opts);
  const Inputs in = sample_inputs(p, grid, opts);
  const std::size_t n = grid.n_points;
  const RadialTransform tr(n, grid.dr, p.dimension());
  std::vector<double> t(n, 0.0);
  std::vector<double> c(n);
  std::vector<double> h(n);
  for (int it = 1; it <= opts.max_iter; ++it) {
    for (std::size_t j = 0; j < n; ++j) {
      c[j] = in.f[j] * (1.0 + t[j]) + in.e[j] * in.d[j];
      h[j] = c[j] + t[j];
    }
    double dmin = 1.0;
    const auto conv = rho == 0.0 ? std::vector<double>(n, 0.0) : convolve(tr, c, h, rho, &dmin);
    if (dmin < opts.min_denominator)
      throw DivergenceError("density too high: 1 - rho c_hat nearly vanishes", dmin);
    double change = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(conv[j])) throw DivergenceError("non-finite iterate", conv[j]);
      change = std::max(change, std::fabs(conv[j] - t[j]));
      t[j] += opts.mixing * (conv[j] - t[j]);
    }
    if (change > 1e8) throw DivergenceError("iteration diverged", change);
    if (change < opts.tol) return RadialFunction(grid.dr, std::move(t), p.dimension());
  }
  throw ConvergenceError("t-form iteration did not converge within max_iter", 0.0);
}

std::string fields_csv(const ClosureFields& f, const std::string& manifest_hash) {
  std::ostringstream os;
  if (!manifest_hash.empty()) os << "# manifest: " << manifest_hash << '\n';
  os << "r,g,h,c,t,y\n";
  char buf[160];
  for (std::size_t j = 0; j < f.g.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", f.g.r(j), f.g[j], f.h[j],
                  f.c[j], f.t[j], f.y[j]);
    os << buf;
  }
  return os.str();
}

// ------------------------------------------------------------ error order

namespace {

std::vector<double> anchor_separations(const PairPotential& p, const PyErrorOptions& opts) {
  std::vector<double> units = opts.anchor_radii;
  if (units.empty()) {
    units.push_back(0.0);
    for (int i = 1; i <= 9; ++i) units.push_back(0.1 * i);
    for (int i = 11; i <= 30; ++i) units.push_back(0.1 * i);
  }
  std::vector<double> out;
  for (double u : units) out.push_back(u * p.sigma());
  return out;
}

bool near_breakpoint(const PairPotential& p, double r, double dr) {
  for (double b : p.breakpoints())
    if (std::fabs(r - b) < 0.5 * dr) return true;
  return false;
}

CoefficientTable table_for(const PairPotential& p, int K, const std::vector<double>& radii,
                           const PyErrorOptions& opts) {
  if (opts.h_table) {
    if (opts.h_table->max_order() < K) throw DomainError("h table has too few orders");
    if (opts.h_table->anchors.size() != radii.size())
      throw DomainError("h table anchors do not match the separations");
    return *opts.h_table;
  }
  return build_h_table(K, radii, p, opts.mc, Normalization::OzConsistent, opts.enum_opts);
}

PyErrorPoint series_error(const ClosureFields& fields, const CoefficientTable& table,
                          const std::vector<double>& radii, const PairPotential& p, double rho,
                          int K, double dr) {
  PyErrorPoint pt;
  pt.rho = rho;
  for (std::size_t a = 0; a < radii.size(); ++a) {
    const double r = radii[a];
    if (near_breakpoint(p, r, dr)) continue;
    double series = 0.0;
    double var = 0.0;
    double rk = 1.0;
    for (int k = 0; k <= K; ++k, rk *= rho) {
      series += rk * table.value(k, a);
      const double e = rk * table.std_error(k, a);
      var += e * e;
    }
    const double err = std::fabs(fields.h.at(r) - series);
    if (err > pt.error) {
      pt.error = err;
      pt.worst_r = r;
      pt.noise_floor = std::sqrt(var);
    }
  }
  return pt;
}

}  // namespace

std::string PyErrorOrder::to_json() const {
  json j;
  j["K"] = K;
  j["slope"] = slope;
  j["slope_std_error"] = slope_std_error;
  j["band"] = {band_lo, band_hi};
  j["above_noise_floor"] = above_noise_floor;
  j["pass"] = pass;
  json pts = json::array();
  for (const auto& p : points)
    pts.push_back({{"rho", p.rho}, {"error", p.error}, {"noise_floor", p.noise_floor},
                   {"worst_r", p.worst_r}});
  j["points"] = pts;
  return j.dump(2);
}

PyErrorOrder py_error_order(const PairPotential& p, const std::vector<double>& rho_list, int K,
                            const PyErrorOptions& opts) {
  if (rho_list.size() < 3) throw DomainError("the slope fit needs at least 3 densities");
  if (K < 2) throw DomainError("series order K must be >= 2");
  for (double rho : rho_list)
    if (!(rho > 0.0)) throw DomainError("densities must be positive for a log fit");
  const auto radii = anchor_separations(p, opts);
  const CoefficientTable table = table_for(p, K, radii, opts);

  PyErrorOrder out;
  out.K = K;
  out.points.resize(rho_list.size());
  parallel_for(rho_list.size(), opts.threads, [&](std::size_t i) {
    const PyResult res = py_solve(p, rho_list[i], opts.grid, opts.solver);
    out.points[i] = series_error(res.fields, table, radii, p, rho_list[i], K, opts.grid.dr);
  });

  const double n = static_cast<double>(out.points.size());
  double sx = 0, sy = 0;
  for (const auto& pt : out.points) {
    if (!(pt.error > 0.0)) throw NumericalError("zero series error, slope undefined", 0.0);
    sx += std::log(pt.rho);
    sy += std::log(pt.error);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& pt : out.points) {
    const double dx = std::log(pt.rho) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(pt.error) - my);
  }
  if (!(sxx > 0.0)) throw DomainError("densities must not all coincide");
  out.slope = sxy / sxx;
  const double intercept = my - out.slope * mx;
  double ss = 0;
  for (const auto& pt : out.points) {
    const double r = std::log(pt.error) - intercept - out.slope * std::log(pt.rho);
    ss += r * r;
  }
  const double dof = n - 2.0;
  out.slope_std_error = std::sqrt(ss / dof / sxx);
  const double tq =
      boost::math::quantile(boost::math::students_t(dof), 0.975);
  out.band_lo = out.slope - tq * out.slope_std_error;
  out.band_hi = out.slope + tq * out.slope_std_error;
  out.above_noise_floor = std::all_of(out.points.begin(), out.points.end(), [](const auto& pt) {
    return pt.error > 3.0 * pt.noise_floor;
  });
  out.pass = out.slope >= 1.8 && out.above_noise_floor;
  return out;
}

std::vector<PyErrorPoint> py_error_decay(const PairPotential& p, double rho, int K_max,
                                         const PyErrorOptions& opts) {
  if (K_max < 0) throw DomainError("K_max must be >= 0");
  const auto radii = anchor_separations(p, opts);
  const CoefficientTable table = table_for(p, K_max, radii, opts);
  const PyResult res = py_solve(p, rho, opts.grid, opts.solver);
  std::vector<PyErrorPoint> out;
  for (int K = 0; K <= K_max; ++K)
    out.push_back(series_error(res.fields, table, radii, p, rho, K, opts.grid.dr));
  return out;
}

// ------------------------------------------------------------ defect

RadialFunction closure_defect(const ClosureFields& fields, const CoefficientTable& c2_table,
                              double rho) {
  if (c2_table.target != TableTarget::C2) throw DomainError("closure_defect needs a c2 table");
  const std::size_t na = c2_table.anchors.size();
  if (na < 2) throw DomainError("c2 table needs at least 2 separations");
  std::vector<double> radii(na);
  for (std::size_t a = 0; a < na; ++a) {
    const auto& q = c2_table.anchors[a];
    radii[a] = std::hypot(q[1][0] - q[0][0], q[1][1] - q[0][1], q[1][2] - q[0][2]);
  }
  const double step = radii[1] - radii[0];
  for (std::size_t a = 0; a < na; ++a)
    if (std::fabs(radii[a] - step * static_cast<double>(a)) > 1e-9 * (1.0 + radii[a]))
      throw DomainError("c2 table separations must form the grid 0, dr, 2 dr, ...");
  std::vector<double> m(na);
  for (std::size_t a = 0; a < na; ++a) {
    double series = 0.0;
    double rk = 1.0;
    for (int k = 0; k <= c2_table.max_order(); ++k, rk *= rho) series += rk * c2_table.value(k, a);
    m[a] = series - fields.f.at(radii[a]) * (1.0 + fields.t.at(radii[a]));
  }
  return RadialFunction(step, std::move(m), fields.f.dimension());
}

std::vector<DefectPoint> defect_coefficient(int k, const std::vector<double>& radii,
                                            const PairPotential& p, const McConfig& cfg,
                                            const EnumerationOptions& enum_opts) {
  if (k < 0) throw DomainError("order must be >= 0");
  EstimateCache cache;
  std::vector<DefectPoint> out;
  for (double r : radii) {
    const auto anchors = pair_anchors(r);
    const Uncertain H =
        h_coefficient_u(2, k, anchors, p, cfg, Normalization::OzConsistent, enum_opts, &cache);
    const Uncertain C = c2_coefficient_u(k, anchors, p, cfg, enum_opts, &cache);
    const Uncertain m = C - Uncertain(mayer_f(p, r)) * (H - C);
    out.push_back({r, m.value(), m.std_error()});
  }
  return out;
}

}  // namespace clusterkit
