#include "clusterkit/oz.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <sstream>

#include "clusterkit/errors.hpp"
#include "clusterkit/hashing.hpp"
#include "quadrature.hpp"

namespace clusterkit {

namespace {

constexpr double kPi = std::numbers::pi;

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

// ------------------------------------------------------------ RadialFunction

RadialFunction::RadialFunction(double dr, std::vector<double> values, int dimension,
                               std::vector<SplitNode> splits)
    : dr_(dr), values_(std::move(values)), dimension_(dimension), splits_(std::move(splits)) {
  if (!(dr > 0.0)) throw DomainError("grid spacing must be positive");
  if (dimension != 1 && dimension != 3) throw DomainError("radial grids support d = 1 and d = 3");
  if (values_.size() < 2) throw DomainError("radial grid needs at least 2 points");
  std::sort(splits_.begin(), splits_.end(),
            [](const SplitNode& a, const SplitNode& b) { return a.index < b.index; });
}

RadialFunction RadialFunction::sample(double dr, std::size_t n, int dimension,
                                      const std::function<double(double)>& fn,
                                      const std::vector<double>& jumps) {
  std::vector<double> v(n);
  for (std::size_t j = 0; j < n; ++j) v[j] = fn(dr * static_cast<double>(j));
  std::vector<SplitNode> splits;
  for (double x : jumps) {
    const double pos = x / dr;
    const double idx = std::round(pos);
    if (idx < 0 || idx >= static_cast<double>(n) || std::fabs(pos - idx) > 1e-9) continue;
    const auto j = static_cast<std::size_t>(idx);
    const double eps = 1e-9 * dr;
    SplitNode s{j, fn(x - eps), fn(x + eps)};
    v[j] = 0.5 * (s.left + s.right);
    splits.push_back(s);
  }
  return RadialFunction(dr, std::move(v), dimension, std::move(splits));
}

bool RadialFunction::is_split(std::size_t j) const {
  return std::any_of(splits_.begin(), splits_.end(),
                     [j](const SplitNode& s) { return s.index == j; });
}

double RadialFunction::left(std::size_t j) const {
  for (const auto& s : splits_)
    if (s.index == j) return s.left;
  return values_.at(j);
}

double RadialFunction::right(std::size_t j) const {
  for (const auto& s : splits_)
    if (s.index == j) return s.right;
  return values_.at(j);
}

double RadialFunction::at(double r) const {
  r = std::fabs(r);
  const double pos = r / dr_;
  const auto n = values_.size();
  if (pos >= static_cast<double>(n - 1)) return pos == static_cast<double>(n - 1) ? right(n - 1) : 0.0;
  const auto j = static_cast<std::size_t>(pos);
  const double t = pos - static_cast<double>(j);
  if (t == 0.0) return right(j);
  return (1.0 - t) * right(j) + t * left(j + 1);
}

std::string RadialFunction::to_csv(const std::string& manifest_hash) const {
  std::ostringstream os;
  if (!manifest_hash.empty()) os << "# manifest: " << manifest_hash << '\n';
  os << "r,value\n";
  char buf[64];
  for (std::size_t j = 0; j < values_.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", r(j), values_[j]);
    os << buf;
  }
  return os.str();
}

// ------------------------------------------------------------ RadialTransform

struct RadialTransform::Impl {
  std::size_t len = 0;
  double* buf = nullptr;
  fftw_plan plan = nullptr;
  std::mutex mutex;

  Impl(std::size_t n, fftw_r2r_kind kind) : len(n) {
    buf = fftw_alloc_real(n);
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_r2r_1d(static_cast<int>(n), buf, buf, kind, FFTW_ESTIMATE);
    if (!plan) throw NumericalError("could not plan radial transform", 0.0);
  }
  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(plan);
    fftw_free(buf);
  }
};

RadialTransform::RadialTransform(std::size_t n_points, double dr, int dimension)
    : n_(n_points), dr_(dr), d_(dimension) {
  if (n_points < 2) throw DomainError("radial transform needs at least 2 points");
  if (!(dr > 0.0)) throw DomainError("grid spacing must be positive");
  const std::size_t M = 2 * n_points;
  if (dimension == 3)
    impl_ = std::make_unique<Impl>(M - 1, FFTW_RODFT00);
  else if (dimension == 1)
    impl_ = std::make_unique<Impl>(M + 1, FFTW_REDFT00);
  else
    throw DomainError("radial transforms support d = 1 and d = 3");
}

RadialTransform::~RadialTransform() = default;

std::size_t RadialTransform::padded_size() const { return d_ == 3 ? 2 * n_ : 2 * n_ + 1; }

std::size_t RadialTransform::n_modes() const { return d_ == 3 ? 2 * n_ - 1 : 2 * n_ + 1; }

std::vector<double> RadialTransform::kappa() const {
  const double M = static_cast<double>(2 * n_);
  std::vector<double> k(n_modes());
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double m = d_ == 3 ? static_cast<double>(i + 1) : static_cast<double>(i);
    k[i] = m * kPi / (M * dr_);
  }
  return k;
}

std::vector<double> RadialTransform::forward(const std::vector<double>& a) const {
  if (a.size() > padded_size()) throw DomainError("input longer than the padded grid");
  std::lock_guard<std::mutex> lock(impl_->mutex);
  double* x = impl_->buf;
  const std::size_t L = impl_->len;
  std::fill(x, x + L, 0.0);
  const auto kap = kappa();
  std::vector<double> out(n_modes());
  if (d_ == 3) {
    for (std::size_t j = 1; j < a.size() && j <= L; ++j) x[j - 1] = dr_ * static_cast<double>(j) * a[j];
    fftw_execute(impl_->plan);
    for (std::size_t i = 0; i < L; ++i) out[i] = 4.0 * kPi * dr_ / kap[i] * 0.5 * x[i];
  } else {
    for (std::size_t j = 0; j < a.size(); ++j) x[j] = a[j];
    fftw_execute(impl_->plan);
    for (std::size_t i = 0; i < L; ++i) out[i] = dr_ * x[i];
  }
  return out;
}

std::vector<double> RadialTransform::inverse(const std::vector<double>& a_hat,
                                             bool origin_fit) const {
  if (a_hat.size() != n_modes()) throw DomainError("transform length mismatch");
  std::lock_guard<std::mutex> lock(impl_->mutex);
  double* x = impl_->buf;
  const std::size_t L = impl_->len;
  const double M = static_cast<double>(2 * n_);
  std::vector<double> out(padded_size());
  if (d_ == 3) {
    const auto kap = kappa();
    const double dk = kPi / (M * dr_);
    double origin = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
      x[i] = kap[i] * a_hat[i];
      origin += kap[i] * kap[i] * a_hat[i];
    }
    fftw_execute(impl_->plan);
    out[0] = dk / (2.0 * kPi * kPi) * origin;
    for (std::size_t j = 1; j < out.size(); ++j)
      out[j] = dk / (2.0 * kPi * kPi * dr_ * static_cast<double>(j)) * 0.5 * x[j - 1];
    // Truncating the k sum leaves r a(r) off by a constant near the origin,
    // a dr^2 / r error. Fit r a(r) by a quartic at nodes J..5J, past that
    // band, and use the fit divided by r (constant term dropped) inside it.
    const std::size_t J = std::min<std::size_t>(8, n_ / 10);
    if (origin_fit && J >= 2) {
      constexpr int P = 5;
      double A[P][P + 1];
      for (int i = 0; i < P; ++i) {
        const std::size_t node = J * static_cast<std::size_t>(i + 1);
        const double r = dr_ * static_cast<double>(node);
        double pw = 1.0;
        for (int c = 0; c < P; ++c, pw *= r) A[i][c] = pw;
        A[i][P] = r * out[node];
      }
      for (int c = 0; c < P; ++c) {
        int piv = c;
        for (int i = c + 1; i < P; ++i)
          if (std::fabs(A[i][c]) > std::fabs(A[piv][c])) piv = i;
        std::swap(A[c], A[piv]);
        for (int i = 0; i < P; ++i) {
          if (i == c) continue;
          const double m = A[i][c] / A[c][c];
          for (int cc = c; cc <= P; ++cc) A[i][cc] -= m * A[c][cc];
        }
      }
      double coef[P];
      for (int c = 0; c < P; ++c) coef[c] = A[c][P] / A[c][c];
      for (std::size_t jj = 0; jj < J; ++jj) {
        const double r = dr_ * static_cast<double>(jj);
        double v = 0.0;
        for (int c = P - 1; c >= 1; --c) v = v * r + coef[c];
        out[jj] = v;
      }
    }
  } else {
    for (std::size_t i = 0; i < L; ++i) x[i] = a_hat[i];
    fftw_execute(impl_->plan);
    for (std::size_t j = 0; j < L; ++j) out[j] = x[j] / (2.0 * M * dr_);
  }
  return out;
}

// ------------------------------------------------------------ convolution

namespace {

void check_compatible(const RadialFunction& a, const RadialFunction& b) {
  if (a.dimension() != b.dimension()) throw DomainError("dimension mismatch");
  if (a.size() != b.size() || a.dr() != b.dr()) throw DomainError("grid mismatch");
}

}  // namespace

RadialFunction radial_convolve(const RadialFunction& a, const RadialFunction& b, double rho) {
  check_compatible(a, b);
  const std::size_t n = a.size();
  std::vector<double> out(n, 0.0);
  if (a.dimension() == 1) {
    const auto N = static_cast<long>(n);
    for (long i = 0; i < N; ++i) {
      double s = 0.0;
      for (long j = -(N - 1); j <= N - 1; ++j) {
        const long m = std::labs(i - j);
        if (m < N) s += a[static_cast<std::size_t>(std::labs(j))] * b[static_cast<std::size_t>(m)];
      }
      out[static_cast<std::size_t>(i)] = rho * a.dr() * s;
    }
  } else {
    RadialTransform tr(n, a.dr(), 3);
    auto fa = tr.forward(a.values());
    const auto fb = tr.forward(b.values());
    for (std::size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];
    const auto back = tr.inverse(fa);
    for (std::size_t j = 0; j < n; ++j) out[j] = rho * back[j];
  }
  return RadialFunction(a.dr(), std::move(out), a.dimension());
}

RadialFunction oz_solve_h(const RadialFunction& c, double rho, OzSolveReport* report,
                          double min_denominator) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw DomainError("density must be finite and >= 0");
  const std::size_t n = c.size();
  if (rho == 0.0) {
    if (report) *report = OzSolveReport{0.0, 0.0, 1.0};
    return RadialFunction(c.dr(), c.values(), c.dimension());
  }
  RadialTransform tr(n, c.dr(), c.dimension());
  const auto ch = tr.forward(c.values());
  std::vector<double> hh(ch.size());
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ch.size(); ++i) {
    const double den = 1.0 - rho * ch[i];
    dmin = std::min(dmin, std::fabs(den));
    hh[i] = ch[i] / den;
  }
  if (!(dmin >= min_denominator))
    throw DivergenceError("1 - rho c_hat nearly vanishes", dmin);
  // h = c + rho c * h keeps the grid value of c at r = 0. The residual is
  // taken on the raw transform pair, before the origin-band fit.
  std::vector<double> prod(ch.size());
  for (std::size_t i = 0; i < ch.size(); ++i) prod[i] = rho * ch[i] * hh[i];
  const auto t_raw = tr.inverse(prod, false);
  std::vector<double> h_pad(tr.padded_size(), 0.0);
  for (std::size_t j = 0; j < h_pad.size(); ++j) h_pad[j] = (j < n ? c[j] : 0.0) + t_raw[j];

  auto fh = tr.forward(h_pad);
  for (std::size_t i = 0; i < fh.size(); ++i) fh[i] *= rho * ch[i];
  const auto conv = tr.inverse(fh, false);
  double sup = 0.0;
  double l1 = 0.0;
  for (std::size_t j = 1; j < h_pad.size(); ++j) {
    const double res = h_pad[j] - (j < n ? c[j] : 0.0) - conv[j];
    sup = std::max(sup, std::fabs(res));
    l1 += std::fabs(res) * c.dr();
  }
  const auto t = tr.inverse(prod);
  for (std::size_t j = 0; j < h_pad.size(); ++j) h_pad[j] = (j < n ? c[j] : 0.0) + t[j];
  if (report) *report = OzSolveReport{sup, l1, dmin};
  if (!(sup <= 1e-8)) throw NumericalError("OZ residual too large", sup);
  h_pad.resize(n);
  return RadialFunction(c.dr(), std::move(h_pad), c.dimension());
}

// ------------------------------------------------------------ census

namespace {

std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::size_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
  return r;
}

}  // namespace

CensusIdentity oz_census_identity(int k, const EnumerationOptions& enum_opts) {
  if (k < 0) throw DomainError("order must be >= 0");
  CensusIdentity out;
  out.k = k;
  out.articulation_free = count(2, k, GraphClass::ArticulationFree, enum_opts);
  out.two_connected = count(2, k, GraphClass::TwoConnected, enum_opts);
  std::size_t sum = 0;
  for (int l = 0; l <= k - 1; ++l)
    sum += binomial(k - 1, l) * count(2, l, GraphClass::TwoConnected, enum_opts) *
           count(2, k - 1 - l, GraphClass::ArticulationFree, enum_opts);
  out.nodal_split_without_label_factor = sum;
  out.nodal_split = static_cast<std::size_t>(k) * sum;
  out.holds = out.articulation_free == out.two_connected + out.nodal_split;
  out.holds_without_label_factor =
      out.articulation_free == out.two_connected + out.nodal_split_without_label_factor;
  return out;
}

// ------------------------------------------------------------ quadrature

namespace {

std::vector<double> sorted_cuts(std::vector<double> pts, double lo, double hi) {
  std::vector<double> out{lo, hi};
  for (double c : pts)
    if (c > lo && c < hi) out.push_back(c);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double x, double y) { return std::fabs(x - y) <= 1e-14 * (1 + std::fabs(x)); }),
            out.end());
  return out;
}

template <class F>
double piecewise_gk(F&& f, const std::vector<double>& cuts, double tol) {
  return detail::integrate_pieces(f, cuts, tol, 1e-15);
}

}  // namespace

double quadrature_convolution(const std::function<double(double)>& a, double support_a,
                              const std::function<double(double)>& b, double support_b,
                              const std::vector<double>& cuts, int dimension, double r,
                              double tol) {
  r = std::fabs(r);
  const double rel = std::max(tol, 1e-13);
  if (dimension == 1) {
    std::vector<double> pts;
    for (double c : cuts)
      for (double x : {c, -c, r - c, r + c}) pts.push_back(x);
    pts.push_back(r - support_b);
    pts.push_back(r + support_b);
    const double lo = std::max(-support_a, r - support_b);
    const double hi = std::min(support_a, r + support_b);
    if (lo >= hi) return 0.0;
    return piecewise_gk([&](double x) { return a(std::fabs(x)) * b(std::fabs(r - x)); },
                        sorted_cuts(pts, lo, hi), rel);
  }
  if (dimension != 3) throw DomainError("quadrature convolution supports d = 1 and d = 3");
  if (r == 0.0) {
    const double hi = std::min(support_a, support_b);
    return piecewise_gk([&](double s) { return 4.0 * kPi * s * s * a(s) * b(s); },
                        sorted_cuts(cuts, 0.0, hi), rel);
  }
  auto inner = [&](double s) {
    const double lo = std::fabs(r - s);
    const double hi = std::min(r + s, support_b);
    if (lo >= hi) return 0.0;
    return piecewise_gk([&](double t) { return t * b(t); }, sorted_cuts(cuts, lo, hi), rel * 0.1);
  };
  std::vector<double> pts;
  for (double c : cuts)
    for (double x : {c, r - c, c - r, r + c}) pts.push_back(x);
  pts.push_back(r);
  pts.push_back(support_b - r);
  pts.push_back(r - support_b);
  const double hi = std::min(support_a, r + support_b);
  if (hi <= 0.0) return 0.0;
  return 2.0 * kPi / r *
         piecewise_gk([&](double s) { return s * a(s) * inner(s); }, sorted_cuts(pts, 0.0, hi), rel);
}

// ------------------------------------------------------------ order check

namespace {

double factorial(int m) {
  double f = 1.0;
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

/// Piecewise Chebyshev interpolant of a function with known kinks.
class PiecewiseCheb {
 public:
  PiecewiseCheb(const std::function<double(double)>& fn, std::vector<double> cuts, int degree = 40)
      : cuts_(std::move(cuts)), degree_(degree) {
    for (std::size_t i = 0; i + 1 < cuts_.size(); ++i) {
      const double lo = cuts_[i];
      const double hi = cuts_[i + 1];
      std::vector<double> vals(static_cast<std::size_t>(degree_ + 1));
      for (int j = 0; j <= degree_; ++j) {
        const double x = std::cos(kPi * (j + 0.5) / (degree_ + 1));
        vals[static_cast<std::size_t>(j)] = fn(0.5 * (lo + hi) + 0.5 * (hi - lo) * x);
      }
      std::vector<double> coef(static_cast<std::size_t>(degree_ + 1), 0.0);
      for (int m = 0; m <= degree_; ++m) {
        double s = 0.0;
        for (int j = 0; j <= degree_; ++j)
          s += vals[static_cast<std::size_t>(j)] * std::cos(kPi * m * (j + 0.5) / (degree_ + 1));
        coef[static_cast<std::size_t>(m)] = 2.0 * s / (degree_ + 1);
      }
      coef[0] *= 0.5;
      coefs_.push_back(std::move(coef));
    }
  }

  double operator()(double r) const {
    if (r < cuts_.front() || r >= cuts_.back()) return 0.0;
    const auto it = std::upper_bound(cuts_.begin(), cuts_.end(), r);
    const auto i = static_cast<std::size_t>(it - cuts_.begin()) - 1;
    const double lo = cuts_[i];
    const double hi = cuts_[i + 1];
    const double x = (2.0 * r - lo - hi) / (hi - lo);
    const auto& c = coefs_[i];
    double b1 = 0.0;
    double b2 = 0.0;
    for (int m = degree_; m >= 1; --m) {
      const double t = 2.0 * x * b1 - b2 + c[static_cast<std::size_t>(m)];
      b2 = b1;
      b1 = t;
    }
    return x * b1 - b2 + c[0];
  }

 private:
  std::vector<double> cuts_;
  int degree_;
  std::vector<std::vector<double>> coefs_;
};

/// Closed forms of the OZ-normalized H_0, H_1 and C_0, C_1 as radial
/// functions, plus their kinks and supports.
struct LowOrderFunctions {
  const PairPotential& p;
  std::function<double(double)> pair;  // int f f over the middle vertex
  std::vector<double> cuts;
  double range;

  explicit LowOrderFunctions(const PairPotential& pot) : p(pot), range(pot.range()) {
    const auto bps = p.breakpoints();
    std::vector<double> pts{0.0};
    for (double x : bps) {
      pts.push_back(x);
      for (double y : bps) {
        pts.push_back(x + y);
        pts.push_back(std::fabs(x - y));
      }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    cuts = pts;
    const ColoredGraph path(2, 1, (EdgeMask{1} << pair_index(0, 2)) | (EdgeMask{1} << pair_index(1, 2)));
    const bool hard_core = p.kind() == PotentialKind::HardSphere || p.kind() == PotentialKind::HardRod;
    auto direct = [path, &pot = p](double r) {
      return zeta_bullet(path, pair_anchors(r), pot).value;
    };
    if (hard_core) {
      pair = direct;
    } else {
      auto cheb = std::make_shared<PiecewiseCheb>(direct, sorted_cuts(pts, 0.0, 2.0 * range));
      pair = [cheb](double r) { return (*cheb)(r); };
    }
  }

  double support(int order) const { return order == 0 ? range : 2.0 * range; }

  std::function<double(double)> h(int order) const {
    if (order == 0) return [this](double r) { return mayer_f(p, r); };
    return [this](double r) { return (1.0 + mayer_f(p, r)) * pair(r); };
  }
  std::function<double(double)> c(int order) const {
    if (order == 0) return [this](double r) { return mayer_f(p, r); };
    return [this](double r) { return mayer_f(p, r) * pair(r); };
  }
};

/// Relabel g1 (whites 0 -> 0, 1 -> glue) and g2 (whites 0 -> glue, 1 -> 1)
/// into one graph on whites {0, 1} and blacks glue, g1's blacks, g2's blacks.
ColoredGraph glue(const ColoredGraph& g1, const ColoredGraph& g2) {
  const int l1 = g1.n_black();
  const int l2 = g2.n_black();
  const int glue_v = 2;
  auto map1 = [&](int v) { return v == 0 ? 0 : v == 1 ? glue_v : 3 + (v - 2); };
  auto map2 = [&](int v) { return v == 0 ? glue_v : v == 1 ? 1 : 3 + l1 + (v - 2); };
  EdgeMask mask = 0;
  for (const auto& [i, j] : g1.edges()) mask |= EdgeMask{1} << pair_index(map1(i), map1(j));
  for (const auto& [i, j] : g2.edges()) mask |= EdgeMask{1} << pair_index(map2(i), map2(j));
  return ColoredGraph(2, 1 + l1 + l2, mask);
}

/// (C_l * H_m)(r) with OZ normalization, by Monte Carlo on glued graphs.
Uncertain glued_convolution(int l, int m, double r, const PairPotential& p, const McConfig& cfg,
                            const EnumerationOptions& enum_opts) {
  const auto c_classes = iso_classes(enumerate(2, l, GraphClass::TwoConnected, enum_opts));
  const auto h_classes = iso_classes(enumerate(2, m, GraphClass::ArticulationFree, enum_opts));
  const auto anchors = pair_anchors(r);
  Uncertain total;
  for (const auto& a : c_classes) {
    for (const auto& b : h_classes) {
      const ColoredGraph g =
          glue(ColoredGraph(2, l, a.canonical), ColoredGraph(2, m, b.canonical));
      Fnv1a id;
      id.text("glue").value(l).value(m).value(a.canonical).value(b.canonical);
      McConfig local = cfg;
      local.seed = derive_seed(cfg.seed, id.digest());
      for (const auto& q : anchors) id.value(q);
      const MayerEstimate e = zeta_bullet(g, anchors, p, local);
      total += Uncertain(static_cast<double>(a.multiplicity * b.multiplicity)) *
               Uncertain::measured(e.value, e.std_error, id.digest());
    }
  }
  return total * Uncertain(1.0 / (factorial(l) * factorial(m)));
}

}  // namespace

OzOrderReport oz_order_check(int k, const std::vector<double>& radii, const PairPotential& p,
                             const McConfig& cfg, const OzCheckOptions& opts) {
  if (k < 0) throw DomainError("order must be >= 0");
  if (k + 2 > opts.enum_opts.max_vertices)
    throw SizeLimitError("order needs graphs beyond the enumeration cap", opts.enum_opts.max_vertices);
  OzOrderReport report;
  report.k = k;
  report.normalization = opts.normalization;
  report.census = oz_census_identity(k, opts.enum_opts);
  const LowOrderFunctions low(p);
  EstimateCache cache;
  report.pass = true;
  for (double r : radii) {
    const auto anchors = pair_anchors(r);
    const Uncertain H = h_coefficient_u(2, k, anchors, p, cfg, Normalization::OzConsistent,
                                        opts.enum_opts, &cache);
    const Uncertain C = c2_coefficient_u(k, anchors, p, cfg, opts.enum_opts, &cache);
    Uncertain conv;
    for (int l = 0; l <= k - 1; ++l) {
      const int m = k - 1 - l;
      if (l <= 1 && m <= 1) {
        conv += Uncertain(quadrature_convolution(low.c(l), low.support(l), low.h(m), low.support(m),
                                                 low.cuts, p.dimension(), r, opts.quad_tol * 1e-2));
      } else {
        conv += glued_convolution(l, m, r, p, cfg, opts.enum_opts);
      }
    }
    const Uncertain res = H - C - conv;
    OzAnchorResidual a;
    a.r = r;
    a.h_k = H.value();
    a.c_k = C.value();
    a.convolution = conv.value();
    a.std_error = res.std_error();
    // Literal h carries an extra 1/2 on every h factor.
    const Uncertain lit = Uncertain(0.5) * H - C - Uncertain(0.5) * conv;
    a.literal_residual = lit.value();
    a.residual = opts.normalization == Normalization::OzConsistent ? res.value() : lit.value();
    const double err = opts.normalization == Normalization::OzConsistent ? res.std_error()
                                                                         : lit.std_error();
    a.pass = std::fabs(a.residual) <= opts.n_sigma * err + opts.quad_tol;
    report.pass = report.pass && a.pass;
    report.anchors.push_back(a);
  }
  return report;
}

}  // namespace clusterkit
