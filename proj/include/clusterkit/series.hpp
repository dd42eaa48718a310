#ifndef CLUSTERKIT_SERIES_HPP
#define CLUSTERKIT_SERIES_HPP

// Truncated formal power series a_0 + a_1 x + ... + a_K x^K over exact
// rationals, doubles or Uncertain values.

#include <cstddef>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "clusterkit/errors.hpp"
#include "clusterkit/uncertain.hpp"

namespace clusterkit {

using Rational = boost::multiprecision::cpp_rational;

inline bool series_is_zero(const Rational& x) { return x == 0; }
inline bool series_is_zero(double x) { return x == 0.0; }
inline bool series_is_zero(const Uncertain& x) { return x.is_exact_zero(); }
inline bool series_is_one(const Rational& x) { return x == 1; }
inline bool series_is_one(double x) { return x == 1.0; }
inline bool series_is_one(const Uncertain& x) { return x.value() == 1.0 && x.terms().empty(); }

template <class T>
class FormalSeries {
 public:
  /// Zero series truncated at `order`, in variable `var`.
  explicit FormalSeries(std::size_t order = 0, std::string var = "x")
      : c_(order + 1, T(0)), var_(std::move(var)) {}
  FormalSeries(std::vector<T> coeffs, std::string var = "x")
      : c_(std::move(coeffs)), var_(std::move(var)) {
    if (c_.empty()) throw DomainError("a formal series needs at least one coefficient");
  }

  /// The series x itself (or 0 when order = 0).
  static FormalSeries variable(std::size_t order, std::string var = "x") {
    FormalSeries s(order, std::move(var));
    if (order >= 1) s.c_[1] = T(1);
    return s;
  }

  std::size_t order() const { return c_.size() - 1; }
  const std::string& var() const { return var_; }
  const T& operator[](std::size_t i) const { return c_.at(i); }
  T& operator[](std::size_t i) { return c_.at(i); }
  const std::vector<T>& coefficients() const { return c_; }

  /// Same series cut (or zero-padded) to `order`.
  FormalSeries truncated(std::size_t order) const {
    FormalSeries out(order, var_);
    for (std::size_t i = 0; i <= order && i < c_.size(); ++i) out.c_[i] = c_[i];
    return out;
  }

  friend FormalSeries operator+(const FormalSeries& a, const FormalSeries& b) {
    const std::size_t k = std::min(a.order(), b.order());
    FormalSeries out(k, a.var_);
    for (std::size_t i = 0; i <= k; ++i) out.c_[i] = a.c_[i] + b.c_[i];
    return out;
  }
  friend FormalSeries operator-(const FormalSeries& a, const FormalSeries& b) {
    const std::size_t k = std::min(a.order(), b.order());
    FormalSeries out(k, a.var_);
    for (std::size_t i = 0; i <= k; ++i) out.c_[i] = a.c_[i] - b.c_[i];
    return out;
  }
  friend FormalSeries operator*(const FormalSeries& a, const FormalSeries& b) {
    const std::size_t k = std::min(a.order(), b.order());
    FormalSeries out(k, a.var_);
    for (std::size_t i = 0; i <= k; ++i) {
      if (series_is_zero(a.c_[i])) continue;
      for (std::size_t j = 0; i + j <= k; ++j) out.c_[i + j] += a.c_[i] * b.c_[j];
    }
    return out;
  }
  friend FormalSeries operator*(const T& s, const FormalSeries& a) {
    FormalSeries out = a;
    for (auto& x : out.c_) x = s * x;
    return out;
  }

  /// this(inner(x)); inner must have a zero constant term.
  FormalSeries compose(const FormalSeries& inner) const {
    if (!series_is_zero(inner.c_[0]))
      throw DomainError("composition needs an inner series with zero constant term");
    const std::size_t k = std::min(order(), inner.order());
    // Horner: a_0 + u (a_1 + u (a_2 + ...)).
    FormalSeries acc(k, inner.var_);
    acc.c_[0] = c_[k];
    const FormalSeries u = inner.truncated(k);
    for (std::size_t i = k; i-- > 0;) {
      acc = acc * u;
      acc.c_[0] += c_[i];
    }
    return acc;
  }

  /// 1 / this; needs a nonzero constant term.
  FormalSeries reciprocal() const {
    if (series_is_zero(c_[0])) throw DomainError("reciprocal of a series with zero constant term");
    FormalSeries out(order(), var_);
    out.c_[0] = T(1) / c_[0];
    for (std::size_t n = 1; n <= order(); ++n) {
      T s(0);
      for (std::size_t j = 1; j <= n; ++j) s += c_[j] * out.c_[n - j];
      out.c_[n] = -(s / c_[0]);
    }
    return out;
  }

  FormalSeries derivative() const {
    FormalSeries out(order() == 0 ? 0 : order() - 1, var_);
    for (std::size_t i = 1; i <= order(); ++i) out.c_[i - 1] = T(static_cast<int>(i)) * c_[i];
    return out;
  }

  /// Antiderivative with zero constant, one order higher.
  FormalSeries integral() const {
    FormalSeries out(order() + 1, var_);
    for (std::size_t i = 0; i <= order(); ++i) out.c_[i + 1] = c_[i] / T(static_cast<int>(i + 1));
    return out;
  }

  /// log(this); needs constant term exactly 1.
  FormalSeries log() const {
    if (!series_is_one(c_[0])) throw DomainError("log of a series needs constant term 1");
    if (order() == 0) return FormalSeries(0, var_);
    return (derivative() * reciprocal().truncated(order() - 1)).integral();
  }

  /// exp(this); needs a zero constant term.
  FormalSeries exp() const {
    if (!series_is_zero(c_[0])) throw DomainError("exp of a series needs zero constant term");
    // E' = S' E, solved coefficient by coefficient.
    FormalSeries out(order(), var_);
    out.c_[0] = T(1);
    for (std::size_t n = 1; n <= order(); ++n) {
      T s(0);
      for (std::size_t j = 1; j <= n; ++j) s += T(static_cast<int>(j)) * c_[j] * out.c_[n - j];
      out.c_[n] = s / T(static_cast<int>(n));
    }
    return out;
  }

  /// Compositional inverse R with this(R(x)) = x; needs a_0 = 0 and
  /// a_1 != 0.
  FormalSeries reversion() const {
    if (!series_is_zero(c_[0])) throw DomainError("reversion needs zero constant term");
    if (order() == 0) return FormalSeries(0, var_);
    if (series_is_zero(c_[1])) throw DomainError("reversion needs a nonzero linear term");
    const std::size_t k = order();
    FormalSeries r = variable(k, var_);
    r.c_[1] = T(1) / c_[1];
    // Fix one coefficient per pass: the x^n coefficient of this(r) is
    // a_1 r_n + (terms with lower r_j).
    for (std::size_t n = 2; n <= k; ++n) {
      const FormalSeries comp = compose(r.truncated(n)).truncated(n);
      r.c_[n] = r.c_[n] - comp.c_[n] / c_[1];
    }
    return r;
  }

 private:
  std::vector<T> c_;
  std::string var_;
};

}  // namespace clusterkit

#endif  // CLUSTERKIT_SERIES_HPP
