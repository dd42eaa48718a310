#ifndef CLUSTERKIT_UNCERTAIN_HPP
#define CLUSTERKIT_UNCERTAIN_HPP

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace clusterkit {

/// A value with first-order error propagation. The error is a linear form
/// sum_i g_i xi_i over independent unit noise sources xi_i identified by
/// 64-bit ids, so the same estimate entering twice is correlated with
/// itself and cancels in differences.
class Uncertain {
 public:
  using Term = std::pair<std::uint64_t, double>;

  Uncertain(double value = 0.0) : value_(value) {}  // NOLINT(implicit)

  /// value +- std_error attributed to one noise source.
  static Uncertain measured(double value, double std_error, std::uint64_t source) {
    Uncertain u(value);
    if (std_error != 0.0) u.terms_.emplace_back(source, std_error);
    return u;
  }

  double value() const { return value_; }
  double std_error() const {
    double s = 0.0;
    for (const auto& t : terms_) s += t.second * t.second;
    return std::sqrt(s);
  }
  const std::vector<Term>& terms() const { return terms_; }
  bool is_exact_zero() const { return value_ == 0.0 && terms_.empty(); }

  Uncertain operator-() const {
    Uncertain out(-value_);
    out.terms_ = terms_;
    for (auto& t : out.terms_) t.second = -t.second;
    return out;
  }

  friend Uncertain operator+(const Uncertain& a, const Uncertain& b) {
    return combine(a, 1.0, b, 1.0, a.value_ + b.value_);
  }
  friend Uncertain operator-(const Uncertain& a, const Uncertain& b) {
    return combine(a, 1.0, b, -1.0, a.value_ - b.value_);
  }
  friend Uncertain operator*(const Uncertain& a, const Uncertain& b) {
    return combine(a, b.value_, b, a.value_, a.value_ * b.value_);
  }
  friend Uncertain operator/(const Uncertain& a, const Uncertain& b) {
    const double q = a.value_ / b.value_;
    return combine(a, 1.0 / b.value_, b, -q / b.value_, q);
  }
  Uncertain& operator+=(const Uncertain& b) { return *this = *this + b; }
  Uncertain& operator-=(const Uncertain& b) { return *this = *this - b; }
  Uncertain& operator*=(const Uncertain& b) { return *this = *this * b; }
  Uncertain& operator/=(const Uncertain& b) { return *this = *this / b; }

 private:
  static Uncertain combine(const Uncertain& a, double wa, const Uncertain& b, double wb,
                           double value) {
    Uncertain out(value);
    out.terms_.reserve(a.terms_.size() + b.terms_.size());
    auto ia = a.terms_.begin();
    auto ib = b.terms_.begin();
    auto push = [&](std::uint64_t id, double g) {
      if (g != 0.0) out.terms_.emplace_back(id, g);
    };
    while (ia != a.terms_.end() || ib != b.terms_.end()) {
      if (ib == b.terms_.end() || (ia != a.terms_.end() && ia->first < ib->first)) {
        push(ia->first, wa * ia->second);
        ++ia;
      } else if (ia == a.terms_.end() || ib->first < ia->first) {
        push(ib->first, wb * ib->second);
        ++ib;
      } else {
        push(ia->first, wa * ia->second + wb * ib->second);
        ++ia;
        ++ib;
      }
    }
    return out;
  }

  double value_;
  std::vector<Term> terms_;  // sorted by id
};

}  // namespace clusterkit

#endif  // CLUSTERKIT_UNCERTAIN_HPP
