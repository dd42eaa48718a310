#ifndef CLUSTERKIT_ERRORS_HPP
#define CLUSTERKIT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace clusterkit {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

/// An input violates an operation's precondition.
class DomainError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "domain"; }
};

/// A brute-force guard (enumeration cap, permutation cap) was exceeded.
class SizeLimitError : public Error {
 public:
  SizeLimitError(const std::string& what, int cap)
      : Error(what + " (cap = " + std::to_string(cap) + ")"), cap_(cap) {}
  int cap() const noexcept { return cap_; }
  const char* kind() const noexcept override { return "size_limit"; }

 private:
  int cap_;
};

/// Quadrature or iteration failed to reach the requested accuracy.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }
  const char* kind() const noexcept override { return "numerical"; }

 private:
  double achieved_;
};

/// Fixed-point iteration hit max_iter.
class ConvergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
  const char* kind() const noexcept override { return "non_convergence"; }
};

/// 1 - rho * c_hat(k) came too close to zero: the density is outside the
/// range where the integral equation can be solved.
class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
  const char* kind() const noexcept override { return "density_too_high"; }
};

/// Malformed configuration, potential file or command line.
class ConfigError : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "config"; }
};

}  // namespace clusterkit

#endif  // CLUSTERKIT_ERRORS_HPP
