#pragma once

#include <stdexcept>
#include <string>

namespace cliffsemi {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Mixed signature sizes or block dimensions.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// An element expected on the quadratic cone failed the membership test.
class ConeError : public Error {
public:
  using Error::Error;
};

/// Direct inversion refused: the real representation is numerically singular.
class NotInvertibleError : public Error {
public:
  NotInvertibleError(const std::string& what, double sigma_min, double sigma_max)
      : Error(what), sigma_min_(sigma_min), sigma_max_(sigma_max) {}

  double sigma_min() const noexcept { return sigma_min_; }
  double sigma_max() const noexcept { return sigma_max_; }

private:
  double sigma_min_;
  double sigma_max_;
};

/// A theorem hypothesis (r_P > omega, re(q) > omega) does not hold with margin.
class HypothesisError : public Error {
public:
  HypothesisError(const std::string& what, double rate, double omega)
      : Error(what), rate_(rate), omega_(omega) {}

  double rate() const noexcept { return rate_; }
  double omega() const noexcept { return omega_; }

private:
  double rate_;
  double omega_;
};

/// The Laplace integral is not absolutely convergent for the given kernel.
class DivergenceError : public Error {
public:
  using Error::Error;
};

/// Panel refinement did not reach the requested tolerance.
class AccuracyError : public Error {
public:
  AccuracyError(const std::string& what, double best_error)
      : Error(what), best_error_(best_error) {}

  double best_error() const noexcept { return best_error_; }

private:
  double best_error_;
};

/// Invalid configuration or unreadable input.
class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace cliffsemi
