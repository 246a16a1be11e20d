#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace vpfp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A named input is outside its admissible range.
class InvalidParameter : public Error {
 public:
  InvalidParameter(std::string name, const std::string& what)
      : Error(name + ": " + what), name_(std::move(name)) {}

  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// Neumann Poisson source with nonzero total charge.
class NonCompatibleSource : public Error {
 public:
  NonCompatibleSource(double residual, double scale)
      : Error("non-neutral source: charge residual " + std::to_string(residual) +
              " exceeds tolerance for charge scale " + std::to_string(scale)),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

class CflViolation : public Error {
 public:
  CflViolation(const std::string& direction, double courant)
      : Error(direction + " advection CFL violated: Courant number " + std::to_string(courant)),
        courant_(courant) {}

  double courant() const noexcept { return courant_; }

 private:
  double courant_;
};

/// Breakdown of a direct solve (e.g. non-positive pivot in a tridiagonal system).
class SolverFailure : public Error {
 public:
  SolverFailure(const std::string& what, std::size_t index)
      : Error(what + " at index " + std::to_string(index)), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string key_path, const std::string& what)
      : Error(key_path + ": " + what), key_path_(std::move(key_path)) {}

  const std::string& key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

class NotImplemented : public Error {
 public:
  using Error::Error;
};

}  // namespace vpfp
