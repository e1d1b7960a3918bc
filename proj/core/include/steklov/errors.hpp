#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace steklov {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent arguments (empty inputs, size mismatches, bad ranges).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A request exceeds the supported desk-scale limits (e.g. prefractal generation > 8).
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Polygon or mesh violates a structural requirement (off-grid, non-axis-aligned, non-simple).
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// The shift parameter lands on (or numerically next to) a discrete spectrum, so the
/// requested operator is singular or not positive definite.
class SpectralExclusionError : public Error {
 public:
  SpectralExclusionError(const std::string& what, double shift,
                         std::optional<double> offending_eigenvalue = std::nullopt)
      : Error(what), shift_(shift), eigenvalue_(offending_eigenvalue) {}

  double shift() const noexcept { return shift_; }
  std::optional<double> offending_eigenvalue() const noexcept { return eigenvalue_; }

 private:
  double shift_;
  std::optional<double> eigenvalue_;
};

/// Iterative method failed to converge; message carries the residual history summary.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Process exit codes used by the command-line front end.
enum class ExitCode : int { kOk = 0, kUsage = 2, kSpectralExclusion = 3, kNumerical = 4 };

ExitCode exit_code_for(const std::exception& e) noexcept;

}  // namespace steklov
