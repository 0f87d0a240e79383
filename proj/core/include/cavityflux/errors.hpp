#pragma once

#include <stdexcept>
#include <string>

namespace cavityflux {

/// Scene or source description rejected; the message names the offending entity.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A ray query found no boundary; the scene geometry is not closed.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Transfer-operator system could not be solved to the residual target.
class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, double spectral_radius_estimate)
      : std::runtime_error(what), spectral_radius_(spectral_radius_estimate) {}
  double spectral_radius_estimate() const { return spectral_radius_; }

 private:
  double spectral_radius_;
};

}  // namespace cavityflux
