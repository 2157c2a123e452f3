#pragma once

#include <stdexcept>
#include <string>

namespace tlab {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

/// Eigen-iteration did not converge; carries the reconstruction residual of
/// whatever partial factorization was available (NaN when none was).
struct EigFailure : Error {
  EigFailure(const std::string& what, double residual)
      : Error(what), residual(residual) {}
  double residual;
};

/// Circle distributions of two step functions disagree; carries the witness
/// arc (theta1, theta2] and the mass gap observed on it.
struct DistributionMismatch : Error {
  DistributionMismatch(const std::string& what, double theta1, double theta2,
                       double gap)
      : Error(what), theta1(theta1), theta2(theta2), gap(gap) {}
  double theta1;
  double theta2;
  double gap;
};

}  // namespace tlab
