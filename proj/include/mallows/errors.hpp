#pragma once

#include <stdexcept>
#include <string>

namespace mallows {

// Fixed-point iteration hit max_iter; carries the last marginal residual.
class IterationLimitError : public std::runtime_error {
public:
  IterationLimitError(const std::string& what, double residual, int iterations)
      : std::runtime_error(what), residual(residual), iterations(iterations) {}

  double residual;
  int iterations;
};

// Input exceeds a hard size cap (permutation/subset enumeration is exponential).
class SizeLimitError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A computation lost numerical health: sign flip in a positive permanent,
// spectral-gap violation, ill-conditioned eigenfunction extension, ...
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace mallows
