#pragma once

#include <stdexcept>
#include <string>

namespace dpms {

// Points collided, vanished, or a quantity left the domain on which the
// balance equations are defined.
class DegenerateConfiguration : public std::runtime_error {
 public:
  explicit DegenerateConfiguration(const std::string& what)
      : std::runtime_error(what) {}
};

// A precondition of a construction (e.g. combine) does not hold for the
// given inputs.  The message names the failed precondition.
class HypothesisViolation : public std::runtime_error {
 public:
  explicit HypothesisViolation(const std::string& what)
      : std::runtime_error(what) {}
};

// A numerical procedure could not certify its result (root residual too
// large, unexpected degree drop, coincident zeros, ...).
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace dpms
