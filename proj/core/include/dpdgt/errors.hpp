#pragma once

#include <stdexcept>
#include <string>

namespace dpdgt {

// Bad arguments (dimension mismatch, out-of-range node, non-positive scale, ...)
// are reported as std::invalid_argument. The types below cover the failure
// modes callers are expected to branch on.

/// The supply-demand balance cannot be met inside the agents' boxes.
class InfeasibleProblem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative numerical routine hit its iteration cap.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A closed-form expression was requested outside the parameter region where
/// it is defined (e.g. a divergent geometric series).
class HypothesisViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace dpdgt
