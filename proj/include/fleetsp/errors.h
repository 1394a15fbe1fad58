#ifndef FLEETSP_ERRORS_H_
#define FLEETSP_ERRORS_H_

#include <stdexcept>
#include <string>

namespace fleet {

// Bad configuration or invalid arguments supplied by the caller.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Unreadable or malformed files and streams.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A solver could not produce an answer (infeasible where feasibility is
// required, iteration limits, and so on).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The simplex basis became numerically singular and refactorization did not
// recover it.
class NumericFailure : public SolverError {
 public:
  using SolverError::SolverError;
};

}  // namespace fleet

#endif  // FLEETSP_ERRORS_H_
