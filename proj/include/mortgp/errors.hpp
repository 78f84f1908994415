#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mortgp {

// Exit-code taxonomy used by the CLI: usage -> 1, data -> 2, numerical -> 3.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Cholesky (or equivalent) failed even after jitter escalation.  Carries the
// parameter vector that produced the non-PD matrix so callers can log it and
// treat the evaluation as a fitness failure instead of a crash.
struct FactorizationError : NumericalError {
  FactorizationError(std::string msg, std::vector<double> params)
      : NumericalError(std::move(msg)), offending_params(std::move(params)) {}
  std::vector<double> offending_params;
};

}  // namespace mortgp
