#pragma once

#include <stdexcept>
#include <string>

namespace bosefluct {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StructuralError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when a truncated-Fock verdict cannot be trusted (cutoff leakage).
struct InconclusiveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bosefluct
