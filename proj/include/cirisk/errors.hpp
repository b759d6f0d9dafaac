#pragma once

#include <stdexcept>
#include <string>

namespace cirisk {

// Input-side problems: bad parameters, malformed configs, degenerate data.
// These map to CLI exit code 2.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DimensionError : InputError {
  using InputError::InputError;
};

struct RankError : InputError {
  using InputError::InputError;
};

struct GeometryError : InputError {
  using InputError::InputError;
};

struct DegenerateDataError : InputError {
  using InputError::InputError;
};

// Numerical failures discovered while computing: a quadrature self-check
// that does not meet its tolerance, or an integrand that returns a
// non-finite value.  These are bugs or mis-scaled inputs, not user typos,
// so they derive from runtime_error; the CLI also maps them to exit 2.
struct AccuracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EvaluationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace cirisk
