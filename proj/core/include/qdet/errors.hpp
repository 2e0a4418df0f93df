// errors.hpp — exception hierarchy shared across the library
#pragma once

#include <stdexcept>
#include <string>

namespace qdet {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Eigensolver non-convergence, matrix exponential overflow, and similar.
struct NumericalError : Error {
  using Error::Error;
};

// Probability bookkeeping left its tolerance band: a bug or broken input,
// not ordinary round-off.
struct ConsistencyError : Error {
  using Error::Error;
};

// Dense matrix size cap exceeded.
struct CapacityError : Error {
  using Error::Error;
};

// Invalid user-facing configuration or arguments.
struct ConfigError : Error {
  using Error::Error;
};

// File parse failure; carries the 1-based line number.
struct ParseError : ConfigError {
  ParseError(const std::string& msg, int line_no)
      : ConfigError(msg), line(line_no) {}
  int line;
};

}  // namespace qdet
