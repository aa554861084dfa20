#pragma once

#include <stdexcept>
#include <string>

namespace ldm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments or flag values supplied by a caller.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unusable input data (bad files, single-class splits, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure inside a solver (factorization, non-finite state).
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace ldm
