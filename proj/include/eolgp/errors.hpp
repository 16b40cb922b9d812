#pragma once

#include <stdexcept>
#include <string>

namespace eolgp {

/// Process exit codes used by the command-line front end.
enum class ExitCode : int {
  success = 0,
  usage = 1,
  data = 2,
  numerical = 3,
  acceptance = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  [[nodiscard]] virtual ExitCode exit_code() const noexcept = 0;
};

/// Caller misused an API (bad option, inconsistent arguments).
class UsageError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::usage; }
};

/// A value violates a domain invariant (negative C-rate, bad temperature, ...).
class InputError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::data; }
};

/// Malformed or unreadable file, or a dataset that cannot be generated.
class DataError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::data; }
};

class NumericalError : public Error {
 public:
  using Error::Error;
  [[nodiscard]] ExitCode exit_code() const noexcept override { return ExitCode::numerical; }
};

/// Optimal-temperature polynomial evaluated outside the admissible band.
class RangeError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace eolgp
