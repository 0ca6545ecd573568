#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace obusim {

/// Root of every error thrown by the library. The CLI maps any of these to a
/// nonzero exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Missing column, unknown module/type name and similar structural problems.
class SchemaError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// A caller broke a documented precondition (e.g. unsorted input).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class DegenerateGeometry : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace obusim
