#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vowelprompt {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input content is invalid: bad flags, malformed files, contract violations.
/// The CLI maps this family to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// File access failed. CLI exit code 2.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Unsupported or corrupt binary container (e.g. a WAV chunk).
class FormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Text parse failure carrying the 1-based line where it was detected.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line), message_(what) {}
  /// "<file>:<line>: <what>"
  ParseError(const std::string& file, const std::string& what, std::size_t line)
      : ValidationError(file + ":" + std::to_string(line) + ": " + what), line_(line), message_(what) {}

  std::size_t line() const noexcept { return line_; }
  /// The message without its location prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  std::size_t line_;
  std::string message_;
};

/// Well-formed input whose structure violates a pipeline invariant
/// (missing tier, overlapping phones, unsorted segments).
class StructuralError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace vowelprompt
