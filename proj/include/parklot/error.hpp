#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace parklot {

/// Base of every exception thrown by the engine.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// One or more invariant violations found while validating input data.
class ValidationError : public Error {
public:
  explicit ValidationError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
      if (!out.empty()) out += "; ";
      out += item;
    }
    return out;
  }

  std::vector<std::string> violations_;
};

/// Malformed serialized input. `line` is 1-based, 0 when not applicable.
class ParseError : public Error {
public:
  ParseError(std::size_t line, std::string field, const std::string& reason)
      : Error(format(line, field, reason)), line_(line), field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

private:
  static std::string format(std::size_t line, const std::string& field, const std::string& reason) {
    std::string out;
    if (line != 0) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += "field '" + field + "': ";
    return out + reason;
  }

  std::size_t line_;
  std::string field_;
};

/// A track whose numeric state can no longer be trusted (non-finite values,
/// a non positive-definite innovation covariance, ...).
class CorruptedTrackError : public Error {
public:
  using Error::Error;
};

/// Failure reading or writing persistent storage.
class StorageError : public Error {
public:
  using Error::Error;
};

}  // namespace parklot
