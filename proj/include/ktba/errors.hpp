#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ktba {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands live in spaces with different dimensions or block layouts.
class SignatureError : public Error {
 public:
  using Error::Error;
};

/// A scalar parameter is outside its admissible range (e.g. gamma <= 0).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A NaN or infinity showed up where only finite values are allowed.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Malformed input document; the message carries line or field information.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that fails validation. Collects every failure found.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> failures)
      : Error(join(failures)), failures_(std::move(failures)) {}

  const std::vector<std::string>& failures() const { return failures_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out = "validation failed:";
    for (const auto& item : items) {
      out += "\n  ";
      out += item;
    }
    return out;
  }

  std::vector<std::string> failures_;
};

}  // namespace ktba
