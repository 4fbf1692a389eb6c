#pragma once

#include <stdexcept>
#include <string>

namespace polymoment {

// Bad shapes, out-of-range indices, inconsistent dimensions.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Calling an operation on input it does not support (e.g. build() with inequalities).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class DegenerateInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& context, const std::string& message)
      : std::runtime_error(context + ": " + message), context_(context) {}
  const std::string& context() const noexcept { return context_; }

 private:
  std::string context_;
};

class NotSeparableError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class BandTooTightError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateSolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace polymoment
