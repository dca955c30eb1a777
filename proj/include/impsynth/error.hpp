#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace impsynth {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed concrete or prefix syntax. `position` is a byte offset into the input.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t position)
      : Error(what + " at offset " + std::to_string(position)), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// An operator applied to children of the wrong sort or count.
class SortError : public Error {
 public:
  using Error::Error;
};

class UnknownVariable : public Error {
 public:
  explicit UnknownVariable(const std::string& name) : Error("unknown variable '" + name + "'") {}
};

/// Grammar, problem or certificate content that is structurally invalid.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Precondition violated by a caller.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace impsynth
