#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace graphmark {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checked 64-bit arithmetic left its range (Catalan table, ranks, pathcodes).
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// A configured cap was exceeded (max tree leaves, split depth, ...).
class LimitError : public Error {
 public:
  using Error::Error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Static checks on a parsed program: names, arity, definite assignment.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A transformation would clash with the reserved `__wm_` / `__tp_` namespaces.
class ReservedNameError : public Error {
 public:
  using Error::Error;
};

/// An encoding plan no longer matches the program it is applied to.
class SiteDriftError : public Error {
 public:
  using Error::Error;
};

}  // namespace graphmark
