#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace arise {

// Base class for every error raised by the core library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input outside the mathematical or enumerated domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Operation invoked in a state where it is not allowed.
class StateError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IngestError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

class StoreError : public Error {
 public:
  using Error::Error;
};

// Text input that could not be parsed. Row and column are 1-based; zero
// means the position is not known or not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row = 0, std::size_t col = 0)
      : Error(format(what, row, col)), message_(what), row_(row), col_(col) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }
  // Same position, message prefixed with `context` (e.g. a file name).
  ParseError with_context(const std::string& context) const { return {context + ": " + message_, row_, col_}; }

 private:
  static std::string format(const std::string& what, std::size_t row, std::size_t col) {
    if (row == 0) return what;
    std::string out = what + " (row " + std::to_string(row);
    if (col != 0) out += ", col " + std::to_string(col);
    return out + ")";
  }

  std::string message_;
  std::size_t row_;
  std::size_t col_;
};

}  // namespace arise
