#pragma once

#include <stdexcept>
#include <string>

namespace finsler {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed user input: metric files, expressions, points, flags.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Syntax error in an expression, with the byte offset of the failure.
class ParseError : public InputError {
 public:
  ParseError(const std::string& msg, std::size_t position)
      : InputError(msg + " (at position " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// Jets of different variable counts were combined.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A function was evaluated outside its smooth domain (sqrt/log of a
/// non-positive value, division by a zero-valued jet, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A derivative was requested beyond the order carried by a jet.
class OrderError : public Error {
 public:
  OrderError(const std::string& what, int required, int available)
      : Error(what + ": requires jet order " + std::to_string(required) +
              ", available " + std::to_string(available)),
        required_(required),
        available_(available) {}
  int required() const { return required_; }
  int available() const { return available_; }

 private:
  int required_;
  int available_;
};

/// Numerical failure: indefinite metric, ill-conditioning, quadrature or
/// hypothesis violations detected at run time.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace finsler
