#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gearwave {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The objective returned a non-finite value.
class OptimError : public Error {
 public:
  OptimError(const std::string& what, double position)
      : Error(what), position_(position) {}

  double position() const noexcept { return position_; }

 private:
  double position_;
};

/// SVM training stopped at the iteration cap before reaching KKT tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double kkt_residual)
      : Error(what), kkt_residual_(kkt_residual) {}

  double kkt_residual() const noexcept { return kkt_residual_; }

 private:
  double kkt_residual_;
};

}  // namespace gearwave
