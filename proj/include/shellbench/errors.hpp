#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shellbench {

// Input stream could not be parsed; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConstraintError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BenchmarkError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace shellbench
