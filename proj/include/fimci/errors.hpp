#pragma once

#include <stdexcept>
#include <string>

namespace fimci {

// Numerical failure taxonomy. NotPositiveDefinite is recoverable at the
// replication level (the record is flagged and excluded); the rest indicate
// misuse or unrecoverable numerical trouble.

class NotPositiveDefiniteError : public std::runtime_error {
 public:
  explicit NotPositiveDefiniteError(const std::string& what)
      : std::runtime_error(what) {}
};

class QuadratureError : public std::runtime_error {
 public:
  explicit QuadratureError(const std::string& what)
      : std::runtime_error(what) {}
};

class FilterDivergenceError : public std::runtime_error {
 public:
  explicit FilterDivergenceError(const std::string& what)
      : std::runtime_error(what) {}
};

class StepUnderflowError : public std::runtime_error {
 public:
  explicit StepUnderflowError(const std::string& what)
      : std::runtime_error(what) {}
};

class InsufficientReplicationsError : public std::runtime_error {
 public:
  explicit InsufficientReplicationsError(const std::string& what)
      : std::runtime_error(what) {}
};

class NoIncludedReplicationsError : public std::runtime_error {
 public:
  explicit NoIncludedReplicationsError(const std::string& what)
      : std::runtime_error(what) {}
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int line, int column)
      : std::runtime_error(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what)
      : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fimci
