#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ksnet {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input that violates a documented precondition (graph, parameters, scenario).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DisconnectedGraph : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NonpositiveLength : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DanglingEndpoint : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Malformed expression text; `offset` is the byte offset of the offending token.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownIdentifier : public SyntaxError {
 public:
  UnknownIdentifier(const std::string& name, std::size_t offset)
      : SyntaxError("unknown identifier '" + name + "'", offset), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class DivisionByZero : public Error {
 public:
  DivisionByZero() : Error("division by zero") {}
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public Error {
 public:
  using Error::Error;
};

class MeshNotNested : public Error {
 public:
  using Error::Error;
};

class MissingSnapshot : public Error {
 public:
  using Error::Error;
};

/// Scenario file that cannot be tokenized; `line` is 1-based.
class ScenarioSyntaxError : public Error {
 public:
  ScenarioSyntaxError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ksnet
