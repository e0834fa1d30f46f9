#pragma once

#include <stdexcept>
#include <string>

namespace lojlab {

enum class ErrorKind {
  InvalidInput,
  Parameter,
  Numeric,
  Stiffness,
  EnvelopeNotApplicable,
  Precondition,
  Geometry,
  BlowUp,
  InsufficientData,
  Usage,
};

const char* to_string(ErrorKind kind);

/// Base error for every failure reported by the library. The kind maps onto
/// the error classes named by each operation's contract.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidInputError : public Error {
 public:
  explicit InvalidInputError(const std::string& what) : Error(ErrorKind::InvalidInput, what) {}
};

class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what) : Error(ErrorKind::Parameter, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& what) : Error(ErrorKind::Precondition, what) {}
};

class GeometryError : public Error {
 public:
  explicit GeometryError(const std::string& what) : Error(ErrorKind::Geometry, what) {}
};

class EnvelopeNotApplicableError : public Error {
 public:
  explicit EnvelopeNotApplicableError(const std::string& what)
      : Error(ErrorKind::EnvelopeNotApplicable, what) {}
};

class InsufficientDataError : public Error {
 public:
  explicit InsufficientDataError(const std::string& what)
      : Error(ErrorKind::InsufficientData, what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::Usage, what) {}
};

}  // namespace lojlab
