#pragma once

#include <stdexcept>
#include <string>

namespace qdp {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree (matrix sizes, vector lengths, qubit counts).
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A numeric argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A persisted document (model, circuit, config) does not match its schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Input data could not be read or parsed.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace qdp
