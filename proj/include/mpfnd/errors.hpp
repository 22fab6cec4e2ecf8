#pragma once

#include <stdexcept>
#include <string>

namespace mpfnd {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape/arity mismatch between tensors.
struct DimensionError : Error { using Error::Error; };
// Value outside the mathematical domain of an operation.
struct DomainError : Error { using Error::Error; };
// Bad or inconsistent configuration.
struct ConfigError : Error { using Error::Error; };
// Duplicate registration (node ids, feature rows).
struct ConflictError : Error { using Error::Error; };
struct NotFoundError : Error { using Error::Error; };
// Typed-graph signature violations (edge endpoints, timestamps).
struct SchemaError : Error { using Error::Error; };
// File parse/validation failure; message carries the line or row number.
struct IngestError : Error { using Error::Error; };
// A bound feature table does not cover every node.
struct CoverageError : Error { using Error::Error; };
// Degenerate dataset (empty split, single-class part).
struct DataError : Error { using Error::Error; };
struct StateError : Error { using Error::Error; };
// Target news with no meta-path instances on either schema.
struct IsolationError : Error { using Error::Error; };
struct EvalError : Error { using Error::Error; };
struct TrainingError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace mpfnd
