#pragma once

#include <stdexcept>
#include <string>

namespace trialbounds {

// Base class for every error raised by the library. Callers that only need
// the exit-code contract can catch this and map to a validation failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input file has missing/extra columns or an unparseable structure.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A record contradicts the registry (e.g. stored action differs from the
// registered policy's action at that covariate value).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

// An outcome lies outside the declared [y_min, y_max].
class RangeError : public Error {
 public:
  using Error::Error;
};

// Registry-level problems: unknown policy id, arm probabilities not summing
// to one, absent performance on a policy that emits non-neutral actions.
class RegistryError : public Error {
 public:
  using Error::Error;
};

class EmptyDatasetError : public Error {
 public:
  using Error::Error;
};

// Too little data for the requested statistic (e.g. variance of one draw).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class RegionEmptyError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// A performance comparison was required against a policy whose performance
// is undefined.
class UndefinedPerformanceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace trialbounds
