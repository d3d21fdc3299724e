#pragma once

#include <stdexcept>
#include <string>

namespace un {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Newton iterations diverged (sup-norm of the coefficient vector blew up),
// which signals perfect or quasi-perfect separation of the treatment groups.
class SeparationDetected : public Error {
 public:
  explicit SeparationDetected(const std::string& msg) : Error(msg) {}
};

// Observed information matrix is not positive definite.
class SingularInformation : public Error {
 public:
  explicit SingularInformation(const std::string& msg) : Error(msg) {}
};

// Maximum-likelihood iterations exhausted before the gradient tolerance.
class NotConverged : public Error {
 public:
  explicit NotConverged(const std::string& msg) : Error(msg) {}
};

// Non-finite log-posterior encountered during MCMC.
class ChainDiverged : public Error {
 public:
  explicit ChainDiverged(const std::string& msg) : Error(msg) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

class NoTreatedUnits : public Error {
 public:
  explicit NoTreatedUnits(const std::string& msg) : Error(msg) {}
};

class EmptyControlPool : public Error {
 public:
  explicit EmptyControlPool(const std::string& msg) : Error(msg) {}
};

class EmptyMatchSet : public Error {
 public:
  explicit EmptyMatchSet(const std::string& msg) : Error(msg) {}
};

// Too many bootstrap replicates failed (separation, empty pools, ...).
class ReplicateFailed : public Error {
 public:
  ReplicateFailed(std::size_t failed, std::size_t total, const std::string& msg)
      : Error(msg), failed_count(failed), total_count(total) {}
  std::size_t failed_count;
  std::size_t total_count;
};

// A Monte Carlo replication failed and the failure budget was exceeded.
class ReplicationFailed : public Error {
 public:
  ReplicationFailed(std::size_t replication, const std::string& msg)
      : Error(msg), replication_index(replication) {}
  std::size_t replication_index;
};

// Malformed input data or configuration (CLI exit code 2).
class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& msg) : Error(msg) {}
};

}  // namespace un
