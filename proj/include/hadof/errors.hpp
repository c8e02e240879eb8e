#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hadof {

// Vector or register sizes that do not line up.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Work that would exceed a hard size cap (enumeration, statevector width).
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Invalid configuration or argument values, rejected before any work starts.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed input files (FASTA, QUBO JSON, CSV, experiment specs).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A circuit job threw while executing; carries the failing job id.
class JobFailure : public std::runtime_error {
 public:
  JobFailure(std::size_t job_id, const std::string& what)
      : std::runtime_error("job " + std::to_string(job_id) + " failed: " + what), job_id_(job_id) {}

  [[nodiscard]] std::size_t job_id() const noexcept { return job_id_; }

 private:
  std::size_t job_id_;
};

}  // namespace hadof
