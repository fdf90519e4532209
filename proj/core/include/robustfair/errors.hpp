#pragma once

#include <stdexcept>
#include <string>

namespace robustfair {

/// Rejected input: bad dimensions, non-finite values, malformed config.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical routine failed to produce a solution (divergence, broken
/// bracket, iteration exhaustion).
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace robustfair
