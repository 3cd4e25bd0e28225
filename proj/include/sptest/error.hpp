#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace sptest {

enum class ErrorKind {
  InvalidInput,
  Configuration,
  InsufficientSample,
  DegenerateVariance,
  NotApplicable,
  NotPositiveDefinite,
  Budget,
  Numeric,
  Io,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when a studentized statistic would divide by a variance at or
/// below the floor. Carries the zero-based coordinates that failed.
class DegenerateVarianceError : public Error {
 public:
  explicit DegenerateVarianceError(std::vector<int> coordinates);

  const std::vector<int>& coordinates() const noexcept { return coordinates_; }

 private:
  std::vector<int> coordinates_;
};

}  // namespace sptest
