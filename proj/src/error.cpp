#include "sptest/error.hpp"

#include <algorithm>
#include <sstream>

namespace sptest {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid input";
    case ErrorKind::Configuration: return "configuration error";
    case ErrorKind::InsufficientSample: return "insufficient sample";
    case ErrorKind::DegenerateVariance: return "degenerate variance";
    case ErrorKind::NotApplicable: return "not applicable";
    case ErrorKind::NotPositiveDefinite: return "not positive definite";
    case ErrorKind::Budget: return "budget exceeded";
    case ErrorKind::Numeric: return "numeric error";
    case ErrorKind::Io: return "i/o error";
  }
  return "error";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

namespace {

std::string describe_degenerate(const std::vector<int>& coords) {
  std::ostringstream os;
  os << "variance estimate at or below floor for " << coords.size() << " coordinate(s) [";
  const std::size_t shown = std::min<std::size_t>(coords.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) {
    if (i) os << ", ";
    os << coords[i];
  }
  if (shown < coords.size()) os << ", ...";
  os << "]; drop constant coordinates or use the unnormalized statistic";
  return os.str();
}

}  // namespace

DegenerateVarianceError::DegenerateVarianceError(std::vector<int> coordinates)
    : Error(ErrorKind::DegenerateVariance, describe_degenerate(coordinates)),
      coordinates_(std::move(coordinates)) {}

}  // namespace sptest
