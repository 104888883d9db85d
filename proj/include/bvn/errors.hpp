#pragma once

#include <stdexcept>
#include <string>

namespace bvn {

// Data whose sufficient statistics collapse (|r| -> 1, s_ii <= 0, n < 3).
struct DegenerateDataError : std::runtime_error {
  explicit DegenerateDataError(const std::string& what) : std::runtime_error(what) {}
};

// The requested operation is not defined for this prior.
struct UnsupportedPriorError : std::invalid_argument {
  explicit UnsupportedPriorError(const std::string& what) : std::invalid_argument(what) {}
};

// A density was evaluated exactly at a pole.
struct PriorPoleError : std::domain_error {
  explicit PriorPoleError(const std::string& what) : std::domain_error(what) {}
};

// A rejection loop exceeded its proposal cap.
struct PathologicalDataError : std::runtime_error {
  explicit PathologicalDataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bvn
