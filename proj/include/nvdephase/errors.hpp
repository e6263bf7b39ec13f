#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace nvd {

/// Input lies outside the regime where an approximation holds.
class OutOfRegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Inputs are individually valid but jointly inconsistent.
class InconsistentInputsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-fatal diagnostics collected by operations that warn instead of failing.
using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string message) {
  if (sink) sink->push_back(std::move(message));
}

}  // namespace nvd
