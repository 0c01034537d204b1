#pragma once

#include <stdexcept>
#include <string>

namespace fracdamp {

/// Raised when a field or norm becomes non-finite or exceeds the blow-up
/// threshold during time stepping.
class StateBlowUp : public std::runtime_error {
 public:
  explicit StateBlowUp(const std::string& where = {})
      : std::runtime_error(where.empty() ? "state blow-up" : "state blow-up: " + where) {}
};

/// Raised by fitting routines when the data do not fit the requested model.
class FitFailed : public std::runtime_error {
 public:
  explicit FitFailed(const std::string& why) : std::runtime_error("fit failed: " + why) {}
};

inline constexpr double kBlowUpThreshold = 1e12;

}  // namespace fracdamp
