#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace complab {

// Failure modes of the numeric pipelines. Each maps to a stable name so that
// reports and the CLI can surface them without string matching.
enum class ErrorCode {
  IdenticallyZero,
  OrderTooHigh,
  ZerosTooClose,
  NotRegularSingular,
  RecurrenceBreakdown,
  ShapeMismatch,
  DivisionAtZero,
  NoBlowupDetected,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::IdenticallyZero: return "IdenticallyZero";
    case ErrorCode::OrderTooHigh: return "OrderTooHigh";
    case ErrorCode::ZerosTooClose: return "ZerosTooClose";
    case ErrorCode::NotRegularSingular: return "NotRegularSingular";
    case ErrorCode::RecurrenceBreakdown: return "RecurrenceBreakdown";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DivisionAtZero: return "DivisionAtZero";
    case ErrorCode::NoBlowupDetected: return "NoBlowupDetected";
  }
  return "Unknown";
}

class NumericError : public std::runtime_error {
 public:
  NumericError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace complab
