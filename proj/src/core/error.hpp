#pragma once

#include <stdexcept>
#include <string>

namespace shgq {

enum class ErrorCode {
  InvalidParameter = 1,
  Numeric,
  PositivityViolation,
  NearDegeneracy,
  ThresholdDivergence,
  NoBracket,
  AmbiguousBracket,
  ShapeMismatch,
  InsufficientSamples,
  ZeroVariance,
  Io,
  Unsupported,
  SinkFailure,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised when the SH field leaves the disc |A2| < 2 where the Q-function
// Fokker-Planck equation has positive diffusion.
class PositivityError : public Error {
 public:
  PositivityError(std::size_t index, double magnitude, double time);

  std::size_t index() const noexcept { return index_; }
  double magnitude() const noexcept { return magnitude_; }
  double time() const noexcept { return time_; }

 private:
  std::size_t index_;
  double magnitude_;
  double time_;
};

}  // namespace shgq
