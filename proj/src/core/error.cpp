#include "error.hpp"

#include <sstream>

namespace shgq {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidParameter: return "invalid-parameter";
    case ErrorCode::Numeric: return "numeric";
    case ErrorCode::PositivityViolation: return "positivity-violation";
    case ErrorCode::NearDegeneracy: return "near-degeneracy";
    case ErrorCode::ThresholdDivergence: return "at-threshold-divergence";
    case ErrorCode::NoBracket: return "no-bracket";
    case ErrorCode::AmbiguousBracket: return "ambiguous-bracket";
    case ErrorCode::ShapeMismatch: return "shape-mismatch";
    case ErrorCode::InsufficientSamples: return "insufficient-samples";
    case ErrorCode::ZeroVariance: return "zero-variance";
    case ErrorCode::Io: return "io";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::SinkFailure: return "sink-failure";
  }
  return "unknown";
}

namespace {
std::string positivity_message(std::size_t index, double magnitude, double time) {
  std::ostringstream os;
  os << "Q-representation positivity violated: |A2| = " << magnitude
     << " >= 2 at grid point " << index << ", t = " << time;
  return os.str();
}
}  // namespace

PositivityError::PositivityError(std::size_t index, double magnitude, double time)
    : Error(ErrorCode::PositivityViolation, positivity_message(index, magnitude, time)),
      index_(index),
      magnitude_(magnitude),
      time_(time) {}

}  // namespace shgq
