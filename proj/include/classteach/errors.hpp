#pragma once

#include <stdexcept>
#include <string>

namespace classteach {

// All domain errors derive from TeachingError so callers can distinguish
// simulation failures from spec-file parse failures.
struct TeachingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidInput : TeachingError {
  using TeachingError::TeachingError;
};

// Scatter matrix numerically zero while the caller still expects a direction.
struct DegenerateMatrix : TeachingError {
  using TeachingError::TeachingError;
};

// Learner already at the target; no synthesis direction exists.
struct DegenerateLearner : TeachingError {
  using TeachingError::TeachingError;
};

// Every learner at the target; dynamic step-size undefined.
struct DegenerateClassroom : TeachingError {
  using TeachingError::TeachingError;
};

// Learning-rate spread too wide for the dynamic step size; split the class.
struct PartitionRequired : TeachingError {
  using TeachingError::TeachingError;
};

// Rate-history-dependent quantity requested before any rates were observed.
struct InsufficientHistory : TeachingError {
  using TeachingError::TeachingError;
};

struct SpecParseError : std::runtime_error {
  SpecParseError(const std::string& msg, int line)
      : std::runtime_error("spec parse error (line " + std::to_string(line) +
                           "): " + msg),
        line_number(line) {}
  int line_number;
};

}  // namespace classteach
