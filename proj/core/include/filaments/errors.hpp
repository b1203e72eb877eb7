#pragma once

#include <stdexcept>
#include <string>

namespace filaments {

// Raised on invalid configuration or malformed input data. CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a state turns non-finite. Carries a location string such as
// "t=0.125 filament=2 sample=17". CLI exit code 2.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when the Picard window underflows below one time step without
// reaching contraction. CLI exit code 3.
class ContractionError : public std::runtime_error {
 public:
  explicit ContractionError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace filaments
