#pragma once

#include <stdexcept>
#include <string>

namespace mgadn {

// Incompatible tensor shapes or mismatched dimensions between components.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A forward computation produced NaN or Inf.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files or datasets (CSV, checkpoints, score files).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration values outside their documented domain.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mgadn
