#pragma once

#include <stdexcept>
#include <string>

namespace fieldcast {

// Bad run description: malformed JSON, missing keys, out-of-range values,
// unreadable paths. Maps to CLI exit code 2.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure at runtime: simulator blow-up, non-finite loss or
// gradient. Maps to CLI exit code 3.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Structural misuse of an in-memory operation (shape or length mismatch).
class shape_error : public std::invalid_argument {
 public:
  explicit shape_error(const std::string& what) : std::invalid_argument(what) {}
};

// Metric has no defined value for this frame (zero signal, constant map).
class metric_undefined : public std::domain_error {
 public:
  explicit metric_undefined(const std::string& what) : std::domain_error(what) {}
};

}  // namespace fieldcast
