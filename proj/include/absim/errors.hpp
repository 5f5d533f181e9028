#pragma once

#include <stdexcept>
#include <string>

namespace absim {

/// Bad shapes, broken preconditions, malformed configs. Maps to CLI exit 3.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A computation that cannot proceed (zero support, failed convergence,
/// lost precision). Maps to CLI exit 4.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace absim
