#pragma once

#include <stdexcept>
#include <string>

namespace mrraps {

// Malformed or unusable input data (files, columns, empty intersections).
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical routine could not produce a result (degenerate data, singular system).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mrraps
