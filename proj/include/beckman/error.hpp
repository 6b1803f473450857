#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace beckman {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input data (shapes, masses, value ranges).
class InputError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// An iterative method failed to reach its tolerance within its budget.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// An iterate became non-finite.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t iteration)
      : Error(what), iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace beckman
