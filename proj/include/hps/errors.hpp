#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hps {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user input: bad configuration, unknown names, violated
// preconditions on sizes or modes.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// No acceptable pivot was found at elimination step `step`.
class SingularMatrixError : public NumericError {
 public:
  SingularMatrixError(const std::string& what, std::size_t step)
      : NumericError(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class StructuralSingularityError : public NumericError {
 public:
  using NumericError::NumericError;
};

// The interior block of one leaf could not be factorized, typically because
// the operator has an interior resonance on that box.
class SingularLeafError : public NumericError {
 public:
  SingularLeafError(const std::string& what, std::size_t leaf)
      : NumericError(what), leaf_(leaf) {}
  std::size_t leaf() const noexcept { return leaf_; }

 private:
  std::size_t leaf_;
};

}  // namespace hps
