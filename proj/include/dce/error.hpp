#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dce {

/// A parameter outside its admissible domain (|rho| > 1, k = 0, bad constants...).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A size guard tripped (joint table too large, 2^k too many samples...).
class GuardError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// A scheme failed inside a Monte Carlo run; carries the trial that raised it.
class TrialError : public std::runtime_error {
 public:
  TrialError(std::size_t trial, const std::string& what)
      : std::runtime_error("trial " + std::to_string(trial) + ": " + what), trial_(trial) {}

  std::size_t trial() const noexcept { return trial_; }

 private:
  std::size_t trial_;
};

inline void require(bool ok, const std::string& message) {
  if (!ok) throw ParameterError(message);
}

}  // namespace dce
