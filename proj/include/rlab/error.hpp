#pragma once

#include <stdexcept>
#include <string>

namespace rlab {

/// A parameter lies outside the domain where an operation is defined.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed (NaN, divergence, singular system, bad eigen-residual).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool condition, const std::string& message) {
  if (!condition) throw DomainError(message);
}
}  // namespace detail

}  // namespace rlab
