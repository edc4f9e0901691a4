#pragma once

#include <stdexcept>
#include <string>

namespace sarsim {

/// Raised when an operation receives arguments outside its domain.
class ParameterError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A recursion or integration pass produced a non-finite or runaway value.
class DivergenceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Generation could not produce an acceptable batch (retry cap, factorization).
class GenerationError : public std::runtime_error {
  public:
    GenerationError(const std::string& what, std::string detail = {})
        : std::runtime_error(what), detail_(std::move(detail)) {}

    /// Serialized context of the failing attempt (e.g. the last recipe as JSON).
    const std::string& detail() const noexcept { return detail_; }

  private:
    std::string detail_;
};

/// Reading or writing an artifact failed, or its content is malformed.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

}  // namespace sarsim
