#pragma once

#include <stdexcept>
#include <string>

namespace psg {

/// Input that violates a documented precondition (malformed election,
/// invalid profile, rule not applicable to the election).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An enumeration guard refused to run. `parameter()` names the limit hit.
class CapExceeded : public std::runtime_error {
 public:
  CapExceeded(std::string parameter, const std::string& what)
      : std::runtime_error(what), parameter_(std::move(parameter)) {}

  const std::string& parameter() const noexcept { return parameter_; }

 private:
  std::string parameter_;
};

}  // namespace psg
