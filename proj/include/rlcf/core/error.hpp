#pragma once

#include <stdexcept>
#include <string>

namespace rlcf {

// Invalid configuration value. field() names the offending key.
class ConfigError : public std::invalid_argument {
public:
  ConfigError(std::string field, const std::string &what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string &field() const noexcept { return field_; }

private:
  std::string field_;
};

class ShapeError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class StateError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

} // namespace rlcf
