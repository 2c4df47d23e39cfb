#pragma once

#include <stdexcept>
#include <string>

namespace hexit {

class InvalidMove : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a component is asked to do something its configuration cannot
// support (e.g. neural search without a network attached).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or incompatible on-disk artifact.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hexit
