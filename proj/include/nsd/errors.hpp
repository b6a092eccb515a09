#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nsd {

/// Malformed record in a capture or config file. `location()` is a 1-based
/// line number for text formats and a byte offset for binary ones.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t location)
      : std::runtime_error(what), location_(location) {}
  std::size_t location() const noexcept { return location_; }

 private:
  std::size_t location_;
};

class FormatError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Both or neither endpoint of a packet is local.
class DirectionError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class ShapeError : public std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Training preconditions on labels (e.g. a class with no examples).
class TrainingError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Non-finite or otherwise unusable feature data.
class DataError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Model/bundle/config inconsistencies detected at load time.
class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class EmptyReportError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nsd
