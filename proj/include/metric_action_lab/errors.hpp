#pragma once

#include <stdexcept>
#include <string>

namespace mal {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point was used with a space of a different kind or shape.
class TagError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the admissible range (t outside [0,1], tau too large, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration: bad sample counts, unknown catalogue names, malformed files.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A theorem hypothesis or operation precondition does not hold for the given data.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Curve pieces do not join up.
class ConcatenationError : public Error {
 public:
  ConcatenationError(std::size_t junction, const std::string& what)
      : Error("junction " + std::to_string(junction) + ": " + what), junction_(junction) {}

  std::size_t junction() const noexcept { return junction_; }

 private:
  std::size_t junction_;
};

/// No admissible endpoint-repair time was found on the flow grid.
class ScheduleError : public Error {
 public:
  using Error::Error;
};

}  // namespace mal
