#pragma once

#include <stdexcept>
#include <string>

namespace maneuver {

// Root of every typed error in the library. Catch sites that only care about
// "ours vs. not ours" catch this one.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad user-supplied configuration (CLI flags, config files, env overrides).
// The CLI maps these to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace maneuver
