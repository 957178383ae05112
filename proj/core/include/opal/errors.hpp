#pragma once

#include <stdexcept>
#include <string>

namespace opal {

// Bad user input (malformed file, dimension mismatch, invalid graph data).
struct invalid_input : std::runtime_error {
  explicit invalid_input(const std::string& what) : std::runtime_error(what) {}
};

// A requested computation does not fit in the declared arity/weight/degree caps.
struct cap_exceeded : std::runtime_error {
  explicit cap_exceeded(const std::string& what) : std::runtime_error(what) {}
};

// An internal invariant failed; indicates a bug, not a user error.
struct internal_error : std::logic_error {
  explicit internal_error(const std::string& what) : std::logic_error(what) {}
};

}  // namespace opal
