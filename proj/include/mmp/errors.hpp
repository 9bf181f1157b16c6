#pragma once

#include <stdexcept>
#include <string>

namespace mmp {

/// Input that violates a documented precondition or file schema. The CLI maps
/// this to exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An engine operation that cannot proceed on valid input (singular system,
/// uncontractible ray, exhausted step budget). The CLI maps this to exit code 3.
class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mmp
