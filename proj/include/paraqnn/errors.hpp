#pragma once

#include <stdexcept>
#include <string>

namespace paraqnn {

/// Bad arguments or violated preconditions at an API boundary.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed, truncated, or inconsistent persisted data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite loss or gradient during optimization.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Internal misuse, e.g. a backward pass against a stale forward cache.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace paraqnn
