#pragma once

#include <stdexcept>
#include <string>

namespace tlstm {

// Violated precondition or malformed input. Maps to CLI exit code 3.
class ContractError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not conform.
class DimensionError : public ContractError {
 public:
  using ContractError::ContractError;
};

// Non-finite value produced or consumed. Maps to CLI exit code 4.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tlstm
