#pragma once

#include <stdexcept>
#include <string>

namespace mafnet {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or extent mismatch between tensors/operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value (bad group count, oversized disparity range,
// unknown config key, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A call contract was violated (non-scalar loss, empty valid mask, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Malformed or truncated file content.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or a failed numerical check.
class NumericsError : public Error {
 public:
  using Error::Error;
};

}  // namespace mafnet
