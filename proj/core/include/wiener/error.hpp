#pragma once

#include <stdexcept>
#include <string>

namespace wiener {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad configuration key, inconsistent dimensions, bad argument.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A resource cap (index count, memory) would be exceeded.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

/// A chaos operation produced mass outside the truncation box.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values appeared while integrating.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace wiener
