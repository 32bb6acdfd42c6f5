#pragma once

#include <stdexcept>
#include <string>

namespace sis {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input shape, unknown preset, malformed config or file.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Two objects built on different layouts were combined.
class LayoutError : public InputError {
 public:
  using InputError::InputError;
};

/// The operation is not defined for this group preset.
class UnsupportedError : public InputError {
 public:
  using InputError::InputError;
};

/// The mathematics degenerates: rank-deficient Riesz system, empty model, ...
class DegenerateError : public Error {
 public:
  using Error::Error;
};

}  // namespace sis
