#pragma once

#include <stdexcept>
#include <string>

namespace deepstq {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Image or video geometry violates a precondition (odd YUV dimensions,
// mismatched frame sizes, patch larger than image, ...).
class GeometryError : public Error {
 public:
  using Error::Error;
};

// Raw file length does not match the declared geometry.
class FileSizeError : public Error {
 public:
  FileSizeError(const std::string& path, unsigned long long expected_multiple,
                unsigned long long actual)
      : Error("file '" + path + "' has " + std::to_string(actual) +
              " bytes, expected a nonzero multiple of " +
              std::to_string(expected_multiple) + " bytes"),
        expected_multiple_(expected_multiple),
        actual_(actual) {}

  unsigned long long expected_multiple() const noexcept { return expected_multiple_; }
  unsigned long long actual() const noexcept { return actual_; }

 private:
  unsigned long long expected_multiple_;
  unsigned long long actual_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed input data (manifest rows, cache headers, model files).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Arguments that break an operation's contract (empty inputs, wrong
// dimensions, non-finite values, bad hyperparameters).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A correlation is undefined because one input sequence is constant.
class UndefinedCorrelation : public Error {
 public:
  using Error::Error;
};

class BackendError : public Error {
 public:
  using Error::Error;
};

}  // namespace deepstq
