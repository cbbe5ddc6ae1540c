#pragma once

#include <stdexcept>
#include <string>

namespace freqadapt {

// Base for every error the library raises. The CLI maps each subclass to a
// stable exit code (see tools/freqadapt.cpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible dimensions between operands.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A parameter outside its documented domain (even kernel size, alpha <= 0...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// The inverse transform produced a non-negligible imaginary part.
class SymmetryError : public Error {
 public:
  using Error::Error;
};

// Amplitude normalization over a group whose spread is numerically zero.
class DegenerateSpectrum : public Error {
 public:
  using Error::Error;
};

// Malformed file contents or I/O failure.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace freqadapt
