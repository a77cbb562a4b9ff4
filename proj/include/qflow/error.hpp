#pragma once

#include <stdexcept>
#include <string>

namespace qflow {

// Base for every failure the library reports by exception.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or out-of-range input (documents, parameters, identifiers).
class InputError : public Error {
 public:
  using Error::Error;
};

// A model that is well-formed but has no usable optimum or schedule.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Solver or extraction breakdown caused by floating-point trouble.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Path enumeration exceeded its configured cap.
class EnumerationCapError : public Error {
 public:
  using Error::Error;
};

}  // namespace qflow
