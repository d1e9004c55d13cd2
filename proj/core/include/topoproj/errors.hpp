#pragma once

#include <stdexcept>
#include <string>

namespace topoproj {

// Base for every error raised by the library. Callers that only need to
// isolate failures (study runners, the CLI) catch this type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class InvalidTopology : public Error {
 public:
  using Error::Error;
};

class InvalidNode : public Error {
 public:
  using Error::Error;
};

class InvalidEdge : public Error {
 public:
  using Error::Error;
};

class InvalidConstraint : public Error {
 public:
  using Error::Error;
};

class InvalidDimension : public Error {
 public:
  using Error::Error;
};

class InfeasibleInit : public Error {
 public:
  using Error::Error;
};

}  // namespace topoproj
