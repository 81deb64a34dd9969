#pragma once

#include <stdexcept>
#include <string>

namespace sense {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A numeric quantity is undefined for the given parameters (singular system,
// vanishing denominator, beta out of range for an infinite sum).
class DegenerateComputation : public Error {
 public:
  using Error::Error;
};

// No channel's PMF stochastically dominates all the others.
class IncomparableBeliefs : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

// A claim was requested outside the parameter range where it is established.
class ScopeError : public Error {
 public:
  using Error::Error;
};

// Malformed input document; the message starts with the offending field path.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace sense
