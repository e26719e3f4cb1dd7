#pragma once

#include <stdexcept>
#include <string>

namespace qprop {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Every bid is zero, so the allocation f(b_i) / sum_j f(b_j) is undefined.
class AllZeroBids : public Error {
 public:
  AllZeroBids() : Error("all bids are zero; allocation is undefined") {}
};

/// An iterative method did not reach its tolerance within the iteration budget.
class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

/// The endpoint signs of a root bracket were not (-, +).
class BracketFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace qprop
