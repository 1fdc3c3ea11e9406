#pragma once

#include <stdexcept>
#include <string>

namespace mlab {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point does not belong to the domain of a kernel, or an index is out of range.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid argument or violated precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An iterative solver did not reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Round-off beyond what the algorithm tolerates (e.g. a markedly negative MMD^2).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// Requested work exceeds a hard budget (e.g. policy enumeration).
class BudgetError : public Error {
 public:
  using Error::Error;
};

}  // namespace mlab
