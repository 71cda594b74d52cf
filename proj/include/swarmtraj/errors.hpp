#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace swarmtraj {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite or otherwise out-of-domain argument.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what, std::size_t index = npos)
      : Error(what), index_(index) {}

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  /// Offending element for batched calls, npos otherwise.
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Dimension mismatch between matrices, vectors, or network shapes.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Caller broke a documented precondition (bad lengths, empty inputs, bad config).
class UsageError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public UsageError {
 public:
  using UsageError::UsageError;
};

/// Numerical breakdown during training. Carries the damping factor and epoch
/// at which it happened (negative when not applicable).
class NumericError : public Error {
 public:
  NumericError(const std::string& what, double lambda, long epoch = -1)
      : Error(what), lambda_(lambda), epoch_(epoch) {}

  double lambda() const noexcept { return lambda_; }
  long epoch() const noexcept { return epoch_; }

 private:
  double lambda_;
  long epoch_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace swarmtraj
