#pragma once

#include <stdexcept>
#include <string>

namespace rssloc {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or malformed input (bad config, length mismatch, parse failure).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A point coincides with an anchor where a distance logarithm is required.
class SingularGeometryError : public Error {
 public:
  using Error::Error;
};

/// Rank-deficient geometry (collinear anchors, singular Fisher matrix).
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

/// The information bound does not exist (zero noise).
class UndefinedBoundError : public Error {
 public:
  using Error::Error;
};

class EmptyAggregateError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace rssloc
