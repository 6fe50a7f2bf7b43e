#pragma once

#include <stdexcept>
#include <string>

namespace so5lab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration or coupling set that violates a documented invariant.
class InvalidConfig : public Error {
 public:
  using Error::Error;
};

/// A statistics-angle matrix that violates the diagonal or antisymmetry condition,
/// or fails the admissibility constraints where those are required.
class InvalidTheta : public Error {
 public:
  using Error::Error;
};

/// The requested space exceeds the configured dimension cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Coincident positions of different flavors leave the sign function undetermined.
class AmbiguousSign : public Error {
 public:
  using Error::Error;
};

class NotHermitian : public Error {
 public:
  using Error::Error;
};

}  // namespace so5lab
