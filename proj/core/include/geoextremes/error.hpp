#pragma once

#include <stdexcept>
#include <string>

namespace geoextremes {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

class DegenerateSimplex : public Error {
 public:
  using Error::Error;
};

class OriginNotInterior : public Error {
 public:
  using Error::Error;
};

class InsufficientPoints : public Error {
 public:
  using Error::Error;
};

/// A cell could not be certified inside the sampled region. Usually means the buffer is too small.
class UnboundedCell : public Error {
 public:
  using Error::Error;
};

/// A density exceeded the declared upper bound used for thinning.
class EnvelopeViolation : public Error {
 public:
  using Error::Error;
};

/// Too few samples for the requested estimate.
class InsufficientSample : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The requested workload or its output cannot be accommodated.
class ResourceError : public Error {
 public:
  using Error::Error;
};

}  // namespace geoextremes
