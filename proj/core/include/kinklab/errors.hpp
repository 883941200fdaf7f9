#pragma once

#include <stdexcept>
#include <string>

namespace kinklab {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A Fourier zero mode was present where the operation requires a mean-zero input.
class ZeroModeError : public Error {
public:
  using Error::Error;
};

/// A field does not reach its prescribed limits inside the representation window.
class TailMismatch : public Error {
public:
  using Error::Error;
};

/// A sequence sum does not vanish (or match its target) within tolerance.
class SumMismatch : public Error {
public:
  using Error::Error;
};

/// A time integrator produced non-finite or exploding values.
class StepInstability : public Error {
public:
  using Error::Error;
};

/// Signals reached the edge of a finite lattice window.
class BoundaryContaminated : public Error {
public:
  using Error::Error;
};

/// Doubling the Duhamel quadrature density changed the result beyond tolerance.
class QuadratureUnresolved : public Error {
public:
  using Error::Error;
};

class DegenerateFit : public Error {
public:
  using Error::Error;
};

class FitUnstable : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace kinklab
