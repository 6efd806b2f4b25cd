#pragma once

#include <stdexcept>
#include <string>

namespace oblique {

/// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

#define OBLIQUE_ERROR(Name, Tag)                              \
  class Name : public Error {                                 \
   public:                                                    \
    using Error::Error;                                       \
    const char* kind() const noexcept override { return Tag; } \
  };

// Time outside [0, T].
OBLIQUE_ERROR(DomainError, "domain")
// Field evaluated outside its evaluation region.
OBLIQUE_ERROR(RegionError, "region")
OBLIQUE_ERROR(ParameterError, "parameter")
OBLIQUE_ERROR(PreconditionError, "precondition")
OBLIQUE_ERROR(InitialConditionError, "initial-condition")
OBLIQUE_ERROR(StiffnessError, "stiffness")
OBLIQUE_ERROR(ConvergenceError, "convergence")
OBLIQUE_ERROR(CflError, "cfl")
OBLIQUE_ERROR(BoundarySolveError, "boundary-solve")
OBLIQUE_ERROR(UnsupportedError, "unsupported")
OBLIQUE_ERROR(EmptyEnsembleError, "empty-ensemble")
OBLIQUE_ERROR(ConfigError, "config")
OBLIQUE_ERROR(IoError, "io")

#undef OBLIQUE_ERROR

}  // namespace oblique
