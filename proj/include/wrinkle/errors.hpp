/// @file errors.hpp
/// @brief Exception hierarchy shared by all modules.
///
/// Every recoverable precondition/validation failure maps to a distinct
/// exception type so tests and the CLI can discriminate error paths.
/// Validation errors (bad input) derive from ValidationError; runtime
/// failures (I/O, lost invariants mid-computation) derive from RuntimeFault.

#pragma once

#include <stdexcept>
#include <string>

namespace wrinkle {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad input detected before any work was done (CLI exit code 2).
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Failure encountered while computing (CLI exit code 1).
class RuntimeFault : public Error {
public:
  using Error::Error;
};

#define WRINKLE_DEFINE_ERROR(NAME, BASE)                                       \
  class NAME : public BASE {                                                   \
  public:                                                                      \
    explicit NAME(const std::string& what) : BASE(std::string(#NAME ": ") +    \
                                                  what) {}                     \
  }

// geometry_core
WRINKLE_DEFINE_ERROR(DegenerateSurface, ValidationError);
WRINKLE_DEFINE_ERROR(SingularMetric, ValidationError);
WRINKLE_DEFINE_ERROR(GridMismatch, ValidationError);

// fluid_duality
WRINKLE_DEFINE_ERROR(NegativeDiscriminant, ValidationError);
WRINKLE_DEFINE_ERROR(NonpositiveDensity, ValidationError);
WRINKLE_DEFINE_ERROR(NonpositiveCurvature, ValidationError);
WRINKLE_DEFINE_ERROR(CFLViolation, ValidationError);
WRINKLE_DEFINE_ERROR(NegativeRadicand, ValidationError);

// constraint_init
WRINKLE_DEFINE_ERROR(DivisionByZeroForm, ValidationError);
WRINKLE_DEFINE_ERROR(DegenerateSymbol, ValidationError);

// developable
WRINKLE_DEFINE_ERROR(ProfileBlowup, RuntimeFault);

// nash_kuiper
WRINKLE_DEFINE_ERROR(OutsideCone, ValidationError);
WRINKLE_DEFINE_ERROR(ClosureFailure, RuntimeFault);
WRINKLE_DEFINE_ERROR(NonOrthonormalFrame, ValidationError);
WRINKLE_DEFINE_ERROR(RankCondition, ValidationError);
WRINKLE_DEFINE_ERROR(KernelWiderThanGrid, ValidationError);
WRINKLE_DEFINE_ERROR(BudgetExceeded, RuntimeFault);

// elasto
WRINKLE_DEFINE_ERROR(NonpositiveJacobian, ValidationError);

// cli_io
WRINKLE_DEFINE_ERROR(UnknownKey, ValidationError);
WRINKLE_DEFINE_ERROR(TypeMismatch, ValidationError);
WRINKLE_DEFINE_ERROR(MissingRequired, ValidationError);
WRINKLE_DEFINE_ERROR(IoError, RuntimeFault);

#undef WRINKLE_DEFINE_ERROR

}  // namespace wrinkle
