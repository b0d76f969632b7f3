#pragma once

#include <stdexcept>
#include <string>

namespace caufrac {

/// Base of every error raised by the library. `kind()` is the stable,
/// machine-readable name used in CLI diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

  /// Input errors map to exit code 1, everything else to 2.
  virtual bool is_input_error() const noexcept { return true; }

 private:
  std::string kind_;
};

#define CAUFRAC_DEFINE_ERROR(Name)                                    \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  };

// scenario-core
CAUFRAC_DEFINE_ERROR(CycleError)
CAUFRAC_DEFINE_ERROR(EmptyAlphabetError)
CAUFRAC_DEFINE_ERROR(UnknownEventError)
CAUFRAC_DEFINE_ERROR(DuplicateLabelError)
CAUFRAC_DEFINE_ERROR(DomainMismatchError)
CAUFRAC_DEFINE_ERROR(SizeLimitError)
CAUFRAC_DEFINE_ERROR(NotBelowError)

// empirical-model
CAUFRAC_DEFINE_ERROR(NotLowersetError)
CAUFRAC_DEFINE_ERROR(ShapeError)
CAUFRAC_DEFINE_ERROR(NormalizationError)
CAUFRAC_DEFINE_ERROR(NegativeEntryError)
CAUFRAC_DEFINE_ERROR(ParseError)
CAUFRAC_DEFINE_ERROR(ArithmeticModeError)

// linguistics-pipeline
CAUFRAC_DEFINE_ERROR(MissingCombinationError)
CAUFRAC_DEFINE_ERROR(DegenerateError)
CAUFRAC_DEFINE_ERROR(UnresolvedPhraseError)
CAUFRAC_DEFINE_ERROR(TypeMixError)
CAUFRAC_DEFINE_ERROR(SpecShapeError)
CAUFRAC_DEFINE_ERROR(MissingMetaError)

// stats-report
CAUFRAC_DEFINE_ERROR(ConstantInputError)
CAUFRAC_DEFINE_ERROR(IOWriteError)

#undef CAUFRAC_DEFINE_ERROR

/// Solver-side failures: not caused by bad input.
class SolverError : public Error {
 public:
  using Error::Error;
  bool is_input_error() const noexcept override { return false; }
};

class InfeasibleError : public SolverError {
 public:
  explicit InfeasibleError(const std::string& message)
      : SolverError("InfeasibleError", message) {}
};

class NumericalInstabilityError : public SolverError {
 public:
  explicit NumericalInstabilityError(const std::string& message)
      : SolverError("NumericalInstabilityError", message) {}
};

}  // namespace caufrac
