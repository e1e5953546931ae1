#pragma once

#include <stdexcept>
#include <string>

namespace anosov {

// Every failure the library reports carries a short machine-readable kind
// (the class name) next to the human message.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

#define ANOSOV_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(#Name, what) {}  \
  };

ANOSOV_DEFINE_ERROR(NotHyperbolic)
ANOSOV_DEFINE_ERROR(ComplexSpectrum)
ANOSOV_DEFINE_ERROR(Invertible)
ANOSOV_DEFINE_ERROR(Reducible)
ANOSOV_DEFINE_ERROR(SingularMatrix)
ANOSOV_DEFINE_ERROR(NewtonDivergence)
ANOSOV_DEFINE_ERROR(NotAnosov)
ANOSOV_DEFINE_ERROR(GridTooCoarse)
ANOSOV_DEFINE_ERROR(ChainTooShort)
ANOSOV_DEFINE_ERROR(DegenerateSpectrum)
ANOSOV_DEFINE_ERROR(BudgetExceeded)
ANOSOV_DEFINE_ERROR(ChainNotLiftRealizable)
ANOSOV_DEFINE_ERROR(NoConvergence)
ANOSOV_DEFINE_ERROR(PeriodMismatch)
ANOSOV_DEFINE_ERROR(NotOnLeaf)
ANOSOV_DEFINE_ERROR(EmptyMatching)
ANOSOV_DEFINE_ERROR(ObstructionNonzero)
ANOSOV_DEFINE_ERROR(OrbitNotDense)
ANOSOV_DEFINE_ERROR(SpecialMap)
ANOSOV_DEFINE_ERROR(SearchExhausted)
ANOSOV_DEFINE_ERROR(NotConjugatePair)
ANOSOV_DEFINE_ERROR(HomotopyMismatch)
ANOSOV_DEFINE_ERROR(CertificationFailure)
ANOSOV_DEFINE_ERROR(TopologicalPrerequisiteFailed)
ANOSOV_DEFINE_ERROR(SchemaError)

#undef ANOSOV_DEFINE_ERROR

}  // namespace anosov
