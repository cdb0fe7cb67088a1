#pragma once

#include <stdexcept>
#include <string>

namespace charwave {

// Exit-code categories used by the CLI: 2 = invalid input, 3 = refused
// (ill-posed problem), 4 = iteration did not converge.
enum class ErrorCategory { invalid_input = 2, refused = 3, no_convergence = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory cat, const std::string& what) : std::runtime_error(what), cat_(cat) {}
  ErrorCategory category() const { return cat_; }

 private:
  ErrorCategory cat_;
};

#define CHARWAVE_DEFINE_ERROR(Name, Cat)                                 \
  class Name : public Error {                                            \
   public:                                                               \
    explicit Name(const std::string& what) : Error(Cat, #Name ": " + what) {} \
  }

CHARWAVE_DEFINE_ERROR(ConfigInvalid, ErrorCategory::invalid_input);
CHARWAVE_DEFINE_ERROR(RejectedA1, ErrorCategory::invalid_input);
CHARWAVE_DEFINE_ERROR(RejectedA2, ErrorCategory::invalid_input);
CHARWAVE_DEFINE_ERROR(OutOfRange, ErrorCategory::invalid_input);
CHARWAVE_DEFINE_ERROR(NotAHomeomorphism, ErrorCategory::invalid_input);
CHARWAVE_DEFINE_ERROR(QuadratureFailure, ErrorCategory::no_convergence);
CHARWAVE_DEFINE_ERROR(MisalignedGrid, ErrorCategory::invalid_input);
CHARWAVE_DEFINE_ERROR(ContractionViolated, ErrorCategory::invalid_input);
CHARWAVE_DEFINE_ERROR(NoConvergence, ErrorCategory::no_convergence);
CHARWAVE_DEFINE_ERROR(IncompatibleTrace, ErrorCategory::invalid_input);
CHARWAVE_DEFINE_ERROR(IncompatibleData, ErrorCategory::invalid_input);
CHARWAVE_DEFINE_ERROR(DecreasingNonlinearity, ErrorCategory::refused);
CHARWAVE_DEFINE_ERROR(EvenHarmonic, ErrorCategory::invalid_input);
CHARWAVE_DEFINE_ERROR(DegenerateFloquet, ErrorCategory::no_convergence);
CHARWAVE_DEFINE_ERROR(ResonanceViolated, ErrorCategory::invalid_input);
CHARWAVE_DEFINE_ERROR(NewtonDiverged, ErrorCategory::no_convergence);
CHARWAVE_DEFINE_ERROR(TrivialSolution, ErrorCategory::no_convergence);

#undef CHARWAVE_DEFINE_ERROR

}  // namespace charwave
