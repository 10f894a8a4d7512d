#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace monoext {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MONOEXT_ERROR(Name)                                  \
  class Name : public Error {                                \
   public:                                                   \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
  }

MONOEXT_ERROR(InvalidArgument);
MONOEXT_ERROR(NotMonotone);
MONOEXT_ERROR(SupportMismatch);
MONOEXT_ERROR(DimsUnequal);
MONOEXT_ERROR(LengthMismatch);
MONOEXT_ERROR(NotRationalizable);
MONOEXT_ERROR(NoConvergence);
MONOEXT_ERROR(InfeasiblePoint);
MONOEXT_ERROR(StructureViolation);
MONOEXT_ERROR(NotMarkupPooling);
MONOEXT_ERROR(NotRectangle);
MONOEXT_ERROR(NotDeterministic);
MONOEXT_ERROR(TheoremViolation);
MONOEXT_ERROR(TooLarge);
MONOEXT_ERROR(Infeasible);
MONOEXT_ERROR(DegenerateConditional);

#undef MONOEXT_ERROR

// Raised when a candidate pair fails the two-step square structure; carries the
// first grid index where the structure breaks.
class NotOfForm : public Error {
 public:
  NotOfForm(const std::string& what, std::size_t index)
      : Error("NotOfForm: " + what + " (index " + std::to_string(index) + ")"), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

}  // namespace monoext
