#pragma once

#include <stdexcept>
#include <string>

namespace contact_hybrid {

class ContactError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CONTACT_HYBRID_ERROR(Name)                        \
  class Name : public ContactError {                      \
   public:                                                \
    explicit Name(const std::string& what)                \
        : ContactError(std::string(#Name ": ") + what) {} \
  }

CONTACT_HYBRID_ERROR(SingularBlockMatrix);
CONTACT_HYBRID_ERROR(RankDeficientConstraints);
CONTACT_HYBRID_ERROR(DegenerateExtension);
CONTACT_HYBRID_ERROR(InternalInconsistency);
CONTACT_HYBRID_ERROR(DerivativeUnavailable);
CONTACT_HYBRID_ERROR(Inconclusive);
CONTACT_HYBRID_ERROR(DomainViolation);
CONTACT_HYBRID_ERROR(NotApplicable);
CONTACT_HYBRID_ERROR(NoSolution);
CONTACT_HYBRID_ERROR(EventLocalizationFailure);
CONTACT_HYBRID_ERROR(ProjectionRejected);
CONTACT_HYBRID_ERROR(ValidationError);

#undef CONTACT_HYBRID_ERROR

}  // namespace contact_hybrid
