#pragma once

#include <stdexcept>
#include <string>

namespace plotdigit {

/// Base of every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define PLOTDIGIT_ERROR(Name)            \
  struct Name : Error {                  \
    using Error::Error;                  \
  }

PLOTDIGIT_ERROR(DecodeFailure);
PLOTDIGIT_ERROR(EncodeFailure);
PLOTDIGIT_ERROR(DimensionMismatch);
PLOTDIGIT_ERROR(InvalidScene);
PLOTDIGIT_ERROR(NoAxesFound);
PLOTDIGIT_ERROR(InsufficientTicks);
PLOTDIGIT_ERROR(NonMonotonic);
PLOTDIGIT_ERROR(ParseFailure);
PLOTDIGIT_ERROR(RecognizerUnavailable);
PLOTDIGIT_ERROR(EmptyMask);
PLOTDIGIT_ERROR(NoValidColumn);
PLOTDIGIT_ERROR(InsufficientOverlap);
PLOTDIGIT_ERROR(LengthMismatch);
PLOTDIGIT_ERROR(SchemaError);

#undef PLOTDIGIT_ERROR

}  // namespace plotdigit
