#pragma once

#include <stdexcept>
#include <string>

namespace pirlab {

// Base of every error raised by the library. The CLI maps these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PIRLAB_DECLARE_ERROR(Name)      \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  }

PIRLAB_DECLARE_ERROR(ParameterError);
PIRLAB_DECLARE_ERROR(FieldMismatchError);
PIRLAB_DECLARE_ERROR(FieldTooSmallError);
PIRLAB_DECLARE_ERROR(SingularMatrixError);
PIRLAB_DECLARE_ERROR(ArityError);
PIRLAB_DECLARE_ERROR(ShapeError);
PIRLAB_DECLARE_ERROR(NotMDSError);
PIRLAB_DECLARE_ERROR(DecodeError);
PIRLAB_DECLARE_ERROR(UnsupportedRegimeError);
PIRLAB_DECLARE_ERROR(NotDegenerateError);

#undef PIRLAB_DECLARE_ERROR

}  // namespace pirlab
