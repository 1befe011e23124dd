#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace crowdpose {

/// Base class for every domain error raised by the toolkit. The CLI maps
/// these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t byte_offset)
      : Error(what + " (at byte " + std::to_string(byte_offset) + ")"),
        byte_offset_(byte_offset) {}

  std::size_t byte_offset() const noexcept { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

#define CROWDPOSE_DEFINE_ERROR(Name) \
  class Name : public Error {        \
   public:                           \
    using Error::Error;              \
  }

CROWDPOSE_DEFINE_ERROR(SchemaMismatchError);
CROWDPOSE_DEFINE_ERROR(MappingError);
CROWDPOSE_DEFINE_ERROR(GeometryError);
CROWDPOSE_DEFINE_ERROR(DecodeError);
CROWDPOSE_DEFINE_ERROR(EmptyCutoutError);
CROWDPOSE_DEFINE_ERROR(InventoryError);
CROWDPOSE_DEFINE_ERROR(UndefinedInputError);
CROWDPOSE_DEFINE_ERROR(DimensionError);
CROWDPOSE_DEFINE_ERROR(NonDifferentiableError);
CROWDPOSE_DEFINE_ERROR(DivergenceError);
CROWDPOSE_DEFINE_ERROR(PreconditionError);
CROWDPOSE_DEFINE_ERROR(ProtocolError);
CROWDPOSE_DEFINE_ERROR(AlignmentError);
CROWDPOSE_DEFINE_ERROR(UndefinedSimilarityError);
CROWDPOSE_DEFINE_ERROR(UndefinedApError);
CROWDPOSE_DEFINE_ERROR(ConfigError);
CROWDPOSE_DEFINE_ERROR(TargetingError);
CROWDPOSE_DEFINE_ERROR(IoError);

#undef CROWDPOSE_DEFINE_ERROR

}  // namespace crowdpose
