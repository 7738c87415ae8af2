#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace rfsum {

// All library errors carry a stable category name so the CLI can emit
// one-line machine-parseable diagnostics ("error: <category>: <detail>").
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& detail)
      : std::runtime_error(detail), category_(std::move(category)) {}
  const std::string& category() const { return category_; }

 private:
  std::string category_;
};

#define RFSUM_DEFINE_ERROR(NAME)                                 \
  struct NAME : Error {                                          \
    explicit NAME(const std::string& detail = "")                \
        : Error(#NAME, detail) {}                                \
  }

RFSUM_DEFINE_ERROR(ShapeMismatch);
RFSUM_DEFINE_ERROR(NotScalar);
RFSUM_DEFINE_ERROR(NonFiniteValue);
RFSUM_DEFINE_ERROR(MissingSection);
RFSUM_DEFINE_ERROR(AmbiguousSections);
RFSUM_DEFINE_ERROR(EmptyCorpus);
RFSUM_DEFINE_ERROR(UnknownBodyPart);
RFSUM_DEFINE_ERROR(IdOutOfRange);
RFSUM_DEFINE_ERROR(MalformedLine);
RFSUM_DEFINE_ERROR(DimensionMismatch);
RFSUM_DEFINE_ERROR(EmptySequence);
RFSUM_DEFINE_ERROR(EmptyStates);
RFSUM_DEFINE_ERROR(LengthMismatch);
RFSUM_DEFINE_ERROR(EmptySplit);
RFSUM_DEFINE_ERROR(EmptyList);
RFSUM_DEFINE_ERROR(EmptyInput);
RFSUM_DEFINE_ERROR(EmptyFindings);
RFSUM_DEFINE_ERROR(IoError);
RFSUM_DEFINE_ERROR(MalformedRecord);
RFSUM_DEFINE_ERROR(VocabMismatch);
RFSUM_DEFINE_ERROR(UnknownMethod);
RFSUM_DEFINE_ERROR(FormatError);
RFSUM_DEFINE_ERROR(InvalidArgument);

#undef RFSUM_DEFINE_ERROR

}  // namespace rfsum
