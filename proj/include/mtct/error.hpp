#pragma once

#include <stdexcept>
#include <string>

namespace mtct {

/// Failure category. The CLI maps Io to exit code 2 and Validation to 1.
enum class ErrorCategory { Validation, Io };

class Error : public std::runtime_error {
  public:
    Error(std::string kind, const std::string &what, ErrorCategory category = ErrorCategory::Validation)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)), category_(category) {}

    const std::string &kind() const noexcept { return kind_; }
    ErrorCategory category() const noexcept { return category_; }

  private:
    std::string kind_;
    ErrorCategory category_;
};

#define MTCT_DEFINE_ERROR(Name, Category)                                                          \
    class Name : public Error {                                                                    \
      public:                                                                                      \
        explicit Name(const std::string &what) : Error(#Name, what, ErrorCategory::Category) {}    \
    };

MTCT_DEFINE_ERROR(UnreadableFile, Io)
MTCT_DEFINE_ERROR(UnwritableFile, Io)
MTCT_DEFINE_ERROR(MalformedRow, Validation)
MTCT_DEFINE_ERROR(DuplicateId, Validation)
MTCT_DEFINE_ERROR(InvalidLanguageCode, Validation)
MTCT_DEFINE_ERROR(DegenerateDirection, Validation)
MTCT_DEFINE_ERROR(MissingSlotValue, Validation)
MTCT_DEFINE_ERROR(InvalidScheme, Validation)
MTCT_DEFINE_ERROR(UnknownTarget, Validation)
MTCT_DEFINE_ERROR(EmptyCorpus, Validation)
MTCT_DEFINE_ERROR(InsufficientText, Validation)
MTCT_DEFINE_ERROR(EmptyText, Validation)
MTCT_DEFINE_ERROR(NoProfiles, Validation)
MTCT_DEFINE_ERROR(LengthMismatch, Validation)
MTCT_DEFINE_ERROR(MissingSource, Validation)
MTCT_DEFINE_ERROR(MissingReference, Validation)
MTCT_DEFINE_ERROR(UnresolvedId, Validation)
MTCT_DEFINE_ERROR(ModeMismatch, Validation)
MTCT_DEFINE_ERROR(MissingMultiparallel, Validation)
MTCT_DEFINE_ERROR(InvalidSpec, Validation)

#undef MTCT_DEFINE_ERROR

} // namespace mtct
