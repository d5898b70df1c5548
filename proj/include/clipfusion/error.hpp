#pragma once

#include <stdexcept>
#include <string>

namespace clipfusion {

// Coarse failure categories. The CLI maps each one onto a process exit code.
enum class ErrorKind {
  kInvalidArgument,
  kLookup,
  kFormat,
  kTokenAlignment,
  kUndefinedMetric,
  kIngestion,
  kBackendUnavailable,
  kUsage,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define CLIPFUSION_DEFINE_ERROR(Name, Kind)                                   \
  class Name : public Error {                                                 \
   public:                                                                    \
    explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {}  \
  }

CLIPFUSION_DEFINE_ERROR(InvalidArgument, kInvalidArgument);
CLIPFUSION_DEFINE_ERROR(LookupError, kLookup);
CLIPFUSION_DEFINE_ERROR(FormatError, kFormat);
CLIPFUSION_DEFINE_ERROR(TokenAlignmentError, kTokenAlignment);
CLIPFUSION_DEFINE_ERROR(UndefinedMetric, kUndefinedMetric);
CLIPFUSION_DEFINE_ERROR(IngestionError, kIngestion);
CLIPFUSION_DEFINE_ERROR(BackendUnavailable, kBackendUnavailable);
CLIPFUSION_DEFINE_ERROR(UsageError, kUsage);

#undef CLIPFUSION_DEFINE_ERROR

}  // namespace clipfusion
