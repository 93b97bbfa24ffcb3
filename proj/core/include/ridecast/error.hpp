#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ridecast {

enum class ErrorCode {
  MalformedFile,
  EmptyTrack,
  InsufficientData,
  ZeroLengthTrack,
  EmptySeries,
  NonPositiveInput,
  RouteTooShort,
  SeriesTooShort,
  NonPositiveFtp,
  DuplicateDay,
  UnknownZone,
  MissingProfile,
  MissingLoadHistory,
  IoError,
  SchemaMismatch,
  TooFewRows,
  SingularSystem,
  ZeroVariance,
  SizeExceedsData,
  InvalidFraction,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so
// callers (the CLI in particular) can map it to a stable exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ridecast
