#include "ridecast/error.hpp"

namespace ridecast {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedFile: return "MalformedFile";
    case ErrorCode::EmptyTrack: return "EmptyTrack";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ZeroLengthTrack: return "ZeroLengthTrack";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::NonPositiveInput: return "NonPositiveInput";
    case ErrorCode::RouteTooShort: return "RouteTooShort";
    case ErrorCode::SeriesTooShort: return "SeriesTooShort";
    case ErrorCode::NonPositiveFtp: return "NonPositiveFTP";
    case ErrorCode::DuplicateDay: return "DuplicateDay";
    case ErrorCode::UnknownZone: return "UnknownZone";
    case ErrorCode::MissingProfile: return "MissingProfile";
    case ErrorCode::MissingLoadHistory: return "MissingLoadHistory";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::SizeExceedsData: return "SizeExceedsData";
    case ErrorCode::InvalidFraction: return "InvalidFraction";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace ridecast
