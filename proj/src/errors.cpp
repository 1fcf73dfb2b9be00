#include "rigkit/types.hpp"

namespace rigkit {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::OutOfView: return "OutOfView";
    case ErrorCode::UnknownSensor: return "UnknownSensor";
    case ErrorCode::EmptyTrajectory: return "EmptyTrajectory";
    case ErrorCode::ModeMismatch: return "ModeMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DuplicateStreamId: return "DuplicateStreamId";
    case ErrorCode::NonMonotonicTimestamp: return "NonMonotonicTimestamp";
    case ErrorCode::PayloadSizeMismatch: return "PayloadSizeMismatch";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::CorruptContainer: return "CorruptContainer";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::UnsortedInput: return "UnsortedInput";
    case ErrorCode::UnknownStream: return "UnknownStream";
    case ErrorCode::NearParallel: return "NearParallel";
    case ErrorCode::InsufficientOverlap: return "InsufficientOverlap";
    case ErrorCode::UnknownTarget: return "UnknownTarget";
    case ErrorCode::MalformedFrame: return "MalformedFrame";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "UnknownError";
}

}  // namespace rigkit
