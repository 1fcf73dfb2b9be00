#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace rigkit {

template <class Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <class Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <class Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

using Vec2d = Vec2<double>;
using Vec3d = Vec3<double>;
using Mat3d = Mat3<double>;
using Vec2f = Vec2<float>;
using Vec3f = Vec3<float>;

/// Time as an unsigned count of 100-nanosecond ticks from the recording
/// epoch. All streams in one recording share the epoch.
struct Timestamp {
  std::uint64_t ticks = 0;

  static constexpr std::uint64_t kTicksPerSecond = 10'000'000ull;

  static Timestamp from_seconds(double s) {
    return Timestamp{static_cast<std::uint64_t>(s * kTicksPerSecond + 0.5)};
  }
  double seconds() const { return static_cast<double>(ticks) / kTicksPerSecond; }

  friend bool operator==(Timestamp a, Timestamp b) { return a.ticks == b.ticks; }
  friend bool operator!=(Timestamp a, Timestamp b) { return a.ticks != b.ticks; }
  friend bool operator<(Timestamp a, Timestamp b) { return a.ticks < b.ticks; }
  friend bool operator<=(Timestamp a, Timestamp b) { return a.ticks <= b.ticks; }
  friend bool operator>(Timestamp a, Timestamp b) { return a.ticks > b.ticks; }
  friend bool operator>=(Timestamp a, Timestamp b) { return a.ticks >= b.ticks; }
};

/// Signed tick difference, b relative to a.
inline std::int64_t ticks_between(Timestamp a, Timestamp b) {
  return static_cast<std::int64_t>(b.ticks) - static_cast<std::int64_t>(a.ticks);
}

enum class ErrorCode {
  OutOfBounds,
  BehindCamera,
  OutOfView,
  UnknownSensor,
  EmptyTrajectory,
  ModeMismatch,
  DimensionMismatch,
  DomainError,
  IoError,
  DuplicateStreamId,
  NonMonotonicTimestamp,
  PayloadSizeMismatch,
  BadMagic,
  UnsupportedVersion,
  CorruptContainer,
  IndexOutOfRange,
  UnsortedInput,
  UnknownStream,
  NearParallel,
  InsufficientOverlap,
  UnknownTarget,
  MalformedFrame,
  InvalidArgument,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace rigkit
