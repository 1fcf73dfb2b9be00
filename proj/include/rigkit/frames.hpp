#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rigkit/types.hpp"

namespace rigkit {

enum class DepthMode : std::uint8_t { LongThrow = 0, Ahat = 1 };

// Canonical stream shapes.
inline constexpr int kLongThrowWidth = 320;
inline constexpr int kLongThrowHeight = 288;
inline constexpr int kAhatWidth = 512;
inline constexpr int kAhatHeight = 512;
inline constexpr int kVlcWidth = 640;
inline constexpr int kVlcHeight = 480;

/// AHAT range wraps every meter; values are stored in millimeters, so the
/// coded range is [0, 999] with 0xFFFF as the embedded invalid code.
/// Codes in [1000, 0xFFFE] are malformed and rejected at container load.
inline constexpr std::uint16_t kAhatMaxMm = 999;
inline constexpr std::uint16_t kAhatInvalidCode = 0xFFFF;
inline constexpr double kAhatWrapMeters = 1.0;

/// Long Throw depth in millimeters; anything past 7.5 m is implausible and
/// flags a malformed frame. 0 marks invalidated pixels.
inline constexpr std::uint16_t kLongThrowMaxMm = 7500;

/// Most significant sigma bit invalidates the paired Long Throw pixel; the
/// low seven bits are carried opaquely.
inline constexpr std::uint8_t kSigmaInvalidMask = 0x80;

/// 16-bit depth image, millimeters per pixel. Canonical captures are
/// 320x288 (LongThrow) or 512x512 (Ahat); the container layer enforces
/// those shapes, the in-memory type only requires a consistent buffer.
struct DepthFrame {
  DepthMode mode = DepthMode::LongThrow;
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> buffer;
  Timestamp timestamp;
  double exposure = 0.0;
  double gain = 0.0;

  DepthFrame() = default;
  DepthFrame(DepthMode mode, int width, int height, std::vector<std::uint16_t> buffer,
             Timestamp timestamp = {}, double exposure = 0.0, double gain = 0.0);

  std::size_t pixel_count() const { return buffer.size(); }
};

/// Per-pixel 8-bit reliability channel paired with a Long Throw frame.
struct SigmaBuffer {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> buffer;

  SigmaBuffer() = default;
  SigmaBuffer(int width, int height, std::vector<std::uint8_t> buffer);
};

/// Active-brightness image: 16-bit IR intensity from the same modulated
/// signal as depth, proportional to returned light.
struct AbFrame {
  DepthMode mode = DepthMode::LongThrow;
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> buffer;
  Timestamp timestamp;

  AbFrame() = default;
  AbFrame(DepthMode mode, int width, int height, std::vector<std::uint16_t> buffer,
          Timestamp timestamp = {});
};

/// 8-bit grayscale tracking-camera frame, always 640x480.
struct VlcFrame {
  int width = kVlcWidth;
  int height = kVlcHeight;
  std::vector<std::uint8_t> buffer;
  Timestamp timestamp;
  double exposure = 0.0;
  double gain = 0.0;

  VlcFrame() = default;
  VlcFrame(std::vector<std::uint8_t> buffer, Timestamp timestamp = {}, double exposure = 0.0,
           double gain = 0.0);
};

enum class ImuKind : std::uint8_t { Accel = 0, Gyro = 1, Mag = 2 };

struct ImuSample {
  Timestamp t;
  Vec3d value;  // m/s^2, rad/s, or unitless normalized field
};

/// A batch of IMU samples. Accel and gyro batches carry the sensor
/// temperature in degrees Celsius; magnetometer batches never do.
struct ImuBatch {
  ImuKind kind = ImuKind::Accel;
  std::vector<ImuSample> samples;
  std::optional<double> temperature_c;

  ImuBatch() = default;
  ImuBatch(ImuKind kind, std::vector<ImuSample> samples,
           std::optional<double> temperature_c = std::nullopt);
};

/// Depth decoded to metric range with a validity mask.
struct DecodedDepth {
  int width = 0;
  int height = 0;
  std::vector<float> range_m;
  std::vector<std::uint8_t> valid;  // 0 or 1 per pixel
};

/// Zeroes every pixel whose sigma byte has the invalid bit (0x80) set and
/// returns the result as a new frame. Throws ModeMismatch unless the frame
/// is LongThrow and DimensionMismatch when shapes differ.
DepthFrame validate_long_throw(const DepthFrame& depth, const SigmaBuffer& sigma);

/// Splits an AHAT frame into wrapped metric range and validity. A pixel is
/// valid iff its code is <= 999; valid range is code/1000 meters.
/// Throws ModeMismatch on non-AHAT input.
DecodedDepth decode_ahat(const DepthFrame& depth);

/// Metric view of a validated Long Throw frame; zero pixels are invalid.
DecodedDepth decode_long_throw(const DepthFrame& depth);

/// Recovers absolute range from a wrapped reading: the candidate
/// wrapped + k (k >= 0, whole meters) nearest to the hint, ties toward
/// smaller k. Throws DomainError unless 0 <= wrapped < 1 and hint >= 0.
double unwrap_ahat(double wrapped_m, double hint_m);

/// Min-max normalization followed by a gamma power curve, quantized to
/// [0, 255]. A constant image maps to all zeros. Throws DomainError when
/// gamma <= 0.
std::vector<std::uint8_t> ab_to_visual(const AbFrame& ab, double gamma);

}  // namespace rigkit
