#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rigkit/camera.hpp"
#include "rigkit/transform.hpp"
#include "rigkit/types.hpp"

namespace rigkit {

/// The nine rig sensors. The first six are cameras, the last three IMU.
enum class SensorType : std::uint8_t {
  LEFT_FRONT = 0,
  LEFT_LEFT = 1,
  RIGHT_FRONT = 2,
  RIGHT_RIGHT = 3,
  DEPTH_AHAT = 4,
  DEPTH_LONG_THROW = 5,
  IMU_ACCEL = 6,
  IMU_GYRO = 7,
  IMU_MAG = 8,
};

inline constexpr int kSensorTypeCount = 9;

inline bool is_camera_sensor(SensorType t) {
  return static_cast<int>(t) <= static_cast<int>(SensorType::DEPTH_LONG_THROW);
}
inline bool is_imu_sensor(SensorType t) { return !is_camera_sensor(t); }

const char* sensor_type_name(SensorType t);
std::optional<SensorType> parse_sensor_type(const std::string& name);

/// One calibrated sensor: its pose in the rig frame plus, for cameras,
/// the intrinsics model. rig_from_sensor maps sensor-frame coordinates
/// into rig-frame coordinates.
struct SensorEntry {
  SensorType type = SensorType::LEFT_FRONT;
  std::string friendly_name;
  double nominal_fps = 0.0;
  RigidTransformd rig_from_sensor;
  std::optional<CameraModel> camera;
};

/// Sensor descriptors keyed by type. The rig origin coincides with the
/// LEFT_FRONT camera, so that entry's extrinsics must be the identity.
class RigCalibration {
 public:
  RigCalibration() = default;

  /// Throws DuplicateStreamId on a repeated type and DomainError when a
  /// LEFT_FRONT entry is not the identity (tolerance 1e-12).
  void add(SensorEntry entry);

  const std::vector<SensorEntry>& entries() const { return entries_; }
  const SensorEntry* find(SensorType t) const;

  /// Throws UnknownSensor when the type is absent.
  const SensorEntry& at(SensorType t) const;

 private:
  std::vector<SensorEntry> entries_;
};

/// Stored extrinsics for the sensor; LEFT_FRONT is always the identity.
RigidTransformd rig_from_sensor(const RigCalibration& calib, SensorType t);

/// UTF-8 key/value document with per-sensor geometry, rates, and the
/// parametric camera description when one exists. Unit-plane LUTs are not
/// part of the text form; they travel as binary blobs next to it.
std::string serialize_calibration_text(const RigCalibration& calib);

/// Parses the text document. Cameras described parametrically are rebuilt
/// (including their LUT); cameras marked `lut` come back without a model
/// and are expected to be completed from the binary blob by the caller.
RigCalibration parse_calibration_text(const std::string& text);

}  // namespace rigkit
