#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rigkit/calibration.hpp"
#include "rigkit/container.hpp"
#include "rigkit/sim/noise.hpp"
#include "rigkit/sim/scene.hpp"
#include "rigkit/sim/trajectory_spec.hpp"

namespace rigkit::sim {

/// AB shading constant: AB = clamp(round(K * albedo * cos(theta) / r^2)).
inline constexpr double kAbConstant = 5000.0;

/// Capture epoch: all stream grids start here (100 s in ticks, arbitrary
/// but fixed so timestamps are recognizably non-zero).
inline constexpr Timestamp kDefaultEpoch{1'000'000'000ull};

/// IMU samples per container record (capacity is 64).
inline constexpr std::uint32_t kImuRecordBatch = 32;

/// Reported IMU die temperature, degrees Celsius (magnetometers have none).
inline constexpr double kImuTemperatureC = 25.0;

inline constexpr std::uint16_t kHeadPoseStreamId = 9;
inline constexpr std::uint16_t kHandPoseStreamId = 10;
inline constexpr std::uint16_t kGazeStreamId = 11;

struct StreamRates {
  double vlc_fps = 30.0;
  double ahat_fps = 45.0;
  double long_throw_fps = 5.0;
  double accel_hz = 1000.0;
  double gyro_hz = 1000.0;
  double mag_hz = 50.0;

  void validate() const;
};

struct StreamToggles {
  bool vlc = true;
  bool depth = true;
  bool imu = true;
  bool interaction = true;  // head pose, hand, gaze
};

/// Nine-sensor rig with the canonical shapes: four 640x480 VLC cameras,
/// one depth sensor exposed as AHAT 512x512 and Long Throw 320x288, and
/// three IMUs. LEFT_FRONT extrinsics are the identity (it is the rig
/// frame); the rest carry fixed plausible offsets.
RigCalibration make_default_rig(const StreamRates& rates = {});

/// Container descriptors for the default rig: stream ids 0..8 follow the
/// sensor numbering, plus head pose 9, hand pose 10, gaze 11 sampled at
/// pose_rate_hz. Toggles drop whole groups.
std::vector<StreamDescriptor> make_default_descriptors(const RigCalibration& rig,
                                                       double pose_rate_hz,
                                                       const StreamToggles& toggles = {});

/// Number of frames on a nominal grid covering [0, duration): frame i is
/// at epoch + round(i / fps) ticks.
std::uint64_t frame_count_for(double fps, double duration_s);
Timestamp frame_time(Timestamp epoch, double fps, std::uint64_t i);

struct RenderedDepth {
  DepthFrame depth;
  std::optional<SigmaBuffer> sigma;  // Long Throw only
  AbFrame ab;
};

/// Ray-cast depth + AB through the camera's unit-plane LUT. AHAT encodes
/// round(1000 r) mod 1000 (miss or dropout: 0xFFFF); Long Throw encodes
/// round(1000 r) clamped to [0, 7500] with the sigma invalid bit on miss
/// or dropout. Range noise is applied before quantization; every random
/// draw is keyed by (seed, stream, frame, pixel), so any row-level
/// parallelism yields identical frames.
RenderedDepth render_depth(const Scene& scene, const CameraModel& cam,
                           const RigidTransformd& world_from_camera, DepthMode mode,
                           const NoiseSpec& noise, std::uint16_t stream_id,
                           std::uint64_t frame_index, Timestamp t, int threads = 1);

/// 8-bit grayscale: Lambertian mix of a fixed directional light and a
/// headlight term (so frontal surfaces fall off toward oblique viewing),
/// noise-free. Empty scene renders black.
VlcFrame render_vlc(const Scene& scene, const CameraModel& cam,
                    const RigidTransformd& world_from_camera, Timestamp t, int threads = 1);

struct ImuStreams {
  std::vector<ImuBatch> accel;
  std::vector<ImuBatch> gyro;
  std::vector<ImuBatch> mag;
};

/// Strapdown readings on each sensor's nominal grid over [0, duration):
/// specific force R^T (a_world - g_world), body angular velocity, and the
/// fixed world magnetic direction in body axes; batched kImuRecordBatch
/// samples per record. IMU axes coincide with rig axes (the extrinsics
/// carry mounting positions only).
ImuStreams synth_imu(const TrajectorySpec& traj, const StreamRates& rates, Timestamp epoch);

struct InteractionStreams {
  PoseTrajectory head;             // the ground-truth trajectory at pose rate
  std::vector<GazeSample> gaze;    // rig frame, as stored
  std::vector<HandSample> hands;   // rig-attached joints in world frame
};

/// Head pose, gaze toward the target primitive's center, and a 26-joint
/// hand rigidly attached 0.4 m in front of the rig, all on the pose grid.
/// Throws UnknownTarget when the index is out of range.
InteractionStreams synth_interaction(const TrajectorySpec& traj, const Scene& scene,
                                     std::size_t target_primitive, Timestamp epoch);

struct SimConfig {
  Scene scene;
  TrajectorySpec trajectory;
  NoiseSpec noise;
  StreamRates rates;
  StreamToggles streams;
  std::size_t target = 0;  // gaze target primitive index
  int threads = 1;
};

/// JSON config (schema documented in FORMAT.md). Throws InvalidArgument
/// with a field path on any malformed entry.
SimConfig parse_sim_config(const std::string& json_text);
SimConfig load_sim_config(const std::string& path);
std::string default_sim_config_text();

struct SimSummary {
  std::string container_path;
  std::string sidecar_path;
  std::uint64_t record_count = 0;
  PoseTrajectory truth;
};

/// Full capture: every enabled stream sampled on its nominal grid from the
/// common epoch, written through the container writer, plus a JSON
/// ground-truth sidecar (<out>.truth.json) with the scene, seed, and true
/// trajectory. Identical configs produce byte-identical containers.
SimSummary simulate(const SimConfig& config, const std::string& out_path);

}  // namespace rigkit::sim
