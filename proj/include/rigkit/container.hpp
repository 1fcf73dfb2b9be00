#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rigkit/calibration.hpp"
#include "rigkit/frames.hpp"
#include "rigkit/records.hpp"
#include "rigkit/trajectory.hpp"
#include "rigkit/transform.hpp"
#include "rigkit/types.hpp"

namespace rigkit {

/// What a stream carries. Values 0..8 mirror SensorType; the tracking
/// streams extend the range.
enum class StreamKind : std::uint8_t {
  LEFT_FRONT = 0,
  LEFT_LEFT = 1,
  RIGHT_FRONT = 2,
  RIGHT_RIGHT = 3,
  DEPTH_AHAT = 4,
  DEPTH_LONG_THROW = 5,
  IMU_ACCEL = 6,
  IMU_GYRO = 7,
  IMU_MAG = 8,
  HEAD_POSE = 9,
  HAND_POSE = 10,
  GAZE_RAY = 11,
  RESERVED = 255,
};

const char* stream_kind_name(StreamKind k);
bool stream_kind_is_image(StreamKind k);
std::optional<SensorType> stream_kind_sensor(StreamKind k);

enum class PixelFormat : std::uint8_t {
  U8 = 0,
  U16 = 1,
  POSE_RECORD = 2,
  VEC3_BATCH = 3,
  RAY_RECORD = 4,
};

/// IMU batches hold at most this many samples per record.
inline constexpr std::uint32_t kImuBatchCapacity = 64;

struct StreamDescriptor {
  std::uint16_t stream_id = 0;
  StreamKind kind = StreamKind::RESERVED;
  PixelFormat format = PixelFormat::U8;
  std::uint32_t width = 0;   // 0 for non-image streams
  std::uint32_t height = 0;
  /// POSE_RECORD: transforms per record (hand joint count, 1 for head).
  /// VEC3_BATCH: maximum samples per record. 1 otherwise.
  std::uint32_t elements = 1;
  double nominal_fps = 0.0;
  RigidTransformd rig_from_sensor;
  std::string friendly_name;
  std::optional<CameraModel> camera;
};

struct FrameRecord {
  std::uint16_t stream_id = 0;
  Timestamp timestamp;
  std::vector<std::uint8_t> payload;
};

struct IndexEntry {
  Timestamp timestamp;
  std::uint64_t offset = 0;  // file offset of the record's first byte
};

// --- payload codecs -------------------------------------------------------
// Byte layouts are fixed by the container format (see FORMAT.md). Exposure
// and gain are in-memory metadata only and are not persisted.

std::vector<std::uint8_t> encode_vlc_payload(const VlcFrame& frame);
std::vector<std::uint8_t> encode_long_throw_payload(const DepthFrame& depth,
                                                    const SigmaBuffer& sigma, const AbFrame& ab);
std::vector<std::uint8_t> encode_ahat_payload(const DepthFrame& depth, const AbFrame& ab);
std::vector<std::uint8_t> encode_imu_payload(const ImuBatch& batch);
std::vector<std::uint8_t> encode_pose_payload(const RigidTransformd& world_from_rig);
std::vector<std::uint8_t> encode_hand_payload(const HandSample& hand);
std::vector<std::uint8_t> encode_gaze_payload(const GazeSample& gaze);

struct LongThrowFrame {
  DepthFrame depth;
  SigmaBuffer sigma;
  AbFrame ab;
};

struct AhatFrame {
  DepthFrame depth;
  AbFrame ab;
};

/// The payload length a record must have for this descriptor, given the
/// payload itself (IMU batches are variable-length). Throws
/// PayloadSizeMismatch when the payload cannot match.
std::size_t expected_payload_size(const StreamDescriptor& desc,
                                  const std::vector<std::uint8_t>& payload);

/// Single-file multi-stream capture writer. Records must arrive in
/// strictly increasing timestamp order per stream. finalize() writes the
/// index footer and CRC; nothing may be appended afterwards.
class ContainerWriter {
 public:
  static ContainerWriter create(const std::string& path, const RigCalibration& calibration,
                                const std::vector<StreamDescriptor>& descriptors);

  ContainerWriter(ContainerWriter&&) noexcept;
  ContainerWriter& operator=(ContainerWriter&&) noexcept;
  ~ContainerWriter();

  void append(const FrameRecord& record);
  void finalize();
  bool finalized() const;

 private:
  ContainerWriter();
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Read side: header and index are validated and the whole-file CRC
/// checked on open; frames decode on demand. Readers never mutate the
/// file, so any number may be open concurrently.
class ContainerReader {
 public:
  static ContainerReader open(const std::string& path);

  ContainerReader(ContainerReader&&) noexcept;
  ContainerReader& operator=(ContainerReader&&) noexcept;
  ~ContainerReader();

  const std::string& path() const;
  const RigCalibration& calibration() const;
  const std::vector<StreamDescriptor>& descriptors() const;
  const StreamDescriptor& descriptor(std::uint16_t stream_id) const;  // UnknownStream
  std::optional<std::uint16_t> find_stream(StreamKind kind) const;

  std::size_t frame_count(std::uint16_t stream_id) const;
  const std::vector<IndexEntry>& index(std::uint16_t stream_id) const;
  std::vector<Timestamp> timestamps(std::uint16_t stream_id) const;

  /// Raw record by position. Throws IndexOutOfRange.
  FrameRecord read_frame(std::uint16_t stream_id, std::size_t i) const;

  // Typed decoders; each checks the descriptor kind and the frame-level
  // invariants (canonical shapes, AHAT code range, Long Throw ceiling)
  // and throws MalformedFrame on violation.
  VlcFrame read_vlc(std::uint16_t stream_id, std::size_t i) const;
  LongThrowFrame read_long_throw(std::uint16_t stream_id, std::size_t i) const;
  AhatFrame read_ahat(std::uint16_t stream_id, std::size_t i) const;
  ImuBatch read_imu(std::uint16_t stream_id, std::size_t i) const;
  PoseSample read_pose(std::uint16_t stream_id, std::size_t i) const;
  GazeSample read_gaze(std::uint16_t stream_id, std::size_t i) const;
  HandSample read_hand(std::uint16_t stream_id, std::size_t i) const;

  /// All poses of a HEAD_POSE stream as a trajectory.
  PoseTrajectory read_pose_trajectory(std::uint16_t stream_id) const;

  /// Sequential per-stream cursor. Record reads are internally
  /// synchronized, so independent cursors may be driven from
  /// independent threads.
  class Cursor {
   public:
    /// False at end of stream.
    bool next(FrameRecord& out);
    std::size_t position() const { return next_index_; }

   private:
    friend class ContainerReader;
    Cursor(const ContainerReader& reader, std::uint16_t stream_id);
    const ContainerReader* reader_;
    std::uint16_t stream_id_;
    std::size_t next_index_ = 0;
  };

  Cursor cursor(std::uint16_t stream_id) const;

 private:
  ContainerReader();
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// --- diagnostics ----------------------------------------------------------

struct StreamReport {
  std::uint16_t stream_id = 0;
  StreamKind kind = StreamKind::RESERVED;
  std::string name;  // the descriptor's friendly name
  PixelFormat format = PixelFormat::U8;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint64_t record_count = 0;
  std::uint64_t sample_count = 0;  // IMU samples; records otherwise
  Timestamp first;
  Timestamp last;
  double nominal_fps = 0.0;
  double estimated_fps = 0.0;  // samples per second over the stream span
  double invalid_pixel_fraction = 0.0;  // depth streams only
};

struct InspectReport {
  std::string path;
  std::uint64_t file_size = 0;
  double duration_s = 0.0;
  std::vector<StreamReport> streams;

  std::string to_text() const;
  std::string to_json() const;
};

/// Deterministic summary of a container: stream table, counts, span,
/// rate estimates, and depth invalid-pixel statistics.
InspectReport inspect_container(const std::string& path);

/// Full integrity check: format invariants, canonical shapes, payload
/// sizes, timestamp order, index consistency, and per-frame value rules.
/// Returns human-readable violations; empty means the container is valid.
std::vector<std::string> check_container(const std::string& path);

/// One raw payload-concatenation file plus one timestamp text file
/// (one decimal tick count per line) per stream, named by stream id.
void export_streams(const std::string& path, const std::string& out_dir);

}  // namespace rigkit
