#include "rigkit/container.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "wire.hpp"

namespace rigkit {

namespace {

constexpr char kMagic[4] = {'R', 'M', 'R', 'C'};
constexpr char kIndexMarker[4] = {'R', 'I', 'D', 'X'};
constexpr std::uint16_t kVersionMajor = 1;
constexpr std::uint16_t kVersionMinor = 0;
constexpr std::size_t kTrailerSize = 12;  // footer offset u64 + crc u32
constexpr std::size_t kPoseRecordSize = 96;
constexpr std::size_t kGazeRecordSize = 48;
constexpr std::size_t kImuSampleSize = 20;

std::uint32_t crc_update(std::uint32_t crc, const std::uint8_t* data, std::size_t len) {
  // zlib resets the running value when handed a null buffer, which is what
  // an empty std::vector's data() may be, so skip no-op updates explicitly.
  if (len == 0) return crc;
  return static_cast<std::uint32_t>(
      crc32(crc, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(len)));
}

void put_transform(std::vector<std::uint8_t>& out, const RigidTransformd& t) {
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) wire::put_f64(out, t.rotation(r, c));
  for (int i = 0; i < 3; ++i) wire::put_f64(out, t.translation(i));
}

RigidTransformd take_transform(wire::Cursor& c) {
  RigidTransformd t;
  for (int r = 0; r < 3; ++r)
    for (int col = 0; col < 3; ++col) t.rotation(r, col) = c.f64();
  for (int i = 0; i < 3; ++i) t.translation(i) = c.f64();
  return t;
}

std::vector<std::uint8_t> encode_camera_blob(const CameraModel& cam) {
  std::vector<std::uint8_t> out;
  wire::put_u32(out, static_cast<std::uint32_t>(cam.width()));
  wire::put_u32(out, static_cast<std::uint32_t>(cam.height()));
  wire::put_u8(out, cam.params() ? 1 : 0);
  if (cam.params()) {
    const DistortionParams& p = *cam.params();
    for (double v : {p.fx, p.fy, p.cx, p.cy, p.k1, p.k2, p.k3, p.p1, p.p2}) {
      wire::put_f64(out, v);
    }
  }
  for (const Vec2f& v : cam.unit_plane_lut()) {
    wire::put_f32(out, v.x());
    wire::put_f32(out, v.y());
  }
  return out;
}

CameraModel decode_camera_blob(const std::uint8_t* data, std::size_t size) {
  wire::Cursor c(data, size);
  const std::uint32_t w = c.u32();
  const std::uint32_t h = c.u32();
  if (w == 0 || h == 0 || static_cast<std::uint64_t>(w) * h > (1u << 26)) {
    raise(ErrorCode::CorruptContainer, "implausible camera blob dimensions");
  }
  std::optional<DistortionParams> params;
  if (c.u8() != 0) {
    DistortionParams p;
    p.fx = c.f64();
    p.fy = c.f64();
    p.cx = c.f64();
    p.cy = c.f64();
    p.k1 = c.f64();
    p.k2 = c.f64();
    p.k3 = c.f64();
    p.p1 = c.f64();
    p.p2 = c.f64();
    params = p;
  }
  std::vector<Vec2f> lut(static_cast<std::size_t>(w) * h);
  for (Vec2f& v : lut) {
    v.x() = c.f32();
    v.y() = c.f32();
  }
  if (c.remaining() != 0) raise(ErrorCode::CorruptContainer, "trailing bytes in camera blob");
  return CameraModel(static_cast<int>(w), static_cast<int>(h), std::move(lut), params);
}

struct CanonicalShape {
  std::uint32_t width;
  std::uint32_t height;
  PixelFormat format;
};

std::optional<CanonicalShape> canonical_shape(StreamKind kind) {
  switch (kind) {
    case StreamKind::LEFT_FRONT:
    case StreamKind::LEFT_LEFT:
    case StreamKind::RIGHT_FRONT:
    case StreamKind::RIGHT_RIGHT:
      return CanonicalShape{kVlcWidth, kVlcHeight, PixelFormat::U8};
    case StreamKind::DEPTH_AHAT:
      return CanonicalShape{kAhatWidth, kAhatHeight, PixelFormat::U16};
    case StreamKind::DEPTH_LONG_THROW:
      return CanonicalShape{kLongThrowWidth, kLongThrowHeight, PixelFormat::U16};
    default:
      return std::nullopt;
  }
}

void check_descriptor(const StreamDescriptor& d) {
  if (const auto shape = canonical_shape(d.kind)) {
    if (d.width != shape->width || d.height != shape->height || d.format != shape->format) {
      raise(ErrorCode::DimensionMismatch,
            std::string(stream_kind_name(d.kind)) + " stream must be " +
                std::to_string(shape->width) + "x" + std::to_string(shape->height));
    }
    if (!d.camera) {
      raise(ErrorCode::DomainError,
            std::string("image stream ") + stream_kind_name(d.kind) + " needs a camera model");
    }
    if (static_cast<std::uint32_t>(d.camera->width()) != d.width ||
        static_cast<std::uint32_t>(d.camera->height()) != d.height) {
      raise(ErrorCode::DimensionMismatch, "camera model shape must match the stream");
    }
  }
  switch (d.kind) {
    case StreamKind::IMU_ACCEL:
    case StreamKind::IMU_GYRO:
    case StreamKind::IMU_MAG:
      if (d.format != PixelFormat::VEC3_BATCH || d.elements == 0 ||
          d.elements > kImuBatchCapacity) {
        raise(ErrorCode::DomainError, "IMU streams are VEC3_BATCH with 1..64 samples per record");
      }
      break;
    case StreamKind::HEAD_POSE:
      if (d.format != PixelFormat::POSE_RECORD || d.elements != 1) {
        raise(ErrorCode::DomainError, "head pose streams carry one POSE_RECORD per frame");
      }
      break;
    case StreamKind::HAND_POSE:
      if (d.format != PixelFormat::POSE_RECORD || d.elements == 0) {
        raise(ErrorCode::DomainError, "hand pose streams need a positive joint count");
      }
      break;
    case StreamKind::GAZE_RAY:
      if (d.format != PixelFormat::RAY_RECORD) {
        raise(ErrorCode::DomainError, "gaze streams carry RAY_RECORD payloads");
      }
      break;
    default:
      break;
  }
  if (!is_rigid(d.rig_from_sensor)) {
    raise(ErrorCode::DomainError, "descriptor extrinsics must be rigid");
  }
}

std::vector<std::uint8_t> encode_descriptor(const StreamDescriptor& d) {
  std::vector<std::uint8_t> out;
  wire::put_u16(out, d.stream_id);
  wire::put_u8(out, static_cast<std::uint8_t>(d.kind));
  wire::put_u8(out, static_cast<std::uint8_t>(d.format));
  wire::put_u32(out, d.width);
  wire::put_u32(out, d.height);
  wire::put_u32(out, d.elements);
  wire::put_f64(out, d.nominal_fps);
  put_transform(out, d.rig_from_sensor);
  wire::put_u16(out, static_cast<std::uint16_t>(d.friendly_name.size()));
  wire::put_bytes(out, d.friendly_name.data(), d.friendly_name.size());
  if (d.camera) {
    const std::vector<std::uint8_t> blob = encode_camera_blob(*d.camera);
    wire::put_u32(out, static_cast<std::uint32_t>(blob.size()));
    wire::put_bytes(out, blob.data(), blob.size());
  } else {
    wire::put_u32(out, 0);
  }
  return out;
}

std::vector<std::uint8_t> read_exact(std::ifstream& f, std::size_t n, const char* what) {
  std::vector<std::uint8_t> buf(n);
  f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(f.gcount()) != n) {
    raise(ErrorCode::CorruptContainer, std::string("truncated container while reading ") + what);
  }
  return buf;
}

}  // namespace

const char* stream_kind_name(StreamKind k) {
  switch (k) {
    case StreamKind::LEFT_FRONT: return "LEFT_FRONT";
    case StreamKind::LEFT_LEFT: return "LEFT_LEFT";
    case StreamKind::RIGHT_FRONT: return "RIGHT_FRONT";
    case StreamKind::RIGHT_RIGHT: return "RIGHT_RIGHT";
    case StreamKind::DEPTH_AHAT: return "DEPTH_AHAT";
    case StreamKind::DEPTH_LONG_THROW: return "DEPTH_LONG_THROW";
    case StreamKind::IMU_ACCEL: return "IMU_ACCEL";
    case StreamKind::IMU_GYRO: return "IMU_GYRO";
    case StreamKind::IMU_MAG: return "IMU_MAG";
    case StreamKind::HEAD_POSE: return "HEAD_POSE";
    case StreamKind::HAND_POSE: return "HAND_POSE";
    case StreamKind::GAZE_RAY: return "GAZE_RAY";
    case StreamKind::RESERVED: return "RESERVED";
  }
  return "UNKNOWN";
}

bool stream_kind_is_image(StreamKind k) {
  return static_cast<std::uint8_t>(k) <= static_cast<std::uint8_t>(StreamKind::DEPTH_LONG_THROW);
}

std::optional<SensorType> stream_kind_sensor(StreamKind k) {
  if (static_cast<std::uint8_t>(k) < kSensorTypeCount) {
    return static_cast<SensorType>(static_cast<std::uint8_t>(k));
  }
  return std::nullopt;
}

// --- payload codecs -------------------------------------------------------

std::vector<std::uint8_t> encode_vlc_payload(const VlcFrame& frame) {
  return frame.buffer;
}

std::vector<std::uint8_t> encode_long_throw_payload(const DepthFrame& depth,
                                                    const SigmaBuffer& sigma, const AbFrame& ab) {
  if (depth.mode != DepthMode::LongThrow) raise(ErrorCode::ModeMismatch, "expected Long Throw");
  if (depth.width != sigma.width || depth.height != sigma.height || depth.width != ab.width ||
      depth.height != ab.height) {
    raise(ErrorCode::DimensionMismatch, "depth, sigma, and AB must share one shape");
  }
  std::vector<std::uint8_t> out;
  out.reserve(depth.buffer.size() * 5);
  for (std::uint16_t v : depth.buffer) wire::put_u16(out, v);
  wire::put_bytes(out, sigma.buffer.data(), sigma.buffer.size());
  for (std::uint16_t v : ab.buffer) wire::put_u16(out, v);
  return out;
}

std::vector<std::uint8_t> encode_ahat_payload(const DepthFrame& depth, const AbFrame& ab) {
  if (depth.mode != DepthMode::Ahat) raise(ErrorCode::ModeMismatch, "expected AHAT");
  if (depth.width != ab.width || depth.height != ab.height) {
    raise(ErrorCode::DimensionMismatch, "depth and AB must share one shape");
  }
  std::vector<std::uint8_t> out;
  out.reserve(depth.buffer.size() * 4);
  for (std::uint16_t v : depth.buffer) wire::put_u16(out, v);
  for (std::uint16_t v : ab.buffer) wire::put_u16(out, v);
  return out;
}

std::vector<std::uint8_t> encode_imu_payload(const ImuBatch& batch) {
  if (batch.samples.empty() || batch.samples.size() > kImuBatchCapacity) {
    raise(ErrorCode::DomainError, "IMU batches hold 1..64 samples");
  }
  std::vector<std::uint8_t> out;
  wire::put_u32(out, static_cast<std::uint32_t>(batch.samples.size()));
  for (const ImuSample& s : batch.samples) {
    wire::put_u64(out, s.t.ticks);
    wire::put_f32(out, static_cast<float>(s.value.x()));
    wire::put_f32(out, static_cast<float>(s.value.y()));
    wire::put_f32(out, static_cast<float>(s.value.z()));
  }
  if (batch.kind != ImuKind::Mag) {
    wire::put_f32(out, static_cast<float>(batch.temperature_c.value_or(0.0)));
  }
  return out;
}

std::vector<std::uint8_t> encode_pose_payload(const RigidTransformd& world_from_rig) {
  std::vector<std::uint8_t> out;
  put_transform(out, world_from_rig);
  return out;
}

std::vector<std::uint8_t> encode_hand_payload(const HandSample& hand) {
  std::vector<std::uint8_t> out;
  wire::put_u8(out, static_cast<std::uint8_t>(hand.handedness));
  for (const RigidTransformd& j : hand.joints) put_transform(out, j);
  return out;
}

std::vector<std::uint8_t> encode_gaze_payload(const GazeSample& gaze) {
  std::vector<std::uint8_t> out;
  for (int i = 0; i < 3; ++i) wire::put_f64(out, gaze.origin(i));
  for (int i = 0; i < 3; ++i) wire::put_f64(out, gaze.direction(i));
  return out;
}

std::size_t expected_payload_size(const StreamDescriptor& d,
                                  const std::vector<std::uint8_t>& payload) {
  const std::size_t pixels = static_cast<std::size_t>(d.width) * d.height;
  switch (d.kind) {
    case StreamKind::LEFT_FRONT:
    case StreamKind::LEFT_LEFT:
    case StreamKind::RIGHT_FRONT:
    case StreamKind::RIGHT_RIGHT:
      return pixels;
    case StreamKind::DEPTH_AHAT:
      return pixels * 4;  // depth + AB, u16 each
    case StreamKind::DEPTH_LONG_THROW:
      return pixels * 5;  // depth u16 + sigma u8 + AB u16
    case StreamKind::IMU_ACCEL:
    case StreamKind::IMU_GYRO:
    case StreamKind::IMU_MAG: {
      if (payload.size() < 4) {
        raise(ErrorCode::PayloadSizeMismatch, "IMU payload shorter than its sample count");
      }
      wire::Cursor c(payload.data(), payload.size());
      const std::uint32_t n = c.u32();
      if (n == 0 || n > d.elements) {
        raise(ErrorCode::PayloadSizeMismatch, "IMU batch size outside descriptor capacity");
      }
      const std::size_t temp = (d.kind == StreamKind::IMU_MAG) ? 0 : 4;
      return 4 + static_cast<std::size_t>(n) * kImuSampleSize + temp;
    }
    case StreamKind::HEAD_POSE:
    case StreamKind::HAND_POSE: {
      const std::size_t joints = static_cast<std::size_t>(d.elements) * kPoseRecordSize;
      return d.kind == StreamKind::HAND_POSE ? joints + 1 : joints;
    }
    case StreamKind::GAZE_RAY:
      return kGazeRecordSize;
    case StreamKind::RESERVED: {
      if (pixels == 0) return payload.size();  // opaque stream
      return pixels * (d.format == PixelFormat::U16 ? 2 : 1);
    }
  }
  raise(ErrorCode::DomainError, "unknown stream kind");
}

// --- writer ----------------------------------------------------------------

struct ContainerWriter::Impl {
  std::ofstream file;
  std::string path;
  std::uint32_t crc = 0;
  std::uint64_t offset = 0;
  bool finalized = false;
  std::vector<StreamDescriptor> descriptors;
  std::map<std::uint16_t, std::size_t> by_id;
  std::vector<std::vector<IndexEntry>> index;  // parallel to descriptors
  std::vector<bool> has_frames;

  void write(const std::uint8_t* data, std::size_t len) {
    file.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(len));
    if (!file) raise(ErrorCode::IoError, "write failed on " + path);
    crc = crc_update(crc, data, len);
    offset += len;
  }
  void write(const std::vector<std::uint8_t>& bytes) { write(bytes.data(), bytes.size()); }
};

ContainerWriter::ContainerWriter() : impl_(new Impl) {}
ContainerWriter::ContainerWriter(ContainerWriter&&) noexcept = default;
ContainerWriter& ContainerWriter::operator=(ContainerWriter&&) noexcept = default;

ContainerWriter::~ContainerWriter() {
  if (impl_ && impl_->file.is_open() && !impl_->finalized) {
    try {
      finalize();
    } catch (...) {
      // Destruction must not throw; an unfinalized file stays unreadable.
    }
  }
}

ContainerWriter ContainerWriter::create(const std::string& path,
                                        const RigCalibration& calibration,
                                        const std::vector<StreamDescriptor>& descriptors) {
  ContainerWriter w;
  Impl& im = *w.impl_;
  im.path = path;
  for (const StreamDescriptor& d : descriptors) {
    if (im.by_id.count(d.stream_id) != 0) {
      raise(ErrorCode::DuplicateStreamId, "stream id " + std::to_string(d.stream_id) + " repeats");
    }
    check_descriptor(d);
    im.by_id[d.stream_id] = im.descriptors.size();
    im.descriptors.push_back(d);
  }
  im.index.resize(im.descriptors.size());
  im.file.open(path, std::ios::binary | std::ios::trunc);
  if (!im.file) raise(ErrorCode::IoError, "cannot create " + path);

  std::vector<std::uint8_t> header;
  wire::put_bytes(header, kMagic, 4);
  wire::put_u16(header, kVersionMajor);
  wire::put_u16(header, kVersionMinor);
  const std::string calib_text = serialize_calibration_text(calibration);
  wire::put_u32(header, static_cast<std::uint32_t>(calib_text.size()));
  wire::put_bytes(header, calib_text.data(), calib_text.size());
  wire::put_u16(header, static_cast<std::uint16_t>(im.descriptors.size()));
  im.write(header);
  for (const StreamDescriptor& d : im.descriptors) im.write(encode_descriptor(d));
  return w;
}

void ContainerWriter::append(const FrameRecord& record) {
  Impl& im = *impl_;
  if (im.finalized) raise(ErrorCode::IoError, "container already finalized");
  const auto it = im.by_id.find(record.stream_id);
  if (it == im.by_id.end()) {
    raise(ErrorCode::UnknownStream, "no stream with id " + std::to_string(record.stream_id));
  }
  const std::size_t slot = it->second;
  const StreamDescriptor& d = im.descriptors[slot];
  std::vector<IndexEntry>& idx = im.index[slot];
  if (!idx.empty() && !(idx.back().timestamp < record.timestamp)) {
    raise(ErrorCode::NonMonotonicTimestamp,
          "timestamps must strictly increase on stream " + std::to_string(record.stream_id));
  }
  const std::size_t expected = expected_payload_size(d, record.payload);
  if (record.payload.size() != expected) {
    raise(ErrorCode::PayloadSizeMismatch,
          "stream " + std::to_string(record.stream_id) + " expects " + std::to_string(expected) +
              " bytes, got " + std::to_string(record.payload.size()));
  }
  const std::uint64_t at = im.offset;
  std::vector<std::uint8_t> head;
  wire::put_u16(head, record.stream_id);
  wire::put_u64(head, record.timestamp.ticks);
  wire::put_u32(head, static_cast<std::uint32_t>(record.payload.size()));
  im.write(head);
  im.write(record.payload);
  idx.push_back(IndexEntry{record.timestamp, at});
}

void ContainerWriter::finalize() {
  Impl& im = *impl_;
  if (im.finalized) raise(ErrorCode::IoError, "finalize called twice");
  std::vector<std::uint8_t> footer;
  wire::put_bytes(footer, kIndexMarker, 4);
  wire::put_u16(footer, static_cast<std::uint16_t>(im.descriptors.size()));
  for (std::size_t slot = 0; slot < im.descriptors.size(); ++slot) {
    wire::put_u16(footer, im.descriptors[slot].stream_id);
    wire::put_u64(footer, im.index[slot].size());
    for (const IndexEntry& e : im.index[slot]) {
      wire::put_u64(footer, e.timestamp.ticks);
      wire::put_u64(footer, e.offset);
    }
  }
  const std::uint64_t footer_offset = im.offset;
  im.write(footer);
  std::vector<std::uint8_t> tail;
  wire::put_u64(tail, footer_offset);
  im.write(tail);  // covered by the CRC
  std::vector<std::uint8_t> crc_bytes;
  wire::put_u32(crc_bytes, im.crc);
  im.file.write(reinterpret_cast<const char*>(crc_bytes.data()), 4);
  im.file.close();
  if (im.file.fail()) raise(ErrorCode::IoError, "failed finalizing " + im.path);
  im.finalized = true;
}

bool ContainerWriter::finalized() const { return impl_->finalized; }

// --- reader ----------------------------------------------------------------

struct ContainerReader::Impl {
  std::string path;
  mutable std::ifstream file;
  mutable std::mutex io_mutex;
  std::uint64_t file_size = 0;
  std::uint64_t records_begin = 0;
  std::uint64_t footer_offset = 0;
  // Parsing the calibration rebuilds camera models, which is far too costly to
  // pay on every open; defer it until someone actually asks.
  std::string calib_text;
  mutable std::once_flag calib_once;
  mutable std::optional<RigCalibration> calib_cache;
  std::vector<StreamDescriptor> descriptors;
  std::map<std::uint16_t, std::size_t> by_id;
  std::vector<std::vector<IndexEntry>> index;

  std::size_t slot(std::uint16_t stream_id) const {
    const auto it = by_id.find(stream_id);
    if (it == by_id.end()) {
      raise(ErrorCode::UnknownStream, "no stream with id " + std::to_string(stream_id));
    }
    return it->second;
  }
};

ContainerReader::ContainerReader() : impl_(new Impl) {}
ContainerReader::ContainerReader(ContainerReader&&) noexcept = default;
ContainerReader& ContainerReader::operator=(ContainerReader&&) noexcept = default;
ContainerReader::~ContainerReader() = default;

ContainerReader ContainerReader::open(const std::string& path) {
  ContainerReader r;
  Impl& im = *r.impl_;
  im.path = path;
  im.file.open(path, std::ios::binary);
  if (!im.file) raise(ErrorCode::IoError, "cannot open " + path);
  im.file.seekg(0, std::ios::end);
  im.file_size = static_cast<std::uint64_t>(im.file.tellg());
  if (im.file_size < 12 + kTrailerSize) {
    raise(ErrorCode::CorruptContainer, "file too small to be a container");
  }

  // Whole-file CRC, excluding the stored CRC itself.
  im.file.seekg(0);
  std::uint32_t crc = 0;
  {
    std::vector<std::uint8_t> chunk(1 << 20);
    std::uint64_t remaining = im.file_size - 4;
    while (remaining > 0) {
      const std::size_t n = static_cast<std::size_t>(
          std::min<std::uint64_t>(remaining, chunk.size()));
      im.file.read(reinterpret_cast<char*>(chunk.data()), static_cast<std::streamsize>(n));
      if (static_cast<std::size_t>(im.file.gcount()) != n) {
        raise(ErrorCode::CorruptContainer, "short read during CRC scan");
      }
      crc = crc_update(crc, chunk.data(), n);
      remaining -= n;
    }
  }
  im.file.seekg(static_cast<std::streamoff>(im.file_size - kTrailerSize));
  {
    const std::vector<std::uint8_t> tail = read_exact(im.file, kTrailerSize, "trailer");
    wire::Cursor c(tail.data(), tail.size());
    im.footer_offset = c.u64();
    const std::uint32_t stored = c.u32();
    if (stored != crc) {
      raise(ErrorCode::CorruptContainer, "CRC mismatch: file bytes were altered");
    }
  }

  // Header.
  im.file.seekg(0);
  {
    const std::vector<std::uint8_t> fixed = read_exact(im.file, 12, "header");
    wire::Cursor c(fixed.data(), fixed.size());
    const std::uint8_t* m = c.take(4);
    if (std::memcmp(m, kMagic, 4) != 0) raise(ErrorCode::BadMagic, "not a rig capture container");
    const std::uint16_t major = c.u16();
    c.u16();  // minor: compatible within a major version
    if (major != kVersionMajor) {
      raise(ErrorCode::UnsupportedVersion, "container major version " + std::to_string(major));
    }
    const std::uint32_t calib_len = c.u32();
    const std::vector<std::uint8_t> calib = read_exact(im.file, calib_len, "calibration");
    im.calib_text.assign(reinterpret_cast<const char*>(calib.data()), calib_len);
  }
  {
    const std::vector<std::uint8_t> cnt = read_exact(im.file, 2, "stream count");
    const std::uint16_t stream_count = static_cast<std::uint16_t>(cnt[0] | (cnt[1] << 8));
    for (std::uint16_t i = 0; i < stream_count; ++i) {
      StreamDescriptor d;
      std::vector<std::uint8_t> fixed = read_exact(im.file, 122, "stream descriptor");
      wire::Cursor c(fixed.data(), fixed.size());
      d.stream_id = c.u16();
      d.kind = static_cast<StreamKind>(c.u8());
      d.format = static_cast<PixelFormat>(c.u8());
      d.width = c.u32();
      d.height = c.u32();
      d.elements = c.u32();
      d.nominal_fps = c.f64();
      d.rig_from_sensor = take_transform(c);
      const std::uint16_t name_len = c.u16();
      const std::vector<std::uint8_t> name = read_exact(im.file, name_len, "friendly name");
      d.friendly_name.assign(reinterpret_cast<const char*>(name.data()), name_len);
      const std::vector<std::uint8_t> blob_len_b = read_exact(im.file, 4, "camera blob length");
      wire::Cursor bc(blob_len_b.data(), blob_len_b.size());
      const std::uint32_t blob_len = bc.u32();
      if (blob_len > 0) {
        const std::vector<std::uint8_t> blob = read_exact(im.file, blob_len, "camera blob");
        d.camera = decode_camera_blob(blob.data(), blob.size());
      }
      if (im.by_id.count(d.stream_id) != 0) {
        raise(ErrorCode::CorruptContainer, "duplicate stream id in header");
      }
      im.by_id[d.stream_id] = im.descriptors.size();
      im.descriptors.push_back(std::move(d));
    }
  }
  im.records_begin = static_cast<std::uint64_t>(im.file.tellg());

  // Index footer.
  if (im.footer_offset < im.records_begin || im.footer_offset > im.file_size - kTrailerSize) {
    raise(ErrorCode::CorruptContainer, "index footer offset out of range");
  }
  im.file.seekg(static_cast<std::streamoff>(im.footer_offset));
  const std::size_t footer_len =
      static_cast<std::size_t>(im.file_size - kTrailerSize - im.footer_offset);
  const std::vector<std::uint8_t> footer = read_exact(im.file, footer_len, "index footer");
  {
    wire::Cursor c(footer.data(), footer.size());
    const std::uint8_t* m = c.take(4);
    if (std::memcmp(m, kIndexMarker, 4) != 0) {
      raise(ErrorCode::CorruptContainer, "index marker missing");
    }
    const std::uint16_t stream_count = c.u16();
    if (stream_count != im.descriptors.size()) {
      raise(ErrorCode::CorruptContainer, "index stream count disagrees with header");
    }
    im.index.resize(im.descriptors.size());
    for (std::uint16_t i = 0; i < stream_count; ++i) {
      const std::uint16_t id = c.u16();
      const std::uint64_t count = c.u64();
      const std::size_t slot = im.slot(id);
      std::vector<IndexEntry>& idx = im.index[slot];
      idx.reserve(static_cast<std::size_t>(count));
      for (std::uint64_t k = 0; k < count; ++k) {
        IndexEntry e;
        e.timestamp = Timestamp{c.u64()};
        e.offset = c.u64();
        if (!idx.empty() &&
            (!(idx.back().timestamp < e.timestamp) || e.offset <= idx.back().offset)) {
          raise(ErrorCode::CorruptContainer, "index entries must strictly increase");
        }
        if (e.offset < im.records_begin || e.offset >= im.footer_offset) {
          raise(ErrorCode::CorruptContainer, "index offset outside the records region");
        }
        idx.push_back(e);
      }
    }
    if (c.remaining() != 0) raise(ErrorCode::CorruptContainer, "trailing bytes after index");
  }
  return r;
}

const std::string& ContainerReader::path() const { return impl_->path; }
const RigCalibration& ContainerReader::calibration() const {
  Impl& im = *impl_;
  std::call_once(im.calib_once, [&im] {
    const RigCalibration parsed = parse_calibration_text(im.calib_text);
    RigCalibration calib;
    for (SensorEntry e : parsed.entries()) {
      // LUT-form entries omit their tables from the text; the descriptor blob
      // of the matching image stream carries the same camera.
      if (!e.camera) {
        for (const StreamDescriptor& d : im.descriptors) {
          if (stream_kind_is_image(d.kind) &&
              static_cast<int>(d.kind) == static_cast<int>(e.type) && d.camera) {
            e.camera = d.camera;
            break;
          }
        }
      }
      calib.add(std::move(e));
    }
    im.calib_cache = std::move(calib);
  });
  return *im.calib_cache;
}
const std::vector<StreamDescriptor>& ContainerReader::descriptors() const {
  return impl_->descriptors;
}

const StreamDescriptor& ContainerReader::descriptor(std::uint16_t stream_id) const {
  return impl_->descriptors[impl_->slot(stream_id)];
}

std::optional<std::uint16_t> ContainerReader::find_stream(StreamKind kind) const {
  for (const StreamDescriptor& d : impl_->descriptors) {
    if (d.kind == kind) return d.stream_id;
  }
  return std::nullopt;
}

std::size_t ContainerReader::frame_count(std::uint16_t stream_id) const {
  return impl_->index[impl_->slot(stream_id)].size();
}

const std::vector<IndexEntry>& ContainerReader::index(std::uint16_t stream_id) const {
  return impl_->index[impl_->slot(stream_id)];
}

std::vector<Timestamp> ContainerReader::timestamps(std::uint16_t stream_id) const {
  const std::vector<IndexEntry>& idx = index(stream_id);
  std::vector<Timestamp> out;
  out.reserve(idx.size());
  for (const IndexEntry& e : idx) out.push_back(e.timestamp);
  return out;
}

FrameRecord ContainerReader::read_frame(std::uint16_t stream_id, std::size_t i) const {
  Impl& im = *impl_;
  const std::vector<IndexEntry>& idx = im.index[im.slot(stream_id)];
  if (i >= idx.size()) {
    raise(ErrorCode::IndexOutOfRange,
          "frame " + std::to_string(i) + " of " + std::to_string(idx.size()));
  }
  const std::lock_guard<std::mutex> lock(im.io_mutex);
  im.file.clear();
  im.file.seekg(static_cast<std::streamoff>(idx[i].offset));
  const std::vector<std::uint8_t> head = read_exact(im.file, 14, "record header");
  wire::Cursor c(head.data(), head.size());
  FrameRecord rec;
  rec.stream_id = c.u16();
  rec.timestamp = Timestamp{c.u64()};
  const std::uint32_t len = c.u32();
  if (rec.stream_id != stream_id || rec.timestamp != idx[i].timestamp) {
    raise(ErrorCode::CorruptContainer, "record does not match its index entry");
  }
  if (idx[i].offset + 14 + len > im.footer_offset) {
    raise(ErrorCode::CorruptContainer, "record overruns the records region");
  }
  rec.payload = read_exact(im.file, len, "record payload");
  return rec;
}

namespace {

DepthFrame make_depth_checked(DepthMode mode, const StreamDescriptor& d,
                              std::vector<std::uint16_t> buf, Timestamp t) {
  DepthFrame frame(mode, static_cast<int>(d.width), static_cast<int>(d.height), std::move(buf), t);
  for (const std::uint16_t v : frame.buffer) {
    if (mode == DepthMode::Ahat) {
      if (v > kAhatMaxMm && v != kAhatInvalidCode) {
        raise(ErrorCode::MalformedFrame,
              "AHAT depth code " + std::to_string(v) + " outside [0,999] and not the invalid code");
      }
    } else if (v > kLongThrowMaxMm) {
      raise(ErrorCode::MalformedFrame, "Long Throw depth " + std::to_string(v) + " beyond 7500 mm");
    }
  }
  return frame;
}

std::vector<std::uint16_t> take_u16_plane(wire::Cursor& c, std::size_t pixels) {
  std::vector<std::uint16_t> buf(pixels);
  for (std::uint16_t& v : buf) v = c.u16();
  return buf;
}

}  // namespace

VlcFrame ContainerReader::read_vlc(std::uint16_t stream_id, std::size_t i) const {
  const StreamDescriptor& d = descriptor(stream_id);
  if (!(d.kind == StreamKind::LEFT_FRONT || d.kind == StreamKind::LEFT_LEFT ||
        d.kind == StreamKind::RIGHT_FRONT || d.kind == StreamKind::RIGHT_RIGHT)) {
    raise(ErrorCode::ModeMismatch, "stream is not a VLC camera");
  }
  FrameRecord rec = read_frame(stream_id, i);
  return VlcFrame(std::move(rec.payload), rec.timestamp);
}

LongThrowFrame ContainerReader::read_long_throw(std::uint16_t stream_id, std::size_t i) const {
  const StreamDescriptor& d = descriptor(stream_id);
  if (d.kind != StreamKind::DEPTH_LONG_THROW) {
    raise(ErrorCode::ModeMismatch, "stream is not Long Throw depth");
  }
  const FrameRecord rec = read_frame(stream_id, i);
  const std::size_t pixels = static_cast<std::size_t>(d.width) * d.height;
  wire::Cursor c(rec.payload.data(), rec.payload.size());
  LongThrowFrame out;
  out.depth = make_depth_checked(DepthMode::LongThrow, d, take_u16_plane(c, pixels), rec.timestamp);
  const std::uint8_t* sigma = c.take(pixels);
  out.sigma = SigmaBuffer(static_cast<int>(d.width), static_cast<int>(d.height),
                          std::vector<std::uint8_t>(sigma, sigma + pixels));
  out.ab = AbFrame(DepthMode::LongThrow, static_cast<int>(d.width), static_cast<int>(d.height),
                   take_u16_plane(c, pixels), rec.timestamp);
  return out;
}

AhatFrame ContainerReader::read_ahat(std::uint16_t stream_id, std::size_t i) const {
  const StreamDescriptor& d = descriptor(stream_id);
  if (d.kind != StreamKind::DEPTH_AHAT) raise(ErrorCode::ModeMismatch, "stream is not AHAT depth");
  const FrameRecord rec = read_frame(stream_id, i);
  const std::size_t pixels = static_cast<std::size_t>(d.width) * d.height;
  wire::Cursor c(rec.payload.data(), rec.payload.size());
  AhatFrame out;
  out.depth = make_depth_checked(DepthMode::Ahat, d, take_u16_plane(c, pixels), rec.timestamp);
  out.ab = AbFrame(DepthMode::Ahat, static_cast<int>(d.width), static_cast<int>(d.height),
                   take_u16_plane(c, pixels), rec.timestamp);
  return out;
}

ImuBatch ContainerReader::read_imu(std::uint16_t stream_id, std::size_t i) const {
  const StreamDescriptor& d = descriptor(stream_id);
  ImuKind kind;
  switch (d.kind) {
    case StreamKind::IMU_ACCEL: kind = ImuKind::Accel; break;
    case StreamKind::IMU_GYRO: kind = ImuKind::Gyro; break;
    case StreamKind::IMU_MAG: kind = ImuKind::Mag; break;
    default: raise(ErrorCode::ModeMismatch, "stream is not an IMU stream");
  }
  const FrameRecord rec = read_frame(stream_id, i);
  wire::Cursor c(rec.payload.data(), rec.payload.size());
  const std::uint32_t n = c.u32();
  std::vector<ImuSample> samples;
  samples.reserve(n);
  for (std::uint32_t k = 0; k < n; ++k) {
    ImuSample s;
    s.t = Timestamp{c.u64()};
    s.value.x() = c.f32();
    s.value.y() = c.f32();
    s.value.z() = c.f32();
    samples.push_back(s);
  }
  std::optional<double> temperature;
  if (kind != ImuKind::Mag) temperature = c.f32();
  return ImuBatch(kind, std::move(samples), temperature);
}

PoseSample ContainerReader::read_pose(std::uint16_t stream_id, std::size_t i) const {
  const StreamDescriptor& d = descriptor(stream_id);
  if (d.kind != StreamKind::HEAD_POSE) raise(ErrorCode::ModeMismatch, "stream is not head pose");
  const FrameRecord rec = read_frame(stream_id, i);
  wire::Cursor c(rec.payload.data(), rec.payload.size());
  PoseSample out;
  out.t = rec.timestamp;
  out.world_from_rig = take_transform(c);
  if (!is_rigid(out.world_from_rig, 1e-6)) {
    raise(ErrorCode::MalformedFrame, "stored pose is not a rigid transform");
  }
  return out;
}

GazeSample ContainerReader::read_gaze(std::uint16_t stream_id, std::size_t i) const {
  const StreamDescriptor& d = descriptor(stream_id);
  if (d.kind != StreamKind::GAZE_RAY) raise(ErrorCode::ModeMismatch, "stream is not gaze");
  const FrameRecord rec = read_frame(stream_id, i);
  wire::Cursor c(rec.payload.data(), rec.payload.size());
  GazeSample out;
  out.t = rec.timestamp;
  for (int k = 0; k < 3; ++k) out.origin(k) = c.f64();
  for (int k = 0; k < 3; ++k) out.direction(k) = c.f64();
  if (std::abs(out.direction.norm() - 1.0) > 1e-9) {
    raise(ErrorCode::MalformedFrame, "gaze direction must be unit length");
  }
  return out;
}

HandSample ContainerReader::read_hand(std::uint16_t stream_id, std::size_t i) const {
  const StreamDescriptor& d = descriptor(stream_id);
  if (d.kind != StreamKind::HAND_POSE) raise(ErrorCode::ModeMismatch, "stream is not hand pose");
  const FrameRecord rec = read_frame(stream_id, i);
  wire::Cursor c(rec.payload.data(), rec.payload.size());
  HandSample out;
  out.t = rec.timestamp;
  out.handedness = static_cast<Handedness>(c.u8());
  out.joints.reserve(d.elements);
  for (std::uint32_t k = 0; k < d.elements; ++k) out.joints.push_back(take_transform(c));
  return out;
}

PoseTrajectory ContainerReader::read_pose_trajectory(std::uint16_t stream_id) const {
  PoseTrajectory traj;
  const std::size_t n = frame_count(stream_id);
  for (std::size_t i = 0; i < n; ++i) traj.append(read_pose(stream_id, i));
  return traj;
}

ContainerReader::Cursor::Cursor(const ContainerReader& reader, std::uint16_t stream_id)
    : reader_(&reader), stream_id_(stream_id) {
  reader.impl_->slot(stream_id);  // throws early on unknown streams
}

bool ContainerReader::Cursor::next(FrameRecord& out) {
  if (next_index_ >= reader_->frame_count(stream_id_)) return false;
  out = reader_->read_frame(stream_id_, next_index_);
  ++next_index_;
  return true;
}

ContainerReader::Cursor ContainerReader::cursor(std::uint16_t stream_id) const {
  return Cursor(*this, stream_id);
}

// --- diagnostics ------------------------------------------------------------

namespace {

double invalid_fraction_long_throw(const ContainerReader& r, std::uint16_t id) {
  std::uint64_t invalid = 0;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < r.frame_count(id); ++i) {
    const LongThrowFrame f = r.read_long_throw(id, i);
    for (const std::uint8_t s : f.sigma.buffer) invalid += (s & kSigmaInvalidMask) ? 1 : 0;
    total += f.sigma.buffer.size();
  }
  return total == 0 ? 0.0 : static_cast<double>(invalid) / static_cast<double>(total);
}

double invalid_fraction_ahat(const ContainerReader& r, std::uint16_t id) {
  std::uint64_t invalid = 0;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < r.frame_count(id); ++i) {
    const AhatFrame f = r.read_ahat(id, i);
    for (const std::uint16_t v : f.depth.buffer) invalid += (v > kAhatMaxMm) ? 1 : 0;
    total += f.depth.buffer.size();
  }
  return total == 0 ? 0.0 : static_cast<double>(invalid) / static_cast<double>(total);
}

}  // namespace

InspectReport inspect_container(const std::string& path) {
  const ContainerReader r = ContainerReader::open(path);
  InspectReport report;
  report.path = path;
  report.file_size = static_cast<std::uint64_t>(std::filesystem::file_size(path));
  bool any = false;
  Timestamp lo{~0ull};
  Timestamp hi{0};
  for (const StreamDescriptor& d : r.descriptors()) {
    StreamReport s;
    s.stream_id = d.stream_id;
    s.kind = d.kind;
    s.name = d.friendly_name;
    s.format = d.format;
    s.width = d.width;
    s.height = d.height;
    s.nominal_fps = d.nominal_fps;
    s.record_count = r.frame_count(d.stream_id);
    s.sample_count = s.record_count;
    const std::vector<IndexEntry>& idx = r.index(d.stream_id);
    if (!idx.empty()) {
      s.first = idx.front().timestamp;
      s.last = idx.back().timestamp;
      any = true;
      lo = std::min(lo, s.first);
      hi = std::max(hi, s.last);
    }
    const bool imu = d.kind == StreamKind::IMU_ACCEL || d.kind == StreamKind::IMU_GYRO ||
                     d.kind == StreamKind::IMU_MAG;
    if (imu && !idx.empty()) {
      std::uint64_t samples = 0;
      Timestamp first_sample = idx.front().timestamp;
      Timestamp last_sample = idx.back().timestamp;
      for (std::size_t i = 0; i < idx.size(); ++i) {
        const ImuBatch b = r.read_imu(d.stream_id, i);
        samples += b.samples.size();
        if (i == 0) first_sample = b.samples.front().t;
        if (i + 1 == idx.size()) last_sample = b.samples.back().t;
      }
      s.sample_count = samples;
      const double span = (last_sample.seconds() - first_sample.seconds());
      if (span > 0 && samples > 1) {
        s.estimated_fps = static_cast<double>(samples - 1) / span;
      }
      hi = std::max(hi, last_sample);
    } else if (idx.size() > 1) {
      const double span = s.last.seconds() - s.first.seconds();
      if (span > 0) s.estimated_fps = static_cast<double>(idx.size() - 1) / span;
    }
    if (d.kind == StreamKind::DEPTH_LONG_THROW) {
      s.invalid_pixel_fraction = invalid_fraction_long_throw(r, d.stream_id);
    } else if (d.kind == StreamKind::DEPTH_AHAT) {
      s.invalid_pixel_fraction = invalid_fraction_ahat(r, d.stream_id);
    }
    report.streams.push_back(s);
  }
  if (any) report.duration_s = hi.seconds() - lo.seconds();
  return report;
}

std::string InspectReport::to_text() const {
  std::ostringstream os;
  os << "container " << path << "\n";
  os << "size " << file_size << " bytes, span " << duration_s << " s, " << streams.size()
     << " streams\n";
  char line[256];
  std::snprintf(line, sizeof(line), "%4s %-17s %-18s %-11s %9s %8s %8s %9s %9s %9s\n", "id",
                "kind", "name", "shape", "records", "samples", "fps", "est_fps", "first_s",
                "invalid");
  os << line;
  for (const StreamReport& s : streams) {
    char shape[32];
    if (s.width > 0) {
      std::snprintf(shape, sizeof(shape), "%ux%u", s.width, s.height);
    } else {
      std::snprintf(shape, sizeof(shape), "-");
    }
    std::snprintf(line, sizeof(line),
                  "%4u %-17s %-18s %-11s %9llu %8llu %8.6g %9.6g %9.4f %9.4f\n", s.stream_id,
                  stream_kind_name(s.kind), s.name.c_str(), shape,
                  static_cast<unsigned long long>(s.record_count),
                  static_cast<unsigned long long>(s.sample_count), s.nominal_fps, s.estimated_fps,
                  s.first.seconds(), s.invalid_pixel_fraction);
    os << line;
  }
  return os.str();
}

std::string InspectReport::to_json() const {
  nlohmann::json j;
  j["path"] = path;
  j["file_size"] = file_size;
  j["duration_s"] = duration_s;
  j["streams"] = nlohmann::json::array();
  for (const StreamReport& s : streams) {
    nlohmann::json e;
    e["stream_id"] = s.stream_id;
    e["kind"] = stream_kind_name(s.kind);
    e["name"] = s.name;
    e["width"] = s.width;
    e["height"] = s.height;
    e["record_count"] = s.record_count;
    e["sample_count"] = s.sample_count;
    e["first_ticks"] = s.first.ticks;
    e["last_ticks"] = s.last.ticks;
    e["nominal_fps"] = s.nominal_fps;
    e["estimated_fps"] = s.estimated_fps;
    e["invalid_pixel_fraction"] = s.invalid_pixel_fraction;
    j["streams"].push_back(e);
  }
  return j.dump(2) + "\n";
}

std::vector<std::string> check_container(const std::string& path) {
  std::vector<std::string> problems;
  std::optional<ContainerReader> reader;
  try {
    reader = ContainerReader::open(path);
  } catch (const Error& e) {
    problems.push_back(e.what());
    return problems;
  }
  const ContainerReader& r = *reader;
  for (const StreamDescriptor& d : r.descriptors()) {
    try {
      check_descriptor(d);
    } catch (const Error& e) {
      problems.push_back("stream " + std::to_string(d.stream_id) + ": " + e.what());
      continue;
    }
    for (std::size_t i = 0; i < r.frame_count(d.stream_id); ++i) {
      try {
        const FrameRecord rec = r.read_frame(d.stream_id, i);
        if (rec.payload.size() != expected_payload_size(d, rec.payload)) {
          raise(ErrorCode::PayloadSizeMismatch, "payload size mismatch");
        }
        switch (d.kind) {
          case StreamKind::LEFT_FRONT:
          case StreamKind::LEFT_LEFT:
          case StreamKind::RIGHT_FRONT:
          case StreamKind::RIGHT_RIGHT:
            r.read_vlc(d.stream_id, i);
            break;
          case StreamKind::DEPTH_AHAT:
            r.read_ahat(d.stream_id, i);
            break;
          case StreamKind::DEPTH_LONG_THROW:
            r.read_long_throw(d.stream_id, i);
            break;
          case StreamKind::IMU_ACCEL:
          case StreamKind::IMU_GYRO:
          case StreamKind::IMU_MAG:
            r.read_imu(d.stream_id, i);
            break;
          case StreamKind::HEAD_POSE:
            r.read_pose(d.stream_id, i);
            break;
          case StreamKind::HAND_POSE:
            r.read_hand(d.stream_id, i);
            break;
          case StreamKind::GAZE_RAY:
            r.read_gaze(d.stream_id, i);
            break;
          case StreamKind::RESERVED:
            break;
        }
      } catch (const Error& e) {
        problems.push_back("stream " + std::to_string(d.stream_id) + " frame " +
                           std::to_string(i) + ": " + e.what());
      }
    }
  }
  return problems;
}

void export_streams(const std::string& path, const std::string& out_dir) {
  const ContainerReader r = ContainerReader::open(path);
  std::filesystem::create_directories(out_dir);
  for (const StreamDescriptor& d : r.descriptors()) {
    const std::string stem = out_dir + "/stream_" + std::to_string(d.stream_id) + "_" +
                             stream_kind_name(d.kind);
    std::ofstream bin(stem + ".bin", std::ios::binary);
    std::ofstream ts(stem + "_timestamps.txt");
    if (!bin || !ts) raise(ErrorCode::IoError, "cannot create export files under " + out_dir);
    ContainerReader::Cursor cur = r.cursor(d.stream_id);
    FrameRecord rec;
    while (cur.next(rec)) {
      bin.write(reinterpret_cast<const char*>(rec.payload.data()),
                static_cast<std::streamsize>(rec.payload.size()));
      ts << rec.timestamp.ticks << "\n";
    }
    if (!bin || !ts) raise(ErrorCode::IoError, "export write failed under " + out_dir);
  }
}

}  // namespace rigkit
