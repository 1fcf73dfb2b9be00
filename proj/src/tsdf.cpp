#include "rigkit/tsdf.hpp"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <thread>

#include "wire.hpp"

namespace rigkit {

namespace {

constexpr char kVolumeMagic[4] = {'R', 'M', 'T', 'V'};
constexpr std::uint16_t kVolumeVersion = 1;

int resolve_threads(int threads, std::size_t work_items) {
  if (threads <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    threads = hw == 0 ? 1 : static_cast<int>(hw);
  }
  return static_cast<int>(std::min<std::size_t>(threads, std::max<std::size_t>(work_items, 1)));
}

}  // namespace

TsdfVolume make_tsdf_volume(const Vec3d& origin, double voxel_size,
                            const std::array<int, 3>& dims, double truncation,
                            double max_weight) {
  if (!(voxel_size > 0) || !(truncation > 0) || !(max_weight >= 1)) {
    raise(ErrorCode::DomainError, "voxel size and truncation must be positive, max weight >= 1");
  }
  if (dims[0] <= 0 || dims[1] <= 0 || dims[2] <= 0) {
    raise(ErrorCode::DomainError, "volume dimensions must be positive");
  }
  TsdfVolume vol;
  vol.origin = origin;
  vol.voxel_size = voxel_size;
  vol.dims = dims;
  vol.truncation = truncation;
  vol.max_weight = max_weight;
  vol.tsdf.assign(vol.voxel_count(), 1.0f);
  vol.weight.assign(vol.voxel_count(), 0.0f);
  return vol;
}

void fill_sphere_sdf(TsdfVolume& vol, const Vec3d& center, double radius) {
  if (!(radius > 0)) raise(ErrorCode::DomainError, "sphere radius must be positive");
  for (int k = 0; k < vol.dims[2]; ++k) {
    for (int j = 0; j < vol.dims[1]; ++j) {
      for (int i = 0; i < vol.dims[0]; ++i) {
        const double sdf = (vol.voxel_center(i, j, k) - center).norm() - radius;
        const double t = std::clamp(sdf / vol.truncation, -1.0, 1.0);
        const std::size_t at = vol.index(i, j, k);
        vol.tsdf[at] = static_cast<float>(t);
        vol.weight[at] = 1.0f;
      }
    }
  }
}

void tsdf_integrate(TsdfVolume& vol, const DecodedDepth& depth, const CameraModel& cam,
                    const RigidTransformd& world_from_camera, int threads) {
  if (depth.width != cam.width() || depth.height != cam.height()) {
    raise(ErrorCode::DimensionMismatch, "depth frame shape differs from the camera model");
  }
  if (!is_rigid(world_from_camera)) {
    raise(ErrorCode::DomainError, "integration pose must be rigid");
  }
  const RigidTransformd camera_from_world = invert(world_from_camera);
  const double mu = vol.truncation;
  const float wmax = static_cast<float>(vol.max_weight);

  // Each voxel is updated independently, so slicing the volume along z is
  // deterministic regardless of the thread count.
  const int nz = vol.dims[2];
  const int n_threads = resolve_threads(threads, static_cast<std::size_t>(nz));
  auto integrate_slab = [&](int k_begin, int k_end) {
    for (int k = k_begin; k < k_end; ++k) {
      for (int j = 0; j < vol.dims[1]; ++j) {
        for (int i = 0; i < vol.dims[0]; ++i) {
          const Vec3d v_cam = camera_from_world * vol.voxel_center(i, j, k);
          if (v_cam.z() <= 0) continue;
          const std::optional<Vec2d> px = try_project(cam, v_cam);
          if (!px) continue;
          const int col = static_cast<int>(std::floor(px->x()));
          const int row = static_cast<int>(std::floor(px->y()));
          if (col < 0 || col >= depth.width || row < 0 || row >= depth.height) continue;
          const std::size_t pixel = static_cast<std::size_t>(row) * depth.width + col;
          if (!depth.valid[pixel]) continue;
          const double sdf = depth.range_m[pixel] - v_cam.norm();
          if (!(sdf > -mu)) continue;
          const float t = static_cast<float>(std::clamp(sdf / mu, -1.0, 1.0));
          const std::size_t at = vol.index(i, j, k);
          const float w = vol.weight[at];
          vol.tsdf[at] = (w * vol.tsdf[at] + t) / (w + 1.0f);
          vol.weight[at] = std::min(w + 1.0f, wmax);
        }
      }
    }
  };

  if (n_threads <= 1) {
    integrate_slab(0, nz);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  const int per = (nz + n_threads - 1) / n_threads;
  for (int t = 0; t < n_threads; ++t) {
    const int k_begin = t * per;
    const int k_end = std::min(nz, k_begin + per);
    if (k_begin >= k_end) break;
    pool.emplace_back(integrate_slab, k_begin, k_end);
  }
  for (std::thread& th : pool) th.join();
}

void save_volume(const TsdfVolume& vol, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::IoError, "cannot create " + path);
  std::vector<std::uint8_t> head;
  wire::put_bytes(head, kVolumeMagic, 4);
  wire::put_u16(head, kVolumeVersion);
  for (int d : vol.dims) wire::put_u32(head, static_cast<std::uint32_t>(d));
  for (int i = 0; i < 3; ++i) wire::put_f64(head, vol.origin(i));
  wire::put_f64(head, vol.voxel_size);
  wire::put_f64(head, vol.truncation);
  wire::put_f64(head, vol.max_weight);

  std::uint32_t crc = static_cast<std::uint32_t>(
      crc32(0, reinterpret_cast<const Bytef*>(head.data()), static_cast<uInt>(head.size())));
  out.write(reinterpret_cast<const char*>(head.data()), static_cast<std::streamsize>(head.size()));
  auto write_plane = [&](const std::vector<float>& v) {
    static_assert(sizeof(float) == 4);
    const auto* bytes = reinterpret_cast<const std::uint8_t*>(v.data());
    const std::size_t len = v.size() * 4;
    crc = static_cast<std::uint32_t>(
        crc32(crc, reinterpret_cast<const Bytef*>(bytes), static_cast<uInt>(len)));
    out.write(reinterpret_cast<const char*>(bytes), static_cast<std::streamsize>(len));
  };
  write_plane(vol.tsdf);
  write_plane(vol.weight);
  std::vector<std::uint8_t> tail;
  wire::put_u32(tail, crc);
  out.write(reinterpret_cast<const char*>(tail.data()), 4);
  out.close();
  if (out.fail()) raise(ErrorCode::IoError, "write failed on " + path);
}

TsdfVolume load_volume(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < 62) raise(ErrorCode::CorruptContainer, "volume file too small");
  const std::uint32_t crc = static_cast<std::uint32_t>(
      crc32(0, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size() - 4)));
  wire::Cursor c(bytes.data(), bytes.size());
  const std::uint8_t* magic = c.take(4);
  if (std::memcmp(magic, kVolumeMagic, 4) != 0) {
    raise(ErrorCode::BadMagic, "not a TSDF volume file");
  }
  const std::uint16_t version = c.u16();
  if (version != kVolumeVersion) {
    raise(ErrorCode::UnsupportedVersion, "volume version " + std::to_string(version));
  }
  TsdfVolume vol;
  for (int& d : vol.dims) {
    const std::uint32_t v = c.u32();
    if (v == 0 || v > (1u << 16)) raise(ErrorCode::CorruptContainer, "implausible volume dims");
    d = static_cast<int>(v);
  }
  for (int i = 0; i < 3; ++i) vol.origin(i) = c.f64();
  vol.voxel_size = c.f64();
  vol.truncation = c.f64();
  vol.max_weight = c.f64();
  if (!(vol.voxel_size > 0) || !(vol.truncation > 0)) {
    raise(ErrorCode::CorruptContainer, "non-positive voxel size or truncation");
  }
  const std::size_t n = vol.voxel_count();
  if (c.remaining() != n * 8 + 4) {
    raise(ErrorCode::CorruptContainer, "volume payload size disagrees with dims");
  }
  vol.tsdf.resize(n);
  vol.weight.resize(n);
  std::memcpy(vol.tsdf.data(), c.take(n * 4), n * 4);
  std::memcpy(vol.weight.data(), c.take(n * 4), n * 4);
  if (c.u32() != crc) raise(ErrorCode::CorruptContainer, "volume CRC mismatch");
  return vol;
}

}  // namespace rigkit
