#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rigkit/camera.hpp"
#include "rigkit/frames.hpp"
#include "rigkit/transform.hpp"
#include "rigkit/types.hpp"

namespace rigkit {

/// Dense truncated signed distance field on a regular world-aligned grid.
/// `origin` is the world position of the minimum corner; the center of
/// voxel (i, j, k) sits at origin + voxel_size * (i + 0.5, j + 0.5, k + 0.5).
/// weight == 0 marks a voxel that was never observed.
struct TsdfVolume {
  Vec3d origin = Vec3d::Zero();
  double voxel_size = 0.02;
  std::array<int, 3> dims = {0, 0, 0};
  double truncation = 0.08;  // mu, meters
  double max_weight = 64.0;
  std::vector<float> tsdf;    // x fastest, then y, then z; values in [-1, 1]
  std::vector<float> weight;  // same layout, >= 0

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * dims[1] + j) * dims[0] + i;
  }
  Vec3d voxel_center(int i, int j, int k) const {
    return origin + voxel_size * Vec3d(i + 0.5, j + 0.5, k + 0.5);
  }
};

/// Fresh volume with tsdf 1 and weight 0 everywhere. Throws DomainError on
/// non-positive sizes.
TsdfVolume make_tsdf_volume(const Vec3d& origin, double voxel_size,
                            const std::array<int, 3>& dims, double truncation,
                            double max_weight = 64.0);

/// Fills the volume with an analytic signed distance to a sphere, clamped
/// to [-1, 1] in truncation units, all weights 1. Ground-truth fixture for
/// surface-extraction checks.
void fill_sphere_sdf(TsdfVolume& vol, const Vec3d& center, double radius);

/// Projective TSDF update from one depth frame. Depth is radial range: for
/// a voxel center v seen at pixel p with range d, sdf = d - |v_camera|,
/// updated when sdf > -truncation using a running weighted mean with frame
/// weight 1, capped at max_weight. Nearest-neighbor depth lookup; voxels
/// out of view or behind the camera are skipped. Deterministic for any
/// thread count (threads <= 0 picks the hardware concurrency).
void tsdf_integrate(TsdfVolume& vol, const DecodedDepth& depth, const CameraModel& cam,
                    const RigidTransformd& world_from_camera, int threads = 0);

/// Binary volume file ("RMTV", little-endian, CRC-32 trailer).
void save_volume(const TsdfVolume& vol, const std::string& path);
TsdfVolume load_volume(const std::string& path);

}  // namespace rigkit
