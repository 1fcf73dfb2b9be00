#pragma once

#include <cstdint>
#include <vector>

#include "rigkit/camera.hpp"
#include "rigkit/frames.hpp"
#include "rigkit/transform.hpp"
#include "rigkit/types.hpp"

namespace rigkit {

enum class FrameTag : std::uint8_t { Camera = 0, Rig = 1, World = 2 };

const char* frame_tag_name(FrameTag tag);

struct PointCloud {
  std::vector<Vec3d> points;
  std::vector<float> intensity;  // empty, or one value per point
  FrameTag frame = FrameTag::Camera;
};

struct Ray {
  Vec3d origin = Vec3d::Zero();
  Vec3d direction = Vec3d::UnitZ();  // unit length to 1e-9
  FrameTag frame = FrameTag::Camera;
};

/// Ray with the direction normalized. Throws DomainError on a zero vector.
Ray make_ray(const Vec3d& origin, const Vec3d& direction, FrameTag frame);

/// Camera-frame cloud from a decoded depth frame: every valid pixel becomes
/// range * normalize((x, y, 1)) with (x, y) read from the unit-plane LUT at
/// the pixel center. Pass the matching AB frame to attach intensities.
/// Throws DimensionMismatch when shapes disagree with the camera model.
PointCloud unproject_depth(const DecodedDepth& depth, const CameraModel& cam);
PointCloud unproject_depth(const DecodedDepth& depth, const AbFrame& ab, const CameraModel& cam);

PointCloud transform_cloud(const PointCloud& cloud, const RigidTransformd& t, FrameTag new_tag);

struct TriangulationResult {
  Vec3d point = Vec3d::Zero();  // midpoint of the shortest inter-ray segment
  double gap = 0.0;             // length of that segment, meters
};

/// Closed-form midpoint triangulation of two rays expressed in one frame.
/// Throws NearParallel when the direction cross product has norm < 1e-9,
/// and DomainError when the rays disagree on their frame or are not unit.
TriangulationResult triangulate_midpoint(const Ray& a, const Ray& b);

}  // namespace rigkit
