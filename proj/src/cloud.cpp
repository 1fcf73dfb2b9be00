#include "rigkit/cloud.hpp"

#include <cmath>

namespace rigkit {

const char* frame_tag_name(FrameTag tag) {
  switch (tag) {
    case FrameTag::Camera: return "camera";
    case FrameTag::Rig: return "rig";
    case FrameTag::World: return "world";
  }
  return "unknown";
}

Ray make_ray(const Vec3d& origin, const Vec3d& direction, FrameTag frame) {
  const double n = direction.norm();
  if (!(n > 0) || !std::isfinite(n)) {
    raise(ErrorCode::DomainError, "ray direction must be a nonzero finite vector");
  }
  return Ray{origin, direction / n, frame};
}

namespace {

PointCloud unproject(const DecodedDepth& depth, const AbFrame* ab, const CameraModel& cam) {
  if (depth.width != cam.width() || depth.height != cam.height()) {
    raise(ErrorCode::DimensionMismatch, "depth frame shape differs from the camera model");
  }
  if (ab != nullptr && (ab->width != depth.width || ab->height != depth.height)) {
    raise(ErrorCode::DimensionMismatch, "AB frame shape differs from the depth frame");
  }
  PointCloud cloud;
  cloud.frame = FrameTag::Camera;
  std::size_t valid = 0;
  for (const std::uint8_t v : depth.valid) valid += v ? 1 : 0;
  cloud.points.reserve(valid);
  if (ab != nullptr) cloud.intensity.reserve(valid);
  for (int r = 0; r < depth.height; ++r) {
    for (int c = 0; c < depth.width; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * depth.width + c;
      if (!depth.valid[i]) continue;
      const Vec2d xy = cam.lut_at(c, r);
      Vec3d dir(xy.x(), xy.y(), 1.0);
      dir.normalize();
      cloud.points.push_back(dir * depth.range_m[i]);
      if (ab != nullptr) cloud.intensity.push_back(static_cast<float>(ab->buffer[i]));
    }
  }
  return cloud;
}

}  // namespace

PointCloud unproject_depth(const DecodedDepth& depth, const CameraModel& cam) {
  return unproject(depth, nullptr, cam);
}

PointCloud unproject_depth(const DecodedDepth& depth, const AbFrame& ab, const CameraModel& cam) {
  return unproject(depth, &ab, cam);
}

PointCloud transform_cloud(const PointCloud& cloud, const RigidTransformd& t, FrameTag new_tag) {
  PointCloud out;
  out.points.reserve(cloud.points.size());
  for (const Vec3d& p : cloud.points) out.points.push_back(t * p);
  out.intensity = cloud.intensity;
  out.frame = new_tag;
  return out;
}

TriangulationResult triangulate_midpoint(const Ray& a, const Ray& b) {
  if (a.frame != b.frame) {
    raise(ErrorCode::DomainError, "rays must be expressed in the same frame");
  }
  if (std::abs(a.direction.norm() - 1.0) > 1e-9 || std::abs(b.direction.norm() - 1.0) > 1e-9) {
    raise(ErrorCode::DomainError, "ray directions must be unit length");
  }
  if (a.direction.cross(b.direction).norm() < 1e-9) {
    raise(ErrorCode::NearParallel, "rays are parallel to within 1e-9");
  }
  // Minimize |(o_a + s d_a) - (o_b + u d_b)|^2; with unit directions the
  // normal equations are  [1 -c; c -1] [s; u] = [d_a.w; d_b.w], w = o_b - o_a.
  const Vec3d w = b.origin - a.origin;
  const double c = a.direction.dot(b.direction);
  const double det = c * c - 1.0;  // negative: directions are not parallel
  const double s = (c * b.direction.dot(w) - a.direction.dot(w)) / det;
  const double u = (b.direction.dot(w) - c * a.direction.dot(w)) / det;
  const Vec3d pa = a.origin + s * a.direction;
  const Vec3d pb = b.origin + u * b.direction;
  TriangulationResult out;
  out.point = 0.5 * (pa + pb);
  out.gap = (pa - pb).norm();
  return out;
}

}  // namespace rigkit
