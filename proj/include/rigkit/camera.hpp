#pragma once

#include <optional>
#include <vector>

#include "rigkit/types.hpp"

namespace rigkit {

/// Brown-Conrady pinhole parameters. Focal lengths and principal point in
/// pixels, radial k1..k3 and tangential p1,p2 on the unit plane.
struct DistortionParams {
  double fx = 0;
  double fy = 0;
  double cx = 0;
  double cy = 0;
  double k1 = 0;
  double k2 = 0;
  double k3 = 0;
  double p1 = 0;
  double p2 = 0;
};

/// Forward distortion model: undistorted unit-plane point -> distorted.
Vec2d distort(const DistortionParams& params, const Vec2d& undistorted);

/// Inverse of distort, solved by damped Newton iteration.
Vec2d undistort(const DistortionParams& params, const Vec2d& distorted);

/// Camera intrinsics in canonical lookup-table form: one unit-plane point
/// per pixel center, row-major. Entry (r, c) is the intersection with the
/// plane z=1 of the ray through pixel coordinates (c + 0.5, r + 0.5).
/// A parametric generator, when present, was used to build the table and
/// provides the fast projection path.
class CameraModel {
 public:
  CameraModel(int width, int height, std::vector<Vec2f> unit_plane_lut,
              std::optional<DistortionParams> params = std::nullopt);

  /// Builds the LUT by numerically inverting the distortion polynomial at
  /// every pixel center.
  static CameraModel from_params(int width, int height, const DistortionParams& params);

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<Vec2f>& unit_plane_lut() const { return lut_; }
  const std::optional<DistortionParams>& params() const { return params_; }

  /// LUT entry at integer pixel indices, no interpolation.
  Vec2d lut_at(int col, int row) const {
    const Vec2f& v = lut_[static_cast<std::size_t>(row) * width_ + col];
    return Vec2d(v.x(), v.y());
  }

 private:
  int width_;
  int height_;
  std::vector<Vec2f> lut_;
  std::optional<DistortionParams> params_;
};

/// Bilinear interpolation of the unit-plane LUT at continuous pixel
/// coordinates. Throws OutOfBounds unless 0 <= u < width, 0 <= v < height.
Vec2d map_image_point_to_unit_plane(const CameraModel& cam, const Vec2d& pixel);

/// Unit ray through the given pixel: normalize((x, y, 1)).
Vec3d ray_from_pixel(const CameraModel& cam, const Vec2d& pixel);

/// Projects a camera-space point to continuous pixel coordinates.
/// Throws BehindCamera when z <= 0 and OutOfView when the projection
/// falls outside the image rectangle.
Vec2d map_camera_space_to_image_point(const CameraModel& cam, const Vec3d& p);

/// Non-throwing projection; empty when behind the camera or out of view.
std::optional<Vec2d> try_project(const CameraModel& cam, const Vec3d& p);

}  // namespace rigkit
