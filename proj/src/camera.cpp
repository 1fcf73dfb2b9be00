#include "rigkit/camera.hpp"

#include <cmath>

#include <Eigen/Dense>

namespace rigkit {

Vec2d distort(const DistortionParams& d, const Vec2d& u) {
  const double x = u.x();
  const double y = u.y();
  const double r2 = x * x + y * y;
  const double radial = 1.0 + r2 * (d.k1 + r2 * (d.k2 + r2 * d.k3));
  const double xd = x * radial + 2.0 * d.p1 * x * y + d.p2 * (r2 + 2.0 * x * x);
  const double yd = y * radial + d.p1 * (r2 + 2.0 * y * y) + 2.0 * d.p2 * x * y;
  return {xd, yd};
}

namespace {

// Jacobian of distort with respect to the undistorted point.
Eigen::Matrix2d distort_jacobian(const DistortionParams& d, const Vec2d& u) {
  const double x = u.x();
  const double y = u.y();
  const double r2 = x * x + y * y;
  const double radial = 1.0 + r2 * (d.k1 + r2 * (d.k2 + r2 * d.k3));
  const double dradial = d.k1 + r2 * (2.0 * d.k2 + 3.0 * d.k3 * r2);
  Eigen::Matrix2d j;
  j(0, 0) = radial + x * (2.0 * x * dradial) + 2.0 * d.p1 * y + 6.0 * d.p2 * x;
  j(0, 1) = x * (2.0 * y * dradial) + 2.0 * d.p1 * x + 2.0 * d.p2 * y;
  j(1, 0) = y * (2.0 * x * dradial) + 2.0 * d.p1 * x + 2.0 * d.p2 * y;
  j(1, 1) = radial + y * (2.0 * y * dradial) + 6.0 * d.p1 * y + 2.0 * d.p2 * x;
  return j;
}

}  // namespace

Vec2d undistort(const DistortionParams& d, const Vec2d& distorted) {
  Vec2d u = distorted;
  for (int it = 0; it < 50; ++it) {
    const Vec2d residual = distort(d, u) - distorted;
    if (residual.lpNorm<Eigen::Infinity>() < 1e-14) break;
    Vec2d step = distort_jacobian(d, u).partialPivLu().solve(residual);
    // Damp steps that overshoot; the polynomial is gentle near the image.
    const double max_step = 0.5;
    const double n = step.lpNorm<Eigen::Infinity>();
    if (n > max_step) step *= max_step / n;
    u -= step;
  }
  return u;
}

CameraModel::CameraModel(int width, int height, std::vector<Vec2f> unit_plane_lut,
                         std::optional<DistortionParams> params)
    : width_(width), height_(height), lut_(std::move(unit_plane_lut)), params_(std::move(params)) {
  if (width_ < 2 || height_ < 2) {
    raise(ErrorCode::DimensionMismatch, "camera model needs at least 2x2 pixels");
  }
  if (lut_.size() != static_cast<std::size_t>(width_) * height_) {
    raise(ErrorCode::DimensionMismatch, "unit-plane LUT size does not match width*height");
  }
  for (const Vec2f& v : lut_) {
    if (!v.allFinite()) raise(ErrorCode::DomainError, "unit-plane LUT entry not finite");
  }
  const Vec2f& center = lut_[static_cast<std::size_t>(height_ / 2) * width_ + width_ / 2];
  if (center.norm() >= 1.0f) {
    raise(ErrorCode::DomainError, "center-of-image LUT entry magnitude must be < 1");
  }
}

CameraModel CameraModel::from_params(int width, int height, const DistortionParams& params) {
  if (params.fx <= 0 || params.fy <= 0) {
    raise(ErrorCode::DomainError, "focal lengths must be positive");
  }
  std::vector<Vec2f> lut(static_cast<std::size_t>(width) * height);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const Vec2d pd{((c + 0.5) - params.cx) / params.fx, ((r + 0.5) - params.cy) / params.fy};
      const Vec2d u = undistort(params, pd);
      lut[static_cast<std::size_t>(r) * width + c] = u.cast<float>();
      // The generator and the forward model must agree on the unit plane.
      if ((distort(params, u) - pd).norm() > 1e-6) {
        raise(ErrorCode::DomainError, "distortion polynomial not invertible over the image");
      }
    }
  }
  return CameraModel(width, height, std::move(lut), params);
}

Vec2d map_image_point_to_unit_plane(const CameraModel& cam, const Vec2d& pixel) {
  const double u = pixel.x();
  const double v = pixel.y();
  if (!(u >= 0.0 && u < cam.width() && v >= 0.0 && v < cam.height())) {
    raise(ErrorCode::OutOfBounds, "pixel outside image rectangle");
  }
  // LUT cells sit at pixel centers; clamp the base cell and let the weights
  // extrapolate linearly over the outer half-pixel border.
  const double fu = u - 0.5;
  const double fv = v - 0.5;
  int c0 = static_cast<int>(std::floor(fu));
  int r0 = static_cast<int>(std::floor(fv));
  c0 = std::min(std::max(c0, 0), cam.width() - 2);
  r0 = std::min(std::max(r0, 0), cam.height() - 2);
  const double wu = fu - c0;
  const double wv = fv - r0;
  const Vec2d v00 = cam.lut_at(c0, r0);
  const Vec2d v10 = cam.lut_at(c0 + 1, r0);
  const Vec2d v01 = cam.lut_at(c0, r0 + 1);
  const Vec2d v11 = cam.lut_at(c0 + 1, r0 + 1);
  return (1.0 - wv) * ((1.0 - wu) * v00 + wu * v10) + wv * ((1.0 - wu) * v01 + wu * v11);
}

Vec3d ray_from_pixel(const CameraModel& cam, const Vec2d& pixel) {
  const Vec2d xy = map_image_point_to_unit_plane(cam, pixel);
  return Vec3d(xy.x(), xy.y(), 1.0).normalized();
}

namespace {

bool in_image(const CameraModel& cam, const Vec2d& px) {
  return px.x() >= 0.0 && px.x() < cam.width() && px.y() >= 0.0 && px.y() < cam.height();
}

Vec2d lut_interp_unchecked(const CameraModel& cam, double u, double v) {
  const double fu = u - 0.5;
  const double fv = v - 0.5;
  int c0 = static_cast<int>(std::floor(fu));
  int r0 = static_cast<int>(std::floor(fv));
  c0 = std::min(std::max(c0, 0), cam.width() - 2);
  r0 = std::min(std::max(r0, 0), cam.height() - 2);
  const double wu = fu - c0;
  const double wv = fv - r0;
  const Vec2d v00 = cam.lut_at(c0, r0);
  const Vec2d v10 = cam.lut_at(c0 + 1, r0);
  const Vec2d v01 = cam.lut_at(c0, r0 + 1);
  const Vec2d v11 = cam.lut_at(c0 + 1, r0 + 1);
  return (1.0 - wv) * ((1.0 - wu) * v00 + wu * v10) + wv * ((1.0 - wu) * v01 + wu * v11);
}

// Newton search for the pixel whose interpolated LUT value equals target.
// Used when no parametric model is stored.
std::optional<Vec2d> lut_search(const CameraModel& cam, const Vec2d& target) {
  Vec2d px(cam.width() * 0.5, cam.height() * 0.5);
  const double step_px = 1.0;
  for (int it = 0; it < 50; ++it) {
    const Vec2d f = lut_interp_unchecked(cam, px.x(), px.y()) - target;
    if (f.norm() < 1e-10) break;
    // Finite-difference Jacobian on the LUT grid.
    const Vec2d fx = lut_interp_unchecked(cam, px.x() + step_px, px.y()) -
                     lut_interp_unchecked(cam, px.x() - step_px, px.y());
    const Vec2d fy = lut_interp_unchecked(cam, px.x(), px.y() + step_px) -
                     lut_interp_unchecked(cam, px.x(), px.y() - step_px);
    Eigen::Matrix2d j;
    j.col(0) = fx / (2.0 * step_px);
    j.col(1) = fy / (2.0 * step_px);
    const Vec2d delta = j.partialPivLu().solve(f);
    if (!delta.allFinite()) return std::nullopt;
    px -= delta;
    // Allow a margin outside the rectangle while iterating.
    px.x() = std::min(std::max(px.x(), -2.0), cam.width() + 2.0);
    px.y() = std::min(std::max(px.y(), -2.0), cam.height() + 2.0);
  }
  if ((lut_interp_unchecked(cam, px.x(), px.y()) - target).norm() > 1e-8) return std::nullopt;
  return px;
}

}  // namespace

std::optional<Vec2d> try_project(const CameraModel& cam, const Vec3d& p) {
  if (p.z() <= 0.0) return std::nullopt;
  const Vec2d unit(p.x() / p.z(), p.y() / p.z());
  if (cam.params()) {
    const DistortionParams& d = *cam.params();
    const Vec2d pd = distort(d, unit);
    const Vec2d px(d.fx * pd.x() + d.cx, d.fy * pd.y() + d.cy);
    if (!in_image(cam, px)) return std::nullopt;
    return px;
  }
  const std::optional<Vec2d> px = lut_search(cam, unit);
  if (!px || !in_image(cam, *px)) return std::nullopt;
  return px;
}

Vec2d map_camera_space_to_image_point(const CameraModel& cam, const Vec3d& p) {
  if (p.z() <= 0.0) raise(ErrorCode::BehindCamera, "point has non-positive z");
  const std::optional<Vec2d> px = try_project(cam, p);
  if (!px) raise(ErrorCode::OutOfView, "projection falls outside the image");
  return *px;
}

}  // namespace rigkit
