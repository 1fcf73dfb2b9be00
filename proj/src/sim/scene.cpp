#include "rigkit/sim/scene.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rigkit::sim {

namespace {

constexpr double kMinHitDistance = 1e-9;

std::optional<double> intersect_plane(const PlaneGeom& g, const Vec3d& o, const Vec3d& d,
                                      Vec3d* normal) {
  const double denom = g.normal.dot(d);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double t = g.normal.dot(g.point - o) / denom;
  if (t <= kMinHitDistance) return std::nullopt;
  *normal = denom < 0 ? g.normal : Vec3d(-g.normal);
  return t;
}

std::optional<double> intersect_sphere(const SphereGeom& g, const Vec3d& o, const Vec3d& d,
                                       Vec3d* normal) {
  const Vec3d oc = o - g.center;
  const double b = oc.dot(d);
  const double c = oc.squaredNorm() - g.radius * g.radius;
  const double disc = b * b - c;
  if (disc < 0) return std::nullopt;
  const double root = std::sqrt(disc);
  double t = -b - root;
  if (t <= kMinHitDistance) t = -b + root;
  if (t <= kMinHitDistance) return std::nullopt;
  Vec3d n = (o + t * d - g.center) / g.radius;
  if (n.dot(d) > 0) n = -n;  // exiting hit, seen from inside
  *normal = n;
  return t;
}

std::optional<double> intersect_box(const BoxGeom& g, const Vec3d& o, const Vec3d& d,
                                    Vec3d* normal) {
  // Slab test in the box frame.
  const Vec3d ob = g.orientation.transpose() * (o - g.center);
  const Vec3d db = g.orientation.transpose() * d;
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int near_axis = -1;
  double near_sign = 1.0;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(db(a)) < 1e-12) {
      if (std::abs(ob(a)) > g.half_extents(a)) return std::nullopt;
      continue;
    }
    double t0 = (-g.half_extents(a) - ob(a)) / db(a);
    double t1 = (g.half_extents(a) - ob(a)) / db(a);
    double sign = -1.0;
    if (t0 > t1) {
      std::swap(t0, t1);
      sign = 1.0;
    }
    if (t0 > t_near) {
      t_near = t0;
      near_axis = a;
      near_sign = sign;
    }
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return std::nullopt;
  }
  double t = t_near;
  if (t <= kMinHitDistance) t = t_far;
  if (t <= kMinHitDistance || near_axis < 0) return std::nullopt;
  Vec3d nb = Vec3d::Zero();
  nb(near_axis) = near_sign;
  Vec3d n = g.orientation * nb;
  if (n.dot(d) > 0) n = -n;
  *normal = n;
  return t;
}

}  // namespace

void validate_scene(const Scene& scene) {
  for (const ScenePrimitive& p : scene.primitives) {
    if (!(p.albedo > 0) || !(p.albedo <= 1)) {
      raise(ErrorCode::DomainError, "albedo must lie in (0, 1]");
    }
    if (const auto* plane = std::get_if<PlaneGeom>(&p.geometry)) {
      if (std::abs(plane->normal.norm() - 1.0) > 1e-9) {
        raise(ErrorCode::DomainError, "plane normals must be unit length");
      }
    } else if (const auto* sphere = std::get_if<SphereGeom>(&p.geometry)) {
      if (!(sphere->radius > 0)) raise(ErrorCode::DomainError, "sphere radius must be positive");
    } else if (const auto* box = std::get_if<BoxGeom>(&p.geometry)) {
      if (!(box->half_extents.minCoeff() > 0)) {
        raise(ErrorCode::DomainError, "box half extents must be positive");
      }
      if ((box->orientation.transpose() * box->orientation - Mat3d::Identity())
              .cwiseAbs()
              .maxCoeff() > 1e-9) {
        raise(ErrorCode::DomainError, "box orientation must be a rotation");
      }
    }
  }
}

std::optional<RayHit> cast_ray(const Scene& scene, const Vec3d& origin, const Vec3d& direction) {
  std::optional<RayHit> best;
  for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
    const ScenePrimitive& p = scene.primitives[i];
    Vec3d normal;
    std::optional<double> t;
    if (const auto* plane = std::get_if<PlaneGeom>(&p.geometry)) {
      t = intersect_plane(*plane, origin, direction, &normal);
    } else if (const auto* sphere = std::get_if<SphereGeom>(&p.geometry)) {
      t = intersect_sphere(*sphere, origin, direction, &normal);
    } else if (const auto* box = std::get_if<BoxGeom>(&p.geometry)) {
      t = intersect_box(*box, origin, direction, &normal);
    }
    if (t && (!best || *t < best->t)) {
      best = RayHit{*t, normal, p.albedo, i};
    }
  }
  return best;
}

Vec3d primitive_center(const ScenePrimitive& primitive) {
  if (const auto* plane = std::get_if<PlaneGeom>(&primitive.geometry)) return plane->point;
  if (const auto* sphere = std::get_if<SphereGeom>(&primitive.geometry)) return sphere->center;
  return std::get<BoxGeom>(primitive.geometry).center;
}

}  // namespace rigkit::sim
