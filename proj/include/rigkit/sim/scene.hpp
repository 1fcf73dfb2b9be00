#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "rigkit/types.hpp"

namespace rigkit::sim {

struct PlaneGeom {
  Vec3d point = Vec3d::Zero();
  Vec3d normal = Vec3d::UnitY();  // unit length
};

struct SphereGeom {
  Vec3d center = Vec3d::Zero();
  double radius = 1.0;
};

struct BoxGeom {
  Vec3d center = Vec3d::Zero();
  Vec3d half_extents = Vec3d::Ones();
  Mat3d orientation = Mat3d::Identity();  // world_from_box rotation
};

struct ScenePrimitive {
  std::variant<PlaneGeom, SphereGeom, BoxGeom> geometry;
  double albedo = 0.8;  // in (0, 1]
  std::string name;
};

struct Scene {
  std::vector<ScenePrimitive> primitives;
};

/// Throws DomainError on non-unit plane normals, non-positive extents, or
/// albedo outside (0, 1].
void validate_scene(const Scene& scene);

struct RayHit {
  double t = 0.0;        // meters along the unit direction
  Vec3d normal;          // unit, oriented against the ray
  double albedo = 0.0;
  std::size_t primitive = 0;
};

/// Nearest positive intersection over all primitives, closed form each.
/// Directions must be unit length (not re-checked per call).
std::optional<RayHit> cast_ray(const Scene& scene, const Vec3d& origin, const Vec3d& direction);

/// Reference point of a primitive (plane point, sphere/box center), the
/// aim target for synthesized gaze.
Vec3d primitive_center(const ScenePrimitive& primitive);

}  // namespace rigkit::sim
