#pragma once

#include <cstdint>
#include <vector>

#include "rigkit/transform.hpp"
#include "rigkit/types.hpp"

namespace rigkit {

/// Eye-gaze ray sample. On the wire the ray is expressed in the rig frame;
/// bundle assembly moves it to the world frame.
struct GazeSample {
  Timestamp t;
  Vec3d origin = Vec3d::Zero();
  Vec3d direction = Vec3d::UnitZ();  // unit length
};

enum class Handedness : std::uint8_t { Left = 0, Right = 1 };

inline constexpr std::uint32_t kDefaultHandJointCount = 26;

/// Articulated-hand sample: one rigid transform per joint, rig frame on
/// the wire. The joint count is fixed by the stream descriptor.
struct HandSample {
  Timestamp t;
  Handedness handedness = Handedness::Right;
  std::vector<RigidTransformd> joints;
};

}  // namespace rigkit
