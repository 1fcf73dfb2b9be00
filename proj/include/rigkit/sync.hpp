#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rigkit/container.hpp"
#include "rigkit/records.hpp"
#include "rigkit/trajectory.hpp"
#include "rigkit/types.hpp"

namespace rigkit {

/// One reference timestamp matched (or not) against a target stream.
struct Association {
  std::size_t ref_index = 0;
  std::optional<std::size_t> match;       // index into the target list
  std::int64_t residual_ticks = 0;        // t_target - t_ref, zero when unmatched
};

/// Nearest-neighbor matching of two sorted timestamp lists in one linear
/// scan. Each reference timestamp is matched to the closest target within
/// tol_ticks; a target may serve several references. Ties between two
/// equidistant targets resolve to the earlier one. Throws UnsortedInput
/// unless both lists are strictly increasing.
std::vector<Association> associate_nearest(const std::vector<Timestamp>& reference,
                                           const std::vector<Timestamp>& target,
                                           std::uint64_t tol_ticks);

/// Half the nominal frame period, the default association tolerance.
std::uint64_t default_tolerance_ticks(double nominal_fps);

struct BundleEntry {
  std::uint16_t stream_id = 0;
  std::size_t frame_index = 0;
  Timestamp t;
  std::int64_t residual_ticks = 0;
};

/// A reference frame, its temporally associated frames from every other
/// stream, and the interpolated rig pose at the reference timestamp.
/// Gaze and hand records, when matched, are additionally carried in world
/// coordinates using the pose at their own timestamps.
struct FrameBundle {
  std::uint16_t ref_stream_id = 0;
  std::size_t ref_index = 0;
  Timestamp t;
  RigidTransformd world_from_rig = RigidTransformd::identity();
  bool pose_clamped = false;
  std::vector<BundleEntry> matches;  // ascending stream id
  std::optional<GazeSample> world_gaze;
  std::optional<HandSample> world_hand;
};

/// One bundle per frame of the reference stream. Every other stream except
/// HEAD_POSE (the pose comes from the trajectory) contributes its nearest
/// frame within tol_ticks. Throws UnknownStream / EmptyTrajectory.
std::vector<FrameBundle> build_bundles(const ContainerReader& reader,
                                       std::uint16_t ref_stream_id, std::uint64_t tol_ticks,
                                       const PoseTrajectory& trajectory);

/// Uniform resampling of a trajectory from its first timestamp at the given
/// period, covering the original span. Throws EmptyTrajectory, DomainError.
PoseTrajectory resample_trajectory(const PoseTrajectory& traj, std::uint64_t period_ticks);

/// Bundle manifest: one JSON object per line, stable key order, poses as
/// row-major 3x4 matrices with 9 significant digits.
std::string bundle_manifest_line(const FrameBundle& bundle);
void write_bundle_manifest(const std::vector<FrameBundle>& bundles, const std::string& path);

}  // namespace rigkit
