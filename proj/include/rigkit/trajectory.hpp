#pragma once

#include <string>
#include <vector>

#include "rigkit/transform.hpp"
#include "rigkit/types.hpp"

namespace rigkit {

struct PoseSample {
  Timestamp t;
  RigidTransformd world_from_rig;
};

/// Time-ordered rig poses in a fixed world frame. Timestamps are strictly
/// increasing; queries clamp outside the sampled range.
class PoseTrajectory {
 public:
  PoseTrajectory() = default;
  explicit PoseTrajectory(std::vector<PoseSample> samples);

  /// Throws NonMonotonicTimestamp unless t exceeds the last sample's time.
  void append(const PoseSample& sample);

  bool empty() const { return samples_.empty(); }
  std::size_t size() const { return samples_.size(); }
  const std::vector<PoseSample>& samples() const { return samples_; }
  const PoseSample& front() const { return samples_.front(); }
  const PoseSample& back() const { return samples_.back(); }

 private:
  std::vector<PoseSample> samples_;
};

/// Pose at time t: the exact sample when t matches, otherwise slerp for
/// rotation and linear interpolation for translation between the
/// bracketing samples. Outside the sampled range the nearest endpoint is
/// returned and *clamped (when given) is set. Throws EmptyTrajectory.
RigidTransformd locate_rig_at(const PoseTrajectory& traj, Timestamp t, bool* clamped = nullptr);

/// Text trajectory file: one `ticks tx ty tz qx qy qz qw` line per pose,
/// nine significant digits.
void save_trajectory(const std::string& path, const PoseTrajectory& traj);
PoseTrajectory load_trajectory(const std::string& path);

}  // namespace rigkit
