#include "rigkit/trajectory.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

namespace rigkit {

PoseTrajectory::PoseTrajectory(std::vector<PoseSample> samples) : samples_(std::move(samples)) {
  for (std::size_t i = 1; i < samples_.size(); ++i) {
    if (!(samples_[i - 1].t < samples_[i].t)) {
      raise(ErrorCode::NonMonotonicTimestamp, "trajectory timestamps must strictly increase");
    }
  }
}

void PoseTrajectory::append(const PoseSample& sample) {
  if (!samples_.empty() && !(samples_.back().t < sample.t)) {
    raise(ErrorCode::NonMonotonicTimestamp, "trajectory timestamps must strictly increase");
  }
  samples_.push_back(sample);
}

RigidTransformd locate_rig_at(const PoseTrajectory& traj, Timestamp t, bool* clamped) {
  if (clamped != nullptr) *clamped = false;
  if (traj.empty()) raise(ErrorCode::EmptyTrajectory, "cannot locate on an empty trajectory");
  const std::vector<PoseSample>& s = traj.samples();
  if (t <= s.front().t) {
    if (clamped != nullptr) *clamped = (t < s.front().t);
    return s.front().world_from_rig;
  }
  if (t >= s.back().t) {
    if (clamped != nullptr) *clamped = (t > s.back().t);
    return s.back().world_from_rig;
  }
  const auto it = std::lower_bound(
      s.begin(), s.end(), t, [](const PoseSample& a, Timestamp ts) { return a.t < ts; });
  if (it->t == t) return it->world_from_rig;
  const PoseSample& hi = *it;
  const PoseSample& lo = *(it - 1);
  const double alpha = static_cast<double>(t.ticks - lo.t.ticks) /
                       static_cast<double>(hi.t.ticks - lo.t.ticks);
  return interpolate(lo.world_from_rig, hi.world_from_rig, alpha);
}

void save_trajectory(const std::string& path, const PoseTrajectory& traj) {
  std::ofstream os(path);
  if (!os) raise(ErrorCode::IoError, "cannot open " + path + " for writing");
  for (const PoseSample& s : traj.samples()) {
    const Eigen::Quaterniond q = s.world_from_rig.quaternion();
    const Vec3d& t = s.world_from_rig.translation;
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%llu %.9g %.9g %.9g %.9g %.9g %.9g %.9g\n",
                  static_cast<unsigned long long>(s.t.ticks), t.x(), t.y(), t.z(), q.x(), q.y(),
                  q.z(), q.w());
    os << buf;
  }
  if (!os) raise(ErrorCode::IoError, "failed writing " + path);
}

PoseTrajectory load_trajectory(const std::string& path) {
  std::ifstream is(path);
  if (!is) raise(ErrorCode::IoError, "cannot open " + path);
  PoseTrajectory traj;
  unsigned long long ticks = 0;
  double tx, ty, tz, qx, qy, qz, qw;
  while (is >> ticks >> tx >> ty >> tz >> qx >> qy >> qz >> qw) {
    Eigen::Quaterniond q(qw, qx, qy, qz);
    traj.append({Timestamp{ticks},
                 RigidTransformd::from_quaternion(q, Vec3d(tx, ty, tz))});
  }
  if (!is.eof() && is.fail()) raise(ErrorCode::IoError, "malformed trajectory line in " + path);
  return traj;
}

}  // namespace rigkit
