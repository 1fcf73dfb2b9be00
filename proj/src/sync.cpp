#include "rigkit/sync.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace rigkit {

namespace {

void require_sorted(const std::vector<Timestamp>& ts, const char* which) {
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (!(ts[i - 1] < ts[i])) {
      raise(ErrorCode::UnsortedInput,
            std::string(which) + " timestamps must be strictly increasing");
    }
  }
}

std::uint64_t abs_delta(Timestamp a, Timestamp b) {
  return a.ticks > b.ticks ? a.ticks - b.ticks : b.ticks - a.ticks;
}

void append_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  out += buf;
}

void append_pose_3x4(std::string& out, const RigidTransformd& t) {
  out += '[';
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (r != 0 || c != 0) out += ',';
      append_number(out, c < 3 ? t.rotation(r, c) : t.translation(r));
    }
  }
  out += ']';
}

void append_vec3(std::string& out, const Vec3d& v) {
  out += '[';
  append_number(out, v.x());
  out += ',';
  append_number(out, v.y());
  out += ',';
  append_number(out, v.z());
  out += ']';
}

}  // namespace

std::vector<Association> associate_nearest(const std::vector<Timestamp>& reference,
                                           const std::vector<Timestamp>& target,
                                           std::uint64_t tol_ticks) {
  require_sorted(reference, "reference");
  require_sorted(target, "target");
  std::vector<Association> out;
  out.reserve(reference.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    Association a;
    a.ref_index = i;
    if (!target.empty()) {
      // Strict comparison keeps ties on the earlier target.
      while (j + 1 < target.size() &&
             abs_delta(target[j + 1], reference[i]) < abs_delta(target[j], reference[i])) {
        ++j;
      }
      if (abs_delta(target[j], reference[i]) <= tol_ticks) {
        a.match = j;
        a.residual_ticks = ticks_between(reference[i], target[j]);
      }
    }
    out.push_back(a);
  }
  return out;
}

std::uint64_t default_tolerance_ticks(double nominal_fps) {
  if (!(nominal_fps > 0)) raise(ErrorCode::DomainError, "nominal fps must be positive");
  return static_cast<std::uint64_t>(
      std::llround(static_cast<double>(Timestamp::kTicksPerSecond) / (2.0 * nominal_fps)));
}

std::vector<FrameBundle> build_bundles(const ContainerReader& reader,
                                       std::uint16_t ref_stream_id, std::uint64_t tol_ticks,
                                       const PoseTrajectory& trajectory) {
  if (trajectory.empty()) raise(ErrorCode::EmptyTrajectory, "bundles need a pose trajectory");
  const std::vector<Timestamp> ref_ts = reader.timestamps(ref_stream_id);

  std::vector<FrameBundle> bundles(ref_ts.size());
  for (std::size_t i = 0; i < ref_ts.size(); ++i) {
    FrameBundle& b = bundles[i];
    b.ref_stream_id = ref_stream_id;
    b.ref_index = i;
    b.t = ref_ts[i];
    b.world_from_rig = locate_rig_at(trajectory, ref_ts[i], &b.pose_clamped);
  }

  std::vector<const StreamDescriptor*> others;
  for (const StreamDescriptor& d : reader.descriptors()) {
    if (d.stream_id != ref_stream_id && d.kind != StreamKind::HEAD_POSE) others.push_back(&d);
  }
  std::sort(others.begin(), others.end(),
            [](const StreamDescriptor* a, const StreamDescriptor* b) {
              return a->stream_id < b->stream_id;
            });

  for (const StreamDescriptor* d : others) {
    const std::vector<Timestamp> target = reader.timestamps(d->stream_id);
    const std::vector<Association> assoc = associate_nearest(ref_ts, target, tol_ticks);
    for (const Association& a : assoc) {
      if (!a.match) continue;
      FrameBundle& b = bundles[a.ref_index];
      BundleEntry e;
      e.stream_id = d->stream_id;
      e.frame_index = *a.match;
      e.t = target[*a.match];
      e.residual_ticks = a.residual_ticks;
      b.matches.push_back(e);
      // Gaze and hand quantities go to world coordinates with the pose at
      // their own timestamps, not the bundle reference time.
      if (d->kind == StreamKind::GAZE_RAY) {
        GazeSample g = reader.read_gaze(d->stream_id, *a.match);
        const RigidTransformd world_from_rig = locate_rig_at(trajectory, g.t);
        g.origin = world_from_rig * g.origin;
        g.direction = world_from_rig.rotation * g.direction;
        b.world_gaze = g;
      } else if (d->kind == StreamKind::HAND_POSE) {
        HandSample h = reader.read_hand(d->stream_id, *a.match);
        const RigidTransformd world_from_rig = locate_rig_at(trajectory, h.t);
        for (RigidTransformd& joint : h.joints) joint = compose(world_from_rig, joint);
        b.world_hand = std::move(h);
      }
    }
  }
  return bundles;
}

PoseTrajectory resample_trajectory(const PoseTrajectory& traj, std::uint64_t period_ticks) {
  if (traj.empty()) raise(ErrorCode::EmptyTrajectory, "cannot resample an empty trajectory");
  if (period_ticks == 0) raise(ErrorCode::DomainError, "resample period must be positive");
  PoseTrajectory out;
  const std::uint64_t t0 = traj.front().t.ticks;
  const std::uint64_t t1 = traj.back().t.ticks;
  for (std::uint64_t t = t0; t <= t1; t += period_ticks) {
    out.append(PoseSample{Timestamp{t}, locate_rig_at(traj, Timestamp{t})});
  }
  return out;
}

std::string bundle_manifest_line(const FrameBundle& b) {
  std::string line = "{\"ref_stream\":" + std::to_string(b.ref_stream_id) +
                     ",\"ref_index\":" + std::to_string(b.ref_index) +
                     ",\"ticks\":" + std::to_string(b.t.ticks) + ",\"world_from_rig\":";
  append_pose_3x4(line, b.world_from_rig);
  line += ",\"pose_clamped\":";
  line += b.pose_clamped ? "true" : "false";
  line += ",\"matches\":[";
  for (std::size_t i = 0; i < b.matches.size(); ++i) {
    const BundleEntry& e = b.matches[i];
    if (i != 0) line += ',';
    line += "{\"stream\":" + std::to_string(e.stream_id) +
            ",\"index\":" + std::to_string(e.frame_index) +
            ",\"ticks\":" + std::to_string(e.t.ticks) +
            ",\"residual_ticks\":" + std::to_string(e.residual_ticks) + "}";
  }
  line += ']';
  if (b.world_gaze) {
    line += ",\"gaze_world\":{\"ticks\":" + std::to_string(b.world_gaze->t.ticks) +
            ",\"origin\":";
    append_vec3(line, b.world_gaze->origin);
    line += ",\"direction\":";
    append_vec3(line, b.world_gaze->direction);
    line += '}';
  }
  if (b.world_hand) {
    line += ",\"hand_world\":{\"ticks\":" + std::to_string(b.world_hand->t.ticks) +
            ",\"handedness\":\"";
    line += b.world_hand->handedness == Handedness::Left ? "left" : "right";
    line += "\",\"joints\":[";
    for (std::size_t i = 0; i < b.world_hand->joints.size(); ++i) {
      if (i != 0) line += ',';
      append_pose_3x4(line, b.world_hand->joints[i]);
    }
    line += "]}";
  }
  line += '}';
  return line;
}

void write_bundle_manifest(const std::vector<FrameBundle>& bundles, const std::string& path) {
  std::ofstream out(path);
  if (!out) raise(ErrorCode::IoError, "cannot create " + path);
  for (const FrameBundle& b : bundles) out << bundle_manifest_line(b) << "\n";
  if (!out) raise(ErrorCode::IoError, "write failed on " + path);
}

}  // namespace rigkit
