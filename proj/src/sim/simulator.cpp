#include "rigkit/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <thread>

#include <json.hpp>

namespace rigkit::sim {

namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

// Fixed directional light for VLC shading, pointing from the light into
// the scene, plus a headlight term so frontal surfaces dim toward grazing
// view angles.
const Vec3d kLightWorld = Vec3d(-0.4, -1.0, -0.3).normalized();
constexpr double kAmbient = 0.15;
constexpr double kHeadlight = 0.55;
constexpr double kDirectional = 0.30;

int resolve_threads(int threads, int rows) {
  if (threads <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    threads = hw == 0 ? 1 : static_cast<int>(hw);
  }
  return std::max(1, std::min(threads, rows));
}

void parallel_rows(int height, int threads, const std::function<void(int, int)>& body) {
  const int n = resolve_threads(threads, height);
  if (n <= 1) {
    body(0, height);
    return;
  }
  std::vector<std::thread> pool;
  const int per = (height + n - 1) / n;
  for (int t = 0; t < n; ++t) {
    const int begin = t * per;
    const int end = std::min(height, begin + per);
    if (begin >= end) break;
    pool.emplace_back(body, begin, end);
  }
  for (std::thread& th : pool) th.join();
}

}  // namespace

void StreamRates::validate() const {
  for (const double r : {vlc_fps, ahat_fps, long_throw_fps, accel_hz, gyro_hz, mag_hz}) {
    if (!(r > 0)) raise(ErrorCode::DomainError, "stream rates must be positive");
  }
}

std::uint64_t frame_count_for(double fps, double duration_s) {
  if (!(fps > 0) || !(duration_s > 0)) {
    raise(ErrorCode::DomainError, "fps and duration must be positive");
  }
  return static_cast<std::uint64_t>(std::ceil(fps * duration_s - 1e-9));
}

Timestamp frame_time(Timestamp epoch, double fps, std::uint64_t i) {
  return Timestamp{epoch.ticks +
                   static_cast<std::uint64_t>(std::llround(
                       static_cast<double>(i) * Timestamp::kTicksPerSecond / fps))};
}

RigCalibration make_default_rig(const StreamRates& rates) {
  rates.validate();
  RigCalibration rig;

  DistortionParams vlc;
  vlc.fx = 366.0;
  vlc.fy = 366.0;
  vlc.cx = 320.0;
  vlc.cy = 240.0;
  vlc.k1 = -0.025;
  const CameraModel vlc_cam = CameraModel::from_params(kVlcWidth, kVlcHeight, vlc);

  DistortionParams ahat;
  ahat.fx = 250.0;
  ahat.fy = 250.0;
  ahat.cx = 256.0;
  ahat.cy = 256.0;
  ahat.k1 = -0.05;
  ahat.k2 = 0.01;
  const CameraModel ahat_cam = CameraModel::from_params(kAhatWidth, kAhatHeight, ahat);

  DistortionParams lt;
  lt.fx = 160.0;
  lt.fy = 160.0;
  lt.cx = 160.0;
  lt.cy = 144.0;
  lt.k1 = -0.03;
  const CameraModel lt_cam = CameraModel::from_params(kLongThrowWidth, kLongThrowHeight, lt);

  const double yaw = 60.0 * kPi / 180.0;
  const RigidTransformd depth_mount = RigidTransformd::from_parts(
      rotation_about_x(0.15).rotation, Vec3d(0.049, -0.016, 0.015));

  rig.add({SensorType::LEFT_FRONT, "vlc_left_front", rates.vlc_fps,
           RigidTransformd::identity(), vlc_cam});
  rig.add({SensorType::LEFT_LEFT, "vlc_left_left", rates.vlc_fps,
           RigidTransformd::from_parts(rotation_about_y(-yaw).rotation, Vec3d(-0.08, 0.0, 0.0)), vlc_cam});
  rig.add({SensorType::RIGHT_FRONT, "vlc_right_front", rates.vlc_fps,
           RigidTransformd::from_parts(Mat3d::Identity(), Vec3d(0.098, 0.0, 0.0)), vlc_cam});
  rig.add({SensorType::RIGHT_RIGHT, "vlc_right_right", rates.vlc_fps,
           RigidTransformd::from_parts(rotation_about_y(yaw).rotation, Vec3d(0.178, 0.0, 0.0)), vlc_cam});
  rig.add({SensorType::DEPTH_AHAT, "depth_ahat", rates.ahat_fps, depth_mount, ahat_cam});
  rig.add({SensorType::DEPTH_LONG_THROW, "depth_long_throw", rates.long_throw_fps, depth_mount,
           lt_cam});
  // IMU axes coincide with the rig axes; extrinsics carry the mounting
  // position only, so strapdown synthesis needs no lever-arm terms.
  rig.add({SensorType::IMU_ACCEL, "imu_accel", rates.accel_hz,
           RigidTransformd::from_parts(Mat3d::Identity(), Vec3d(-0.050, 0.010, 0.020)),
           std::nullopt});
  rig.add({SensorType::IMU_GYRO, "imu_gyro", rates.gyro_hz,
           RigidTransformd::from_parts(Mat3d::Identity(), Vec3d(-0.050, 0.012, 0.020)),
           std::nullopt});
  rig.add({SensorType::IMU_MAG, "imu_mag", rates.mag_hz,
           RigidTransformd::from_parts(Mat3d::Identity(), Vec3d(-0.048, 0.014, 0.020)),
           std::nullopt});
  return rig;
}

std::vector<StreamDescriptor> make_default_descriptors(const RigCalibration& rig,
                                                       double pose_rate_hz,
                                                       const StreamToggles& toggles) {
  if (!(pose_rate_hz > 0)) raise(ErrorCode::DomainError, "pose rate must be positive");
  std::vector<StreamDescriptor> out;
  auto image = [&](SensorType type, PixelFormat format) {
    const SensorEntry& e = rig.at(type);
    StreamDescriptor d;
    d.stream_id = static_cast<std::uint16_t>(type);
    d.kind = static_cast<StreamKind>(type);
    d.format = format;
    d.width = static_cast<std::uint32_t>(e.camera->width());
    d.height = static_cast<std::uint32_t>(e.camera->height());
    d.elements = 1;
    d.nominal_fps = e.nominal_fps;
    d.rig_from_sensor = e.rig_from_sensor;
    d.friendly_name = e.friendly_name;
    d.camera = e.camera;
    out.push_back(std::move(d));
  };
  auto imu = [&](SensorType type) {
    const SensorEntry& e = rig.at(type);
    StreamDescriptor d;
    d.stream_id = static_cast<std::uint16_t>(type);
    d.kind = static_cast<StreamKind>(type);
    d.format = PixelFormat::VEC3_BATCH;
    d.elements = kImuBatchCapacity;
    d.nominal_fps = e.nominal_fps;
    d.rig_from_sensor = e.rig_from_sensor;
    d.friendly_name = e.friendly_name;
    out.push_back(std::move(d));
  };

  if (toggles.vlc) {
    image(SensorType::LEFT_FRONT, PixelFormat::U8);
    image(SensorType::LEFT_LEFT, PixelFormat::U8);
    image(SensorType::RIGHT_FRONT, PixelFormat::U8);
    image(SensorType::RIGHT_RIGHT, PixelFormat::U8);
  }
  if (toggles.depth) {
    image(SensorType::DEPTH_AHAT, PixelFormat::U16);
    image(SensorType::DEPTH_LONG_THROW, PixelFormat::U16);
  }
  if (toggles.imu) {
    imu(SensorType::IMU_ACCEL);
    imu(SensorType::IMU_GYRO);
    imu(SensorType::IMU_MAG);
  }
  if (toggles.interaction) {
    StreamDescriptor head;
    head.stream_id = kHeadPoseStreamId;
    head.kind = StreamKind::HEAD_POSE;
    head.format = PixelFormat::POSE_RECORD;
    head.elements = 1;
    head.nominal_fps = pose_rate_hz;
    head.friendly_name = "head_pose";
    out.push_back(head);
    StreamDescriptor hand;
    hand.stream_id = kHandPoseStreamId;
    hand.kind = StreamKind::HAND_POSE;
    hand.format = PixelFormat::POSE_RECORD;
    hand.elements = kDefaultHandJointCount;
    hand.nominal_fps = pose_rate_hz;
    hand.friendly_name = "hand_pose";
    out.push_back(hand);
    StreamDescriptor gaze;
    gaze.stream_id = kGazeStreamId;
    gaze.kind = StreamKind::GAZE_RAY;
    gaze.format = PixelFormat::RAY_RECORD;
    gaze.elements = 1;
    gaze.nominal_fps = pose_rate_hz;
    gaze.friendly_name = "gaze";
    out.push_back(gaze);
  }
  return out;
}

RenderedDepth render_depth(const Scene& scene, const CameraModel& cam,
                           const RigidTransformd& world_from_camera, DepthMode mode,
                           const NoiseSpec& noise, std::uint16_t stream_id,
                           std::uint64_t frame_index, Timestamp t, int threads) {
  noise.validate();
  const int w = cam.width();
  const int h = cam.height();
  const std::size_t pixels = static_cast<std::size_t>(w) * h;
  std::vector<std::uint16_t> depth(pixels, 0);
  std::vector<std::uint16_t> ab(pixels, 0);
  std::vector<std::uint8_t> sigma;
  if (mode == DepthMode::LongThrow) sigma.assign(pixels, 0);

  const Vec3d origin = world_from_camera.translation;
  parallel_rows(h, threads, [&](int row_begin, int row_end) {
    for (int r = row_begin; r < row_end; ++r) {
      for (int c = 0; c < w; ++c) {
        const std::size_t p = static_cast<std::size_t>(r) * w + c;
        const Vec2d xy = cam.lut_at(c, r);
        const Vec3d dir =
            world_from_camera.rotation * Vec3d(xy.x(), xy.y(), 1.0).normalized();
        const std::optional<RayHit> hit = cast_ray(scene, origin, dir);
        const bool dropped =
            noise.invalid_probability > 0 &&
            counter_uniform(noise.seed, stream_id, frame_index, p, 0) < noise.invalid_probability;
        if (!hit || dropped) {
          if (mode == DepthMode::Ahat) {
            depth[p] = kAhatInvalidCode;
          } else {
            sigma[p] = kSigmaInvalidMask;
          }
          continue;
        }
        double range = hit->t;
        if (noise.depth_sigma_m > 0) {
          range = std::max(
              0.0, range + noise.depth_sigma_m *
                               counter_gaussian(noise.seed, stream_id, frame_index, p, 1));
        }
        const double cos_incidence = std::max(0.0, hit->normal.dot(-dir));
        double ab_value = kAbConstant * hit->albedo * cos_incidence / (hit->t * hit->t);
        if (noise.ab_sigma > 0) {
          ab_value *= std::max(
              0.0, 1.0 + noise.ab_sigma *
                             counter_gaussian(noise.seed, stream_id, frame_index, p, 2));
        }
        ab[p] = static_cast<std::uint16_t>(
            std::clamp<long long>(std::llround(ab_value), 0, 65535));
        const long long mm = std::llround(range * 1000.0);
        if (mode == DepthMode::Ahat) {
          depth[p] = static_cast<std::uint16_t>(mm % 1000);
        } else {
          depth[p] = static_cast<std::uint16_t>(
              std::clamp<long long>(mm, 0, kLongThrowMaxMm));
        }
      }
    }
  });

  RenderedDepth out;
  out.depth = DepthFrame(mode, w, h, std::move(depth), t);
  if (mode == DepthMode::LongThrow) out.sigma = SigmaBuffer(w, h, std::move(sigma));
  out.ab = AbFrame(mode, w, h, std::move(ab), t);
  return out;
}

VlcFrame render_vlc(const Scene& scene, const CameraModel& cam,
                    const RigidTransformd& world_from_camera, Timestamp t, int threads) {
  const int w = cam.width();
  const int h = cam.height();
  std::vector<std::uint8_t> buf(static_cast<std::size_t>(w) * h, 0);
  const Vec3d origin = world_from_camera.translation;
  parallel_rows(h, threads, [&](int row_begin, int row_end) {
    for (int r = row_begin; r < row_end; ++r) {
      for (int c = 0; c < w; ++c) {
        const Vec2d xy = cam.lut_at(c, r);
        const Vec3d dir =
            world_from_camera.rotation * Vec3d(xy.x(), xy.y(), 1.0).normalized();
        const std::optional<RayHit> hit = cast_ray(scene, origin, dir);
        if (!hit) continue;
        const double headlight = std::max(0.0, hit->normal.dot(-dir));
        const double directional = std::max(0.0, hit->normal.dot(-kLightWorld));
        const double v =
            hit->albedo * (kAmbient + kHeadlight * headlight + kDirectional * directional);
        buf[static_cast<std::size_t>(r) * w + c] = static_cast<std::uint8_t>(
            std::clamp<long long>(std::llround(v * 255.0), 0, 255));
      }
    }
  });
  return VlcFrame(std::move(buf), t);
}

namespace {

std::vector<ImuBatch> imu_stream(const TrajectorySpec& traj, ImuKind kind, double rate,
                                 Timestamp epoch) {
  const std::uint64_t n = frame_count_for(rate, traj.duration_s);
  std::vector<ImuBatch> out;
  std::vector<ImuSample> pending;
  pending.reserve(kImuRecordBatch);
  auto flush = [&] {
    if (pending.empty()) return;
    const std::optional<double> temp =
        kind == ImuKind::Mag ? std::nullopt : std::optional<double>(kImuTemperatureC);
    out.emplace_back(kind, std::move(pending), temp);
    pending.clear();
  };
  for (std::uint64_t i = 0; i < n; ++i) {
    const double t_s = static_cast<double>(i) / rate;
    const BodyKinematics kin = spec_kinematics_at(traj, t_s);
    ImuSample s;
    s.t = frame_time(epoch, rate, i);
    switch (kind) {
      case ImuKind::Accel: s.value = kin.specific_force; break;
      case ImuKind::Gyro: s.value = kin.angular_velocity; break;
      case ImuKind::Mag: s.value = kin.magnetic; break;
    }
    pending.push_back(s);
    if (pending.size() == kImuRecordBatch) flush();
  }
  flush();
  return out;
}

}  // namespace

ImuStreams synth_imu(const TrajectorySpec& traj, const StreamRates& rates, Timestamp epoch) {
  validate_trajectory_spec(traj);
  rates.validate();
  ImuStreams out;
  out.accel = imu_stream(traj, ImuKind::Accel, rates.accel_hz, epoch);
  out.gyro = imu_stream(traj, ImuKind::Gyro, rates.gyro_hz, epoch);
  out.mag = imu_stream(traj, ImuKind::Mag, rates.mag_hz, epoch);
  return out;
}

InteractionStreams synth_interaction(const TrajectorySpec& traj, const Scene& scene,
                                     std::size_t target_primitive, Timestamp epoch) {
  validate_trajectory_spec(traj);
  if (target_primitive >= scene.primitives.size()) {
    raise(ErrorCode::UnknownTarget,
          "gaze target " + std::to_string(target_primitive) + " is not in the scene");
  }
  const Vec3d target = primitive_center(scene.primitives[target_primitive]);
  InteractionStreams out;
  out.head = sample_trajectory(traj, epoch);
  for (const PoseSample& s : out.head.samples()) {
    const Mat3d& r = s.world_from_rig.rotation;
    Vec3d to_target = target - s.world_from_rig.translation;
    if (to_target.norm() < 1e-12) to_target = r.col(2);  // target on the rig origin
    GazeSample g;
    g.t = s.t;
    g.origin = Vec3d::Zero();  // rig frame
    g.direction = (r.transpose() * to_target).normalized();
    out.gaze.push_back(g);

    HandSample hand;
    hand.t = s.t;
    hand.handedness = Handedness::Right;
    hand.joints.reserve(kDefaultHandJointCount);
    for (std::uint32_t j = 0; j < kDefaultHandJointCount; ++j) {
      // Deterministic 5x6 palm grid, 0.4 m ahead (+z) and a little below
      // (+y is down in the rig frame).
      const Vec3d joint_rig(0.02 * (static_cast<int>(j % 5) - 2),
                            0.15 + 0.015 * static_cast<int>(j / 5),
                            0.4 + 0.005 * static_cast<int>(j % 3));
      hand.joints.push_back(
          compose(s.world_from_rig,
                  RigidTransformd::from_parts(Mat3d::Identity(), joint_rig)));
    }
    out.hands.push_back(std::move(hand));
  }
  return out;
}

// --- config -----------------------------------------------------------------

namespace {

Vec3d parse_vec3(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) {
    raise(ErrorCode::InvalidArgument, where + " must be an array of 3 numbers");
  }
  Vec3d v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) raise(ErrorCode::InvalidArgument, where + " must hold numbers");
    v(i) = j[i].get<double>();
  }
  return v;
}

double number_or(const json& j, const char* key, double fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) raise(ErrorCode::InvalidArgument, where + "." + key + " not a number");
  return j[key].get<double>();
}

Scene parse_scene(const json& j) {
  if (!j.is_array()) raise(ErrorCode::InvalidArgument, "scene must be an array");
  Scene scene;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const json& p = j[i];
    const std::string where = "scene[" + std::to_string(i) + "]";
    if (!p.is_object() || !p.contains("type")) {
      raise(ErrorCode::InvalidArgument, where + " needs a type");
    }
    ScenePrimitive prim;
    prim.albedo = number_or(p, "albedo", 0.8, where);
    if (p.contains("name")) prim.name = p["name"].get<std::string>();
    const std::string type = p["type"].get<std::string>();
    if (type == "plane") {
      PlaneGeom g;
      g.point = parse_vec3(p.at("point"), where + ".point");
      g.normal = parse_vec3(p.at("normal"), where + ".normal").normalized();
      prim.geometry = g;
    } else if (type == "sphere") {
      SphereGeom g;
      g.center = parse_vec3(p.at("center"), where + ".center");
      g.radius = number_or(p, "radius", 0.0, where);
      prim.geometry = g;
    } else if (type == "box") {
      BoxGeom g;
      g.center = parse_vec3(p.at("center"), where + ".center");
      g.half_extents = parse_vec3(p.at("half_extents"), where + ".half_extents");
      const double yaw = number_or(p, "yaw_deg", 0.0, where) * kPi / 180.0;
      g.orientation = rotation_about_y(yaw).rotation;
      prim.geometry = g;
    } else {
      raise(ErrorCode::InvalidArgument, where + ": unknown primitive type " + type);
    }
    scene.primitives.push_back(std::move(prim));
  }
  validate_scene(scene);
  return scene;
}

TrajectorySpec parse_trajectory(const json& j, double duration_s, double pose_rate_hz) {
  if (!j.is_object() || !j.contains("type")) {
    raise(ErrorCode::InvalidArgument, "trajectory needs a type");
  }
  TrajectorySpec spec;
  spec.duration_s = duration_s;
  spec.pose_rate_hz = pose_rate_hz;
  const std::string type = j["type"].get<std::string>();
  if (type == "static") {
    StaticSpec s;
    const Vec3d pos = parse_vec3(j.at("position"), "trajectory.position");
    if (j.contains("look_at")) {
      s.world_from_rig = look_at(pos, parse_vec3(j.at("look_at"), "trajectory.look_at"));
    } else {
      s.world_from_rig = RigidTransformd::from_parts(Mat3d::Identity(), pos);
    }
    spec.kind = s;
  } else if (type == "orbit") {
    OrbitSpec o;
    o.center = parse_vec3(j.at("center"), "trajectory.center");
    o.radius = number_or(j, "radius", 1.0, "trajectory");
    o.angular_rate = number_or(j, "angular_rate", 1.0, "trajectory");
    o.height = number_or(j, "height", 0.0, "trajectory");
    spec.kind = o;
  } else if (type == "waypoints") {
    if (!j.contains("points") || !j["points"].is_array() || j["points"].empty()) {
      raise(ErrorCode::InvalidArgument, "trajectory.points must be a non-empty array");
    }
    WaypointSpec w;
    for (std::size_t i = 0; i < j["points"].size(); ++i) {
      const json& p = j["points"][i];
      const std::string where = "trajectory.points[" + std::to_string(i) + "]";
      const double time_s = number_or(p, "time_s", -1.0, where);
      if (time_s < 0) raise(ErrorCode::InvalidArgument, where + ".time_s must be >= 0");
      const Vec3d pos = parse_vec3(p.at("position"), where + ".position");
      const RigidTransformd pose =
          p.contains("look_at")
              ? look_at(pos, parse_vec3(p.at("look_at"), where + ".look_at"))
              : RigidTransformd::from_parts(Mat3d::Identity(), pos);
      w.waypoints.append(PoseSample{Timestamp::from_seconds(time_s), pose});
    }
    spec.kind = std::move(w);
  } else {
    raise(ErrorCode::InvalidArgument, "unknown trajectory type " + type);
  }
  validate_trajectory_spec(spec);
  return spec;
}

json scene_to_json(const Scene& scene) {
  json out = json::array();
  for (const ScenePrimitive& p : scene.primitives) {
    json e;
    e["albedo"] = p.albedo;
    if (!p.name.empty()) e["name"] = p.name;
    if (const auto* plane = std::get_if<PlaneGeom>(&p.geometry)) {
      e["type"] = "plane";
      e["point"] = {plane->point.x(), plane->point.y(), plane->point.z()};
      e["normal"] = {plane->normal.x(), plane->normal.y(), plane->normal.z()};
    } else if (const auto* sphere = std::get_if<SphereGeom>(&p.geometry)) {
      e["type"] = "sphere";
      e["center"] = {sphere->center.x(), sphere->center.y(), sphere->center.z()};
      e["radius"] = sphere->radius;
    } else {
      const BoxGeom& box = std::get<BoxGeom>(p.geometry);
      e["type"] = "box";
      e["center"] = {box.center.x(), box.center.y(), box.center.z()};
      e["half_extents"] = {box.half_extents.x(), box.half_extents.y(), box.half_extents.z()};
      const double yaw = std::atan2(box.orientation(0, 2), box.orientation(2, 2));
      e["yaw_deg"] = yaw * 180.0 / kPi;
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace

SimConfig parse_sim_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    raise(ErrorCode::InvalidArgument, std::string("config is not valid JSON: ") + e.what());
  }
  try {
    SimConfig cfg;
    cfg.noise.seed = j.contains("seed") ? j["seed"].get<std::uint64_t>() : 0;
    const double duration = number_or(j, "duration_s", 1.0, "config");
    cfg.threads = j.contains("threads") ? j["threads"].get<int>() : 1;
    double pose_rate = 60.0;
    if (j.contains("rates")) {
      const json& r = j["rates"];
      cfg.rates.vlc_fps = number_or(r, "vlc_fps", cfg.rates.vlc_fps, "rates");
      cfg.rates.ahat_fps = number_or(r, "ahat_fps", cfg.rates.ahat_fps, "rates");
      cfg.rates.long_throw_fps =
          number_or(r, "long_throw_fps", cfg.rates.long_throw_fps, "rates");
      cfg.rates.accel_hz = number_or(r, "accel_hz", cfg.rates.accel_hz, "rates");
      cfg.rates.gyro_hz = number_or(r, "gyro_hz", cfg.rates.gyro_hz, "rates");
      cfg.rates.mag_hz = number_or(r, "mag_hz", cfg.rates.mag_hz, "rates");
      pose_rate = number_or(r, "pose_hz", pose_rate, "rates");
    }
    cfg.rates.validate();
    if (j.contains("noise")) {
      const json& n = j["noise"];
      cfg.noise.depth_sigma_m = number_or(n, "depth_sigma_m", 0.0, "noise");
      cfg.noise.ab_sigma = number_or(n, "ab_sigma", 0.0, "noise");
      cfg.noise.invalid_probability = number_or(n, "invalid_probability", 0.0, "noise");
    }
    cfg.noise.validate();
    if (j.contains("streams")) {
      const json& s = j["streams"];
      if (s.contains("vlc")) cfg.streams.vlc = s["vlc"].get<bool>();
      if (s.contains("depth")) cfg.streams.depth = s["depth"].get<bool>();
      if (s.contains("imu")) cfg.streams.imu = s["imu"].get<bool>();
      if (s.contains("interaction")) cfg.streams.interaction = s["interaction"].get<bool>();
    }
    if (!j.contains("scene")) raise(ErrorCode::InvalidArgument, "config needs a scene");
    cfg.scene = parse_scene(j["scene"]);
    if (!j.contains("trajectory")) raise(ErrorCode::InvalidArgument, "config needs a trajectory");
    cfg.trajectory = parse_trajectory(j["trajectory"], duration, pose_rate);
    cfg.target = 0;
    if (j.contains("target")) {
      if (j["target"].is_number_unsigned()) {
        cfg.target = j["target"].get<std::size_t>();
      } else if (j["target"].is_string()) {
        const std::string name = j["target"].get<std::string>();
        bool found = false;
        for (std::size_t i = 0; i < cfg.scene.primitives.size(); ++i) {
          if (cfg.scene.primitives[i].name == name) {
            cfg.target = i;
            found = true;
            break;
          }
        }
        if (!found) raise(ErrorCode::UnknownTarget, "target name not in the scene: " + name);
      } else {
        raise(ErrorCode::InvalidArgument, "target must be an index or a primitive name");
      }
    }
    if (cfg.streams.interaction && cfg.target >= cfg.scene.primitives.size()) {
      raise(ErrorCode::UnknownTarget, "target index outside the scene");
    }
    return cfg;
  } catch (const json::exception& e) {
    raise(ErrorCode::InvalidArgument, std::string("malformed config: ") + e.what());
  }
}

SimConfig load_sim_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::IoError, "cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_sim_config(text);
}

std::string default_sim_config_text() {
  return R"({
  "seed": 1,
  "duration_s": 1.0,
  "threads": 1,
  "target": "ball",
  "noise": {"depth_sigma_m": 0.0, "ab_sigma": 0.0, "invalid_probability": 0.0},
  "rates": {"vlc_fps": 30, "ahat_fps": 45, "long_throw_fps": 5,
            "accel_hz": 1000, "gyro_hz": 1000, "mag_hz": 50, "pose_hz": 60},
  "streams": {"vlc": true, "depth": true, "imu": true, "interaction": true},
  "scene": [
    {"type": "plane", "point": [0, 0, 0], "normal": [0, 1, 0], "albedo": 0.9, "name": "floor"},
    {"type": "sphere", "center": [0, 0.5, 0], "radius": 0.5, "albedo": 0.8, "name": "ball"},
    {"type": "box", "center": [1.2, 0.3, -0.8], "half_extents": [0.3, 0.3, 0.3],
     "yaw_deg": 30, "albedo": 0.7, "name": "crate"}
  ],
  "trajectory": {"type": "orbit", "center": [0, 0.5, 0], "radius": 2.0,
                 "angular_rate": 0.6, "height": 0.4}
}
)";
}

SimSummary simulate(const SimConfig& config, const std::string& out_path) {
  validate_scene(config.scene);
  validate_trajectory_spec(config.trajectory);
  config.noise.validate();
  config.rates.validate();

  const Timestamp epoch = kDefaultEpoch;
  const double duration = config.trajectory.duration_s;
  const RigCalibration rig = make_default_rig(config.rates);
  const std::vector<StreamDescriptor> descriptors =
      make_default_descriptors(rig, config.trajectory.pose_rate_hz, config.streams);
  ContainerWriter writer = ContainerWriter::create(out_path, rig, descriptors);

  SimSummary summary;
  summary.container_path = out_path;
  std::uint64_t records = 0;

  auto camera_pose = [&](const SensorEntry& entry, double t_s) {
    return compose(spec_pose_at(config.trajectory, t_s), entry.rig_from_sensor);
  };

  if (config.streams.vlc) {
    for (const SensorType type : {SensorType::LEFT_FRONT, SensorType::LEFT_LEFT,
                                  SensorType::RIGHT_FRONT, SensorType::RIGHT_RIGHT}) {
      const SensorEntry& entry = rig.at(type);
      const std::uint16_t id = static_cast<std::uint16_t>(type);
      const std::uint64_t n = frame_count_for(config.rates.vlc_fps, duration);
      for (std::uint64_t i = 0; i < n; ++i) {
        const double t_s = static_cast<double>(i) / config.rates.vlc_fps;
        const Timestamp t = frame_time(epoch, config.rates.vlc_fps, i);
        const VlcFrame frame =
            render_vlc(config.scene, *entry.camera, camera_pose(entry, t_s), t, config.threads);
        writer.append(FrameRecord{id, t, encode_vlc_payload(frame)});
        ++records;
      }
    }
  }
  if (config.streams.depth) {
    {
      const SensorEntry& entry = rig.at(SensorType::DEPTH_AHAT);
      const std::uint16_t id = static_cast<std::uint16_t>(SensorType::DEPTH_AHAT);
      const std::uint64_t n = frame_count_for(config.rates.ahat_fps, duration);
      for (std::uint64_t i = 0; i < n; ++i) {
        const double t_s = static_cast<double>(i) / config.rates.ahat_fps;
        const Timestamp t = frame_time(epoch, config.rates.ahat_fps, i);
        const RenderedDepth frame =
            render_depth(config.scene, *entry.camera, camera_pose(entry, t_s), DepthMode::Ahat,
                         config.noise, id, i, t, config.threads);
        writer.append(FrameRecord{id, t, encode_ahat_payload(frame.depth, frame.ab)});
        ++records;
      }
    }
    {
      const SensorEntry& entry = rig.at(SensorType::DEPTH_LONG_THROW);
      const std::uint16_t id = static_cast<std::uint16_t>(SensorType::DEPTH_LONG_THROW);
      const std::uint64_t n = frame_count_for(config.rates.long_throw_fps, duration);
      for (std::uint64_t i = 0; i < n; ++i) {
        const double t_s = static_cast<double>(i) / config.rates.long_throw_fps;
        const Timestamp t = frame_time(epoch, config.rates.long_throw_fps, i);
        const RenderedDepth frame =
            render_depth(config.scene, *entry.camera, camera_pose(entry, t_s),
                         DepthMode::LongThrow, config.noise, id, i, t, config.threads);
        writer.append(
            FrameRecord{id, t, encode_long_throw_payload(frame.depth, *frame.sigma, frame.ab)});
        ++records;
      }
    }
  }
  if (config.streams.imu) {
    const ImuStreams imu = synth_imu(config.trajectory, config.rates, epoch);
    auto append_batches = [&](SensorType type, const std::vector<ImuBatch>& batches) {
      const std::uint16_t id = static_cast<std::uint16_t>(type);
      for (const ImuBatch& b : batches) {
        writer.append(FrameRecord{id, b.samples.front().t, encode_imu_payload(b)});
        ++records;
      }
    };
    append_batches(SensorType::IMU_ACCEL, imu.accel);
    append_batches(SensorType::IMU_GYRO, imu.gyro);
    append_batches(SensorType::IMU_MAG, imu.mag);
  }

  PoseTrajectory truth =
      config.streams.interaction
          ? PoseTrajectory{}
          : sample_trajectory(config.trajectory, epoch);
  if (config.streams.interaction) {
    InteractionStreams inter =
        synth_interaction(config.trajectory, config.scene, config.target, epoch);
    for (const PoseSample& s : inter.head.samples()) {
      writer.append(
          FrameRecord{kHeadPoseStreamId, s.t, encode_pose_payload(s.world_from_rig)});
      ++records;
    }
    for (const HandSample& hand : inter.hands) {
      writer.append(FrameRecord{kHandPoseStreamId, hand.t, encode_hand_payload(hand)});
      ++records;
    }
    for (const GazeSample& g : inter.gaze) {
      writer.append(FrameRecord{kGazeStreamId, g.t, encode_gaze_payload(g)});
      ++records;
    }
    truth = std::move(inter.head);
  }
  writer.finalize();

  // Ground-truth sidecar.
  json sidecar;
  sidecar["seed"] = config.noise.seed;
  sidecar["epoch_ticks"] = epoch.ticks;
  sidecar["duration_s"] = duration;
  sidecar["pose_rate_hz"] = config.trajectory.pose_rate_hz;
  sidecar["ab_constant"] = kAbConstant;
  sidecar["gravity_world"] = {kGravityWorld.x(), kGravityWorld.y(), kGravityWorld.z()};
  sidecar["magnetic_world"] = {kMagneticWorld.x(), kMagneticWorld.y(), kMagneticWorld.z()};
  sidecar["scene"] = scene_to_json(config.scene);
  sidecar["target"] = config.target;
  json poses = json::array();
  for (const PoseSample& s : truth.samples()) {
    json row = json::array();
    row.push_back(s.t.ticks);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) row.push_back(s.world_from_rig.rotation(r, c));
    }
    for (int i = 0; i < 3; ++i) row.push_back(s.world_from_rig.translation(i));
    poses.push_back(row);
  }
  sidecar["poses"] = poses;

  summary.sidecar_path = out_path + ".truth.json";
  std::ofstream side(summary.sidecar_path);
  if (!side) raise(ErrorCode::IoError, "cannot create " + summary.sidecar_path);
  side << sidecar.dump(1) << "\n";
  if (!side) raise(ErrorCode::IoError, "write failed on " + summary.sidecar_path);
  summary.record_count = records;
  summary.truth = std::move(truth);
  return summary;
}

}  // namespace rigkit::sim
