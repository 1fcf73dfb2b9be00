#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <json.hpp>

#include "rigkit/container.hpp"
#include "rigkit/sim/simulator.hpp"
#include "test_helpers.hpp"

using namespace rigkit;
using namespace rigkit::sim;

namespace {

Scene one_plane(const Vec3d& point, const Vec3d& normal, double albedo = 0.8) {
  Scene s;
  s.primitives.push_back({PlaneGeom{point, normal.normalized()}, albedo, "plane"});
  return s;
}

CameraModel small_depth_camera() {
  DistortionParams p;
  p.fx = 40.0;
  p.fy = 40.0;
  p.cx = 32.0;
  p.cy = 32.0;
  return CameraModel::from_params(64, 64, p);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("ray casting matches closed-form hits") {
  Scene scene;
  scene.primitives.push_back({PlaneGeom{Vec3d(0, 0, 0), Vec3d(0, 1, 0)}, 0.5, "floor"});
  scene.primitives.push_back({SphereGeom{Vec3d(0, 0, 5), 1.0}, 0.7, "ball"});
  scene.primitives.push_back({BoxGeom{Vec3d(10, 0, 5), Vec3d(1, 1, 1), Mat3d::Identity()}, 0.9, "crate"});
  validate_scene(scene);

  // Plane from above.
  auto hit = cast_ray(scene, Vec3d(0, 2, -3), Vec3d(0, -1, 0));
  REQUIRE(hit);
  CHECK(hit->t == doctest::Approx(2.0).epsilon(1e-12));
  CHECK((hit->normal - Vec3d(0, 1, 0)).norm() < 1e-12);
  CHECK(hit->albedo == 0.5);
  CHECK(hit->primitive == 0);

  // Sphere, off-axis: z = 5 - sqrt(1 - 0.25) on the chord at y = 0.5.
  hit = cast_ray(scene, Vec3d(0, 0.5, 0), Vec3d(0, 0, 1));
  REQUIRE(hit);
  CHECK(hit->t == doctest::Approx(5.0 - std::sqrt(0.75)).epsilon(1e-12));
  CHECK((hit->normal - Vec3d(0, 0.5, -std::sqrt(0.75)).normalized()).norm() < 1e-9);
  CHECK(hit->primitive == 1);

  // From the sphere's center the exit is one radius out, normal against the ray.
  hit = cast_ray(scene, Vec3d(0, 0, 5), Vec3d(1, 0, 0));
  REQUIRE(hit);
  CHECK(hit->t == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((hit->normal - Vec3d(-1, 0, 0)).norm() < 1e-9);

  // Axis-aligned box face, and the exit face from inside.
  hit = cast_ray(scene, Vec3d(10, 0, 0), Vec3d(0, 0, 1));
  REQUIRE(hit);
  CHECK(hit->t == doctest::Approx(4.0).epsilon(1e-12));
  CHECK((hit->normal - Vec3d(0, 0, -1)).norm() < 1e-12);
  hit = cast_ray(scene, Vec3d(10, 0, 5), Vec3d(-1, 0, 0));
  REQUIRE(hit);
  CHECK(hit->t == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((hit->normal - Vec3d(1, 0, 0)).norm() < 1e-12);

  // Misses: above the floor looking up, and past the sphere.
  CHECK(!cast_ray(scene, Vec3d(0, 2, 0), Vec3d(0, 1, 0)));
  CHECK(!cast_ray(scene, Vec3d(0, 3, 0), Vec3d(0, 0, 1)));
}

TEST_CASE("nearest primitive wins") {
  Scene scene;
  scene.primitives.push_back({SphereGeom{Vec3d(0, 0, 9), 1.0}, 0.4, "far"});
  scene.primitives.push_back({SphereGeom{Vec3d(0, 0, 5), 1.0}, 0.6, "near"});
  const auto hit = cast_ray(scene, Vec3d::Zero(), Vec3d(0, 0, 1));
  REQUIRE(hit);
  CHECK(hit->t == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(hit->primitive == 1);
}

TEST_CASE("rotated boxes behave like rotating the ray instead") {
  const Mat3d r = rotation_about_y(0.37).rotation;
  Scene rotated;
  rotated.primitives.push_back({BoxGeom{Vec3d(0.3, -0.1, 4), Vec3d(0.5, 0.8, 1.1), r}, 0.8, "box"});
  Scene aligned;
  aligned.primitives.push_back(
      {BoxGeom{Vec3d::Zero(), Vec3d(0.5, 0.8, 1.1), Mat3d::Identity()}, 0.8, "box"});
  const Vec3d box_center(0.3, -0.1, 4);
  for (int i = 0; i < 32; ++i) {
    const double a = 0.2 * i;
    const Vec3d dir = Vec3d(std::sin(a) * 0.3, std::cos(1.7 * a) * 0.2, 1.0).normalized();
    const Vec3d origin(0.1 * std::sin(3 * a), 0.05 * std::cos(2 * a), 0.0);
    const auto world_hit = cast_ray(rotated, origin, dir);
    const auto local_hit = cast_ray(aligned, r.transpose() * (origin - box_center), r.transpose() * dir);
    REQUIRE(world_hit.has_value() == local_hit.has_value());
    if (world_hit) {
      CHECK(world_hit->t == doctest::Approx(local_hit->t).epsilon(1e-10));
      CHECK((world_hit->normal - r * local_hit->normal).norm() < 1e-9);
    }
  }
}

TEST_CASE("scene validation rejects bad primitives") {
  CHECK_THROWS_AS(validate_scene(one_plane(Vec3d::Zero(), Vec3d(0, 1, 0), 1.5)), Error);
  CHECK_THROWS_AS(validate_scene(one_plane(Vec3d::Zero(), Vec3d(0, 1, 0), 0.0)), Error);
  Scene s;
  s.primitives.push_back({PlaneGeom{Vec3d::Zero(), Vec3d(0, 2, 0)}, 0.5, "p"});
  CHECK_THROWS_AS(validate_scene(s), Error);
  s.primitives[0].geometry = SphereGeom{Vec3d::Zero(), -1.0};
  CHECK_THROWS_AS(validate_scene(s), Error);
  s.primitives[0].geometry = BoxGeom{Vec3d::Zero(), Vec3d(1, 0, 1), Mat3d::Identity()};
  CHECK_THROWS_AS(validate_scene(s), Error);
}

TEST_CASE("look_at builds a y-down right-handed view") {
  const RigidTransformd t = look_at(Vec3d(0, 0, -2), Vec3d::Zero());
  CHECK((t.translation - Vec3d(0, 0, -2)).norm() == 0.0);
  CHECK((t.rotation.col(2) - Vec3d(0, 0, 1)).norm() < 1e-12);  // +z at the target
  CHECK(t.rotation.col(1).dot(Vec3d(0, 1, 0)) < 0.0);          // y points down
  CHECK(std::abs(t.rotation.determinant() - 1.0) < 1e-12);
  CHECK(is_rigid(t));

  // Oblique case still satisfies the frame conventions.
  const RigidTransformd o = look_at(Vec3d(3, 1, -2), Vec3d(0.5, 0.2, 0.7));
  const Vec3d view = (Vec3d(0.5, 0.2, 0.7) - Vec3d(3, 1, -2)).normalized();
  CHECK((o.rotation.col(2) - view).norm() < 1e-12);
  CHECK(std::abs(o.rotation.col(0).dot(Vec3d::UnitY())) < 1e-12);  // x horizontal
  CHECK(o.rotation.col(1).dot(Vec3d::UnitY()) < 0.0);
  CHECK(is_rigid(o));

  CHECK_THROWS_AS(look_at(Vec3d(0, 5, 0), Vec3d::Zero()), Error);
}

TEST_CASE("static rigs feel exactly gravity and no rotation") {
  TrajectorySpec spec;
  StaticSpec st;
  st.world_from_rig = rotation_about_z(0.5);
  st.world_from_rig.translation = Vec3d(1, 2, 3);
  spec.kind = st;
  const BodyKinematics k = spec_kinematics_at(spec, 0.37);
  const Vec3d expected_f = st.world_from_rig.rotation.transpose() * Vec3d(0, 9.81, 0);
  CHECK((k.specific_force - expected_f).norm() < 1e-12);
  CHECK(k.angular_velocity.norm() == 0.0);
  CHECK((st.world_from_rig.rotation * k.magnetic - kMagneticWorld).norm() < 1e-12);
  CHECK(std::abs(k.magnetic.norm() - 1.0) < 1e-12);
  CHECK((spec_pose_at(spec, 0.9).translation - Vec3d(1, 2, 3)).norm() == 0.0);
}

TEST_CASE("orbit kinematics are the analytic circular motion") {
  OrbitSpec orbit;
  orbit.center = Vec3d(0.5, 1.0, -0.25);
  orbit.radius = 2.0;
  orbit.angular_rate = 0.8;
  orbit.height = 0.4;
  TrajectorySpec spec;
  spec.kind = orbit;

  const double t = 1.234;
  const RigidTransformd pose = spec_pose_at(spec, t);
  const Vec3d expected_p = orbit.center + Vec3d(orbit.radius * std::cos(orbit.angular_rate * t),
                                                orbit.height,
                                                orbit.radius * std::sin(orbit.angular_rate * t));
  CHECK((pose.translation - expected_p).norm() < 1e-12);

  const BodyKinematics k = spec_kinematics_at(spec, t);

  // Specific force back in world axes: centripetal acceleration minus gravity.
  const Vec3d a_world = pose.rotation * k.specific_force + kGravityWorld;
  const Vec3d radial = expected_p - orbit.center - Vec3d(0, orbit.height, 0);
  const double w2r = orbit.angular_rate * orbit.angular_rate * orbit.radius;
  CHECK(std::abs(a_world.norm() - w2r) < 1e-12);
  CHECK(std::abs(a_world.dot(radial.normalized()) + w2r) < 1e-12);

  // Body rate maps to the constant world spin about -y.
  const Vec3d w_world = pose.rotation * k.angular_velocity;
  CHECK((w_world - Vec3d(0, -orbit.angular_rate, 0)).norm() < 1e-12);

  // Constant body rate: one exact exponential step reproduces the next pose.
  const double h = 0.01;
  const Mat3d stepped =
      pose.rotation *
      Eigen::AngleAxisd(k.angular_velocity.norm() * h, k.angular_velocity.normalized())
          .toRotationMatrix();
  CHECK((stepped - spec_pose_at(spec, t + h).rotation).norm() < 1e-9);

  CHECK(std::abs(k.magnetic.norm() - 1.0) < 1e-12);
  CHECK((pose.rotation * k.magnetic - kMagneticWorld).norm() < 1e-12);
}

TEST_CASE("waypoint trajectories interpolate and difference sensibly") {
  PoseTrajectory wp;
  RigidTransformd a = RigidTransformd::identity();
  RigidTransformd b = RigidTransformd::identity();
  b.translation = Vec3d(4, 0, 0);
  wp.append({Timestamp{0}, a});
  wp.append({Timestamp{40'000'000}, b});  // 4 seconds: constant 1 m/s in x
  TrajectorySpec spec;
  spec.kind = WaypointSpec{wp};
  spec.duration_s = 4.0;
  spec.pose_rate_hz = 100.0;

  CHECK((spec_pose_at(spec, 2.0).translation - Vec3d(2, 0, 0)).norm() < 1e-9);
  const BodyKinematics k = spec_kinematics_at(spec, 2.0);
  // Constant velocity: the accelerometer sees gravity alone.
  CHECK((k.specific_force - Vec3d(0, 9.81, 0)).norm() < 1e-6);
  CHECK(k.angular_velocity.norm() < 1e-9);
}

TEST_CASE("trajectory sampling lands on the tick grid") {
  TrajectorySpec spec;
  spec.duration_s = 1.0;
  spec.pose_rate_hz = 30.0;
  const PoseTrajectory traj = sample_trajectory(spec, kDefaultEpoch);
  // Pose samples bracket the capture window inclusively so every sensor frame
  // inside [0, duration) interpolates instead of clamping at the tail.
  REQUIRE(traj.size() == 31);
  CHECK(traj.samples()[0].t.ticks == kDefaultEpoch.ticks);
  CHECK(traj.samples()[1].t.ticks == kDefaultEpoch.ticks + 333333);
  CHECK(traj.samples()[29].t.ticks == kDefaultEpoch.ticks + 9666667);
  CHECK(traj.samples()[30].t.ticks == kDefaultEpoch.ticks + 10000000);

  CHECK(frame_count_for(5.0, 0.5) == 3);  // 0, 0.2, 0.4 fall inside [0, 0.5)
  CHECK(frame_count_for(30.0, 1.0) == 30);
  CHECK_THROWS_AS(frame_count_for(0.0, 1.0), Error);
  CHECK_THROWS_AS(frame_count_for(30.0, -1.0), Error);
}

TEST_CASE("counter-based draws are pure functions of their keys") {
  const std::uint64_t a = counter_hash(1, 2, 3, 4, 5);
  CHECK(a == counter_hash(1, 2, 3, 4, 5));
  CHECK(a != counter_hash(2, 2, 3, 4, 5));
  CHECK(a != counter_hash(1, 3, 3, 4, 5));
  CHECK(a != counter_hash(1, 2, 4, 4, 5));
  CHECK(a != counter_hash(1, 2, 3, 5, 5));
  CHECK(a != counter_hash(1, 2, 3, 4, 6));

  double sum = 0.0, sum2 = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = counter_uniform(42, 7, 0, std::uint64_t(i), 1);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    sum2 += u * u;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean - 0.5) < 0.005);
  CHECK(std::abs(sum2 / n - mean * mean - 1.0 / 12.0) < 0.005);

  double gsum = 0.0, gsum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double g = counter_gaussian(42, 7, 0, std::uint64_t(i), 1);
    gsum += g;
    gsum2 += g * g;
  }
  CHECK(std::abs(gsum / n) < 0.02);
  CHECK(std::abs(gsum2 / n - 1.0) < 0.03);
}

TEST_CASE("depth rendering is exact on a frontal plane") {
  const CameraModel cam = small_depth_camera();
  const Scene scene = one_plane(Vec3d(0, 0, 2), Vec3d(0, 0, -1));
  NoiseSpec quiet;
  const RenderedDepth lt = render_depth(scene, cam, RigidTransformd::identity(),
                                        DepthMode::LongThrow, quiet, 5, 0, Timestamp{0});
  REQUIRE(lt.sigma.has_value());
  const DecodedDepth dec = decode_long_throw(validate_long_throw(lt.depth, *lt.sigma));
  for (int r = 0; r < 64; r += 7) {
    for (int c = 0; c < 64; c += 7) {
      const std::size_t at = std::size_t(r) * 64 + c;
      REQUIRE(dec.valid[at]);
      const Vec2d xy = cam.lut_at(c, r);
      const double truth = 2.0 * Vec3d(xy.x(), xy.y(), 1.0).norm();
      CHECK(std::abs(dec.range_m[at] - truth) < 5.1e-4);  // quantization only
    }
  }
  // The same scene through AHAT unwraps back with a truth hint.
  const RenderedDepth ah = render_depth(scene, cam, RigidTransformd::identity(), DepthMode::Ahat,
                                        quiet, 4, 0, Timestamp{0});
  const DecodedDepth wrapped = decode_ahat(ah.depth);
  for (int r = 0; r < 64; r += 5) {
    for (int c = 0; c < 64; c += 5) {
      const std::size_t at = std::size_t(r) * 64 + c;
      REQUIRE(wrapped.valid[at]);
      const Vec2d xy = cam.lut_at(c, r);
      const double truth = 2.0 * Vec3d(xy.x(), xy.y(), 1.0).norm();
      CHECK(std::abs(unwrap_ahat(wrapped.range_m[at], truth) - truth) < 5.1e-4);
    }
  }
}

TEST_CASE("misses invalidate pixels through each encoding") {
  const CameraModel cam = small_depth_camera();
  Scene scene;
  scene.primitives.push_back({SphereGeom{Vec3d(0, 0, 2), 0.3}, 0.8, "ball"});
  NoiseSpec quiet;
  const RenderedDepth lt = render_depth(scene, cam, RigidTransformd::identity(),
                                        DepthMode::LongThrow, quiet, 5, 0, Timestamp{0});
  const RenderedDepth ah = render_depth(scene, cam, RigidTransformd::identity(), DepthMode::Ahat,
                                        quiet, 4, 0, Timestamp{0});
  // Corner pixels miss the sphere; the center hits.
  CHECK((lt.sigma->buffer[0] & 0x80) != 0);
  CHECK(ah.depth.buffer[0] == 0xFFFF);
  CHECK(lt.ab.buffer[0] == 0);
  const std::size_t center = 32 * 64 + 32;
  CHECK((lt.sigma->buffer[center] & 0x80) == 0);
  CHECK(ah.depth.buffer[center] < 1000);
  CHECK(lt.ab.buffer[center] > 0);
}

TEST_CASE("active brightness follows the inverse square law") {
  const CameraModel cam = small_depth_camera();
  NoiseSpec quiet;
  const RenderedDepth near = render_depth(one_plane(Vec3d(0, 0, 1), Vec3d(0, 0, -1)), cam,
                                          RigidTransformd::identity(), DepthMode::LongThrow, quiet,
                                          5, 0, Timestamp{0});
  const RenderedDepth far = render_depth(one_plane(Vec3d(0, 0, 2), Vec3d(0, 0, -1)), cam,
                                         RigidTransformd::identity(), DepthMode::LongThrow, quiet,
                                         5, 0, Timestamp{0});
  const std::size_t center = 32 * 64 + 32;
  const double ratio = double(near.ab.buffer[center]) / double(far.ab.buffer[center]);
  CHECK(std::abs(ratio - 4.0) < 0.02);
  // Doubling the range quarters the return everywhere on the plane.
  CHECK(near.ab.buffer[center] > 100);
}

TEST_CASE("dropout hits the requested fraction of pixels") {
  const CameraModel cam = small_depth_camera();
  NoiseSpec noisy;
  noisy.invalid_probability = 0.3;
  noisy.seed = 99;
  std::size_t invalid = 0;
  const int frames = 8;
  for (int f = 0; f < frames; ++f) {
    const RenderedDepth lt =
        render_depth(one_plane(Vec3d(0, 0, 2), Vec3d(0, 0, -1)), cam, RigidTransformd::identity(),
                     DepthMode::LongThrow, noisy, 5, std::uint64_t(f), Timestamp{0});
    for (std::uint8_t s : lt.sigma->buffer) invalid += (s & 0x80) ? 1 : 0;
  }
  const double fraction = double(invalid) / (frames * 64.0 * 64.0);
  CHECK(std::abs(fraction - 0.3) < 0.02);
}

TEST_CASE("rendering never depends on the thread count") {
  const CameraModel cam = small_depth_camera();
  Scene scene;
  scene.primitives.push_back({PlaneGeom{Vec3d(0, -1, 0), Vec3d(0, 1, 0)}, 0.6, "floor"});
  scene.primitives.push_back({SphereGeom{Vec3d(0.2, 0, 2), 0.5}, 0.9, "ball"});
  NoiseSpec noisy;
  noisy.depth_sigma_m = 0.01;
  noisy.ab_sigma = 0.05;
  noisy.invalid_probability = 0.05;
  noisy.seed = 7;
  const RigidTransformd pose = look_at(Vec3d(0, 0.5, -1), Vec3d(0.2, 0, 2));
  const RenderedDepth t1 =
      render_depth(scene, cam, pose, DepthMode::LongThrow, noisy, 5, 3, Timestamp{123}, 1);
  const RenderedDepth t4 =
      render_depth(scene, cam, pose, DepthMode::LongThrow, noisy, 5, 3, Timestamp{123}, 4);
  CHECK(t1.depth.buffer == t4.depth.buffer);
  CHECK(t1.sigma->buffer == t4.sigma->buffer);
  CHECK(t1.ab.buffer == t4.ab.buffer);

  // Different frame indices decorrelate the noise.
  const RenderedDepth other =
      render_depth(scene, cam, pose, DepthMode::LongThrow, noisy, 5, 4, Timestamp{123}, 1);
  CHECK(t1.depth.buffer != other.depth.buffer);

  const RigCalibration rig = make_default_rig();
  const CameraModel& vlc_cam = *rig.at(SensorType::LEFT_FRONT).camera;
  const VlcFrame v1 = render_vlc(scene, vlc_cam, pose, Timestamp{123}, 1);
  const VlcFrame v4 = render_vlc(scene, vlc_cam, pose, Timestamp{123}, 4);
  CHECK(v1.buffer == v4.buffer);
  CHECK(*std::max_element(v1.buffer.begin(), v1.buffer.end()) > 0);
}

TEST_CASE("imu batches follow the grid and carry temperature correctly") {
  TrajectorySpec spec;
  spec.duration_s = 1.0;
  StreamRates rates;
  rates.accel_hz = 100.0;
  rates.gyro_hz = 100.0;
  rates.mag_hz = 10.0;
  const ImuStreams imu = synth_imu(spec, rates, kDefaultEpoch);

  REQUIRE(imu.accel.size() == 4);  // 100 samples in batches of 32
  CHECK(imu.accel[0].samples.size() == 32);
  CHECK(imu.accel[3].samples.size() == 4);
  CHECK(imu.accel[0].samples[0].t.ticks == kDefaultEpoch.ticks);
  CHECK(imu.accel[0].samples[1].t.ticks == kDefaultEpoch.ticks + 100000);
  REQUIRE(imu.accel[0].temperature_c.has_value());
  CHECK(*imu.accel[0].temperature_c == kImuTemperatureC);
  CHECK(imu.gyro.size() == 4);
  REQUIRE(imu.mag.size() == 1);
  CHECK(imu.mag[0].samples.size() == 10);
  CHECK(!imu.mag[0].temperature_c.has_value());

  // Static rig: every accel sample reads +9.81 y, gyro zero, mag unit.
  for (const ImuSample& s : imu.accel[0].samples) {
    CHECK((s.value - Vec3d(0, 9.81, 0)).norm() < 1e-12);
  }
  CHECK(imu.gyro[0].samples[5].value.norm() == 0.0);
  CHECK(std::abs(imu.mag[0].samples[3].value.norm() - 1.0) < 1e-12);
}

TEST_CASE("interaction streams aim at the chosen target") {
  Scene scene;
  scene.primitives.push_back({PlaneGeom{Vec3d::Zero(), Vec3d(0, 1, 0)}, 0.5, "floor"});
  scene.primitives.push_back({SphereGeom{Vec3d(0, 0.5, 2), 0.4}, 0.8, "ball"});
  TrajectorySpec spec;
  StaticSpec st;
  st.world_from_rig = rotation_about_y(0.3);
  st.world_from_rig.translation = Vec3d(0.1, 1.0, -1.0);
  spec.kind = st;
  spec.duration_s = 0.5;
  spec.pose_rate_hz = 20.0;

  const InteractionStreams inter = synth_interaction(spec, scene, 1, kDefaultEpoch);
  // Interaction rides the pose grid, which includes the endpoint sample.
  REQUIRE(inter.head.size() == 11);
  REQUIRE(inter.gaze.size() == 11);
  REQUIRE(inter.hands.size() == 11);

  const Vec3d expected_dir =
      (st.world_from_rig.rotation.transpose() * (Vec3d(0, 0.5, 2) - st.world_from_rig.translation))
          .normalized();
  for (const GazeSample& g : inter.gaze) {
    CHECK(g.origin.norm() == 0.0);
    CHECK((g.direction - expected_dir).norm() < 1e-12);
    CHECK(std::abs(g.direction.norm() - 1.0) < 1e-12);
  }
  for (const HandSample& h : inter.hands) {
    REQUIRE(h.joints.size() == kDefaultHandJointCount);
    CHECK(h.handedness == Handedness::Right);
  }
  CHECK_THROWS_AS(synth_interaction(spec, scene, 2, kDefaultEpoch), Error);
}

TEST_CASE("the default config parses into the documented setup") {
  const SimConfig cfg = parse_sim_config(default_sim_config_text());
  CHECK(cfg.noise.seed == 1);
  CHECK(cfg.trajectory.duration_s == 1.0);
  REQUIRE(cfg.scene.primitives.size() == 3);
  CHECK(cfg.scene.primitives[1].name == "ball");
  CHECK(cfg.target == 1);
  REQUIRE(std::holds_alternative<OrbitSpec>(cfg.trajectory.kind));
  CHECK(std::get<OrbitSpec>(cfg.trajectory.kind).radius == 2.0);
  validate_scene(cfg.scene);
  cfg.noise.validate();
  cfg.rates.validate();
}

TEST_CASE("config errors carry a useful code") {
  try {
    parse_sim_config("{ not json");
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }
  CHECK_THROWS_AS(parse_sim_config(R"({"trajectory":{"teleport":{}}})"), Error);
  const std::string minimal =
      R"("scene": [{"type": "plane", "point": [0,0,0], "normal": [0,1,0], "albedo": 0.9, "name": "floor"}],)"
      R"("trajectory": {"type": "static", "position": [0, 1, 0]})";
  try {
    parse_sim_config(R"({"target":"nonexistent", )" + minimal + "}");
    FAIL("expected UnknownTarget");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownTarget);
  }
}

TEST_CASE("simulation is reproducible end to end") {
  const std::string dir = testutil::scratch_dir("sim_run");
  SimConfig cfg = parse_sim_config(default_sim_config_text());
  cfg.trajectory.duration_s = 0.2;
  cfg.trajectory.pose_rate_hz = 10.0;
  cfg.rates.vlc_fps = 10.0;
  cfg.rates.ahat_fps = 10.0;
  cfg.rates.long_throw_fps = 5.0;
  cfg.rates.accel_hz = 100.0;
  cfg.rates.gyro_hz = 100.0;
  cfg.rates.mag_hz = 10.0;
  cfg.noise.depth_sigma_m = 0.005;
  cfg.noise.invalid_probability = 0.02;
  cfg.threads = 2;

  const std::string path_a = testutil::path_in(dir, "a.rmrc");
  const SimSummary sum_a = simulate(cfg, path_a);
  CHECK(sum_a.container_path == path_a);
  CHECK(sum_a.record_count > 0);
  CHECK(sum_a.truth.size() == 3);  // pose grid includes the endpoint sample

  ContainerReader reader = ContainerReader::open(path_a);
  CHECK(reader.descriptors().size() == 12);
  CHECK(check_container(path_a).empty());
  CHECK(reader.frame_count(0) == 2);   // VLC at 10 fps over 0.2 s
  CHECK(reader.frame_count(5) == 1);   // Long Throw at 5 fps
  CHECK(reader.frame_count(9) == 3);   // head poses bracket [0, duration] inclusively

  // Ground truth sidecar matches the trajectory the rig actually flew.
  const nlohmann::json truth = nlohmann::json::parse(slurp(sum_a.sidecar_path));
  CHECK(truth["seed"] == 1);
  REQUIRE(truth["poses"].size() == 3);
  CHECK(std::uint64_t(truth["poses"][0][0]) == kDefaultEpoch.ticks);
  CHECK(truth["scene"].size() == 3);

  // A second run with a different thread count is byte-identical.
  cfg.threads = 1;
  const std::string path_b = testutil::path_in(dir, "b.rmrc");
  simulate(cfg, path_b);
  CHECK(slurp(path_a) == slurp(path_b));
  CHECK(slurp(sum_a.sidecar_path) == slurp(path_b + ".truth.json"));
}
