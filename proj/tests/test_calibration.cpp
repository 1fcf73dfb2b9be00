#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rigkit/calibration.hpp"
#include "rigkit/sim/simulator.hpp"

using namespace rigkit;

TEST_CASE("default rig carries all nine sensors with LEFT_FRONT at the origin") {
  const RigCalibration rig = sim::make_default_rig();
  CHECK(rig.entries().size() == 9);
  const SensorEntry& lf = rig.at(SensorType::LEFT_FRONT);
  CHECK((lf.rig_from_sensor.rotation - Mat3d::Identity()).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(lf.rig_from_sensor.translation.norm() == 0.0);
  CHECK(lf.camera.has_value());
  for (const SensorEntry& e : rig.entries()) {
    CHECK(is_rigid(e.rig_from_sensor, 1e-9));
    CHECK(is_camera_sensor(e.type) == e.camera.has_value());
  }
}

TEST_CASE("adding a non-identity LEFT_FRONT entry is rejected") {
  RigCalibration rig;
  SensorEntry e;
  e.type = SensorType::LEFT_FRONT;
  e.friendly_name = "vlc_left_front";
  e.nominal_fps = 30.0;
  e.rig_from_sensor = RigidTransformd::from_parts(Mat3d::Identity(), Vec3d(0.01, 0, 0));
  CHECK_THROWS_AS(rig.add(e), Error);
  e.rig_from_sensor = RigidTransformd::identity();
  CHECK_NOTHROW(rig.add(e));
}

TEST_CASE("lookups distinguish present and absent sensors") {
  const RigCalibration rig = sim::make_default_rig();
  CHECK(rig.find(SensorType::IMU_MAG) != nullptr);
  CHECK_NOTHROW(rig.at(SensorType::DEPTH_AHAT));
  RigCalibration empty;
  CHECK(empty.find(SensorType::IMU_MAG) == nullptr);
  CHECK_THROWS_AS(empty.at(SensorType::IMU_MAG), Error);
  CHECK_THROWS_AS(rig_from_sensor(empty, SensorType::LEFT_FRONT), Error);
}

TEST_CASE("sensor type names round-trip") {
  for (int i = 0; i <= 8; ++i) {
    const SensorType t = static_cast<SensorType>(i);
    const std::optional<SensorType> back = parse_sensor_type(sensor_type_name(t));
    REQUIRE(back.has_value());
    CHECK(*back == t);
  }
  CHECK(!parse_sensor_type("NOT_A_SENSOR").has_value());
}

TEST_CASE("calibration text round-trips extrinsics and camera models") {
  const RigCalibration rig = sim::make_default_rig();
  const std::string text = serialize_calibration_text(rig);
  const RigCalibration back = parse_calibration_text(text);
  REQUIRE(back.entries().size() == rig.entries().size());
  for (const SensorEntry& e : rig.entries()) {
    const SensorEntry& b = back.at(e.type);
    CHECK(b.friendly_name == e.friendly_name);
    CHECK(b.nominal_fps == doctest::Approx(e.nominal_fps).epsilon(1e-12));
    CHECK((b.rig_from_sensor.rotation - e.rig_from_sensor.rotation).lpNorm<Eigen::Infinity>() <
          1e-12);
    CHECK((b.rig_from_sensor.translation - e.rig_from_sensor.translation).norm() < 1e-12);
    REQUIRE(b.camera.has_value() == e.camera.has_value());
    if (e.camera) {
      CHECK(b.camera->width() == e.camera->width());
      CHECK(b.camera->height() == e.camera->height());
      REQUIRE(b.camera->params().has_value());
      CHECK(b.camera->params()->fx == doctest::Approx(e.camera->params()->fx).epsilon(1e-12));
      CHECK(b.camera->params()->k1 == doctest::Approx(e.camera->params()->k1).epsilon(1e-12));
    }
  }
}

TEST_CASE("malformed calibration text is rejected") {
  CHECK_THROWS_AS(parse_calibration_text("not a calibration"), Error);
  CHECK_THROWS_AS(parse_calibration_text(""), Error);
}
