#include "rigkit/calibration.hpp"

#include <cstdio>
#include <sstream>

namespace rigkit {

const char* sensor_type_name(SensorType t) {
  switch (t) {
    case SensorType::LEFT_FRONT: return "LEFT_FRONT";
    case SensorType::LEFT_LEFT: return "LEFT_LEFT";
    case SensorType::RIGHT_FRONT: return "RIGHT_FRONT";
    case SensorType::RIGHT_RIGHT: return "RIGHT_RIGHT";
    case SensorType::DEPTH_AHAT: return "DEPTH_AHAT";
    case SensorType::DEPTH_LONG_THROW: return "DEPTH_LONG_THROW";
    case SensorType::IMU_ACCEL: return "IMU_ACCEL";
    case SensorType::IMU_GYRO: return "IMU_GYRO";
    case SensorType::IMU_MAG: return "IMU_MAG";
  }
  return "UNKNOWN";
}

std::optional<SensorType> parse_sensor_type(const std::string& name) {
  for (int i = 0; i < kSensorTypeCount; ++i) {
    const SensorType t = static_cast<SensorType>(i);
    if (name == sensor_type_name(t)) return t;
  }
  return std::nullopt;
}

void RigCalibration::add(SensorEntry entry) {
  if (find(entry.type) != nullptr) {
    raise(ErrorCode::DuplicateStreamId,
          std::string("duplicate calibration entry for ") + sensor_type_name(entry.type));
  }
  if (entry.type == SensorType::LEFT_FRONT) {
    const bool identity =
        (entry.rig_from_sensor.rotation - Mat3d::Identity()).lpNorm<Eigen::Infinity>() <= 1e-12 &&
        entry.rig_from_sensor.translation.lpNorm<Eigen::Infinity>() <= 1e-12;
    if (!identity) {
      raise(ErrorCode::DomainError, "LEFT_FRONT extrinsics must be the identity");
    }
  }
  if (!is_rigid(entry.rig_from_sensor)) {
    raise(ErrorCode::DomainError, "extrinsics must be a proper rigid transform");
  }
  entries_.push_back(std::move(entry));
}

const SensorEntry* RigCalibration::find(SensorType t) const {
  for (const SensorEntry& e : entries_) {
    if (e.type == t) return &e;
  }
  return nullptr;
}

const SensorEntry& RigCalibration::at(SensorType t) const {
  const SensorEntry* e = find(t);
  if (e == nullptr) {
    raise(ErrorCode::UnknownSensor, std::string("no calibration for ") + sensor_type_name(t));
  }
  return *e;
}

RigidTransformd rig_from_sensor(const RigCalibration& calib, SensorType t) {
  return calib.at(t).rig_from_sensor;
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_transform(const RigidTransformd& t) {
  std::string out;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      out += fmt_double(t.rotation(r, c));
      out += ' ';
    }
  }
  for (int i = 0; i < 3; ++i) {
    out += fmt_double(t.translation(i));
    if (i < 2) out += ' ';
  }
  return out;
}

}  // namespace

std::string serialize_calibration_text(const RigCalibration& calib) {
  std::ostringstream os;
  os << "rig_calibration 1\n";
  os << "sensors " << calib.entries().size() << "\n";
  for (const SensorEntry& e : calib.entries()) {
    os << "[sensor]\n";
    os << "type " << sensor_type_name(e.type) << "\n";
    os << "name " << e.friendly_name << "\n";
    os << "fps " << fmt_double(e.nominal_fps) << "\n";
    os << "rig_from_sensor " << fmt_transform(e.rig_from_sensor) << "\n";
    if (e.camera) {
      os << "camera " << e.camera->width() << " " << e.camera->height();
      if (e.camera->params()) {
        const DistortionParams& p = *e.camera->params();
        os << " parametric " << fmt_double(p.fx) << " " << fmt_double(p.fy) << " "
           << fmt_double(p.cx) << " " << fmt_double(p.cy) << " " << fmt_double(p.k1) << " "
           << fmt_double(p.k2) << " " << fmt_double(p.k3) << " " << fmt_double(p.p1) << " "
           << fmt_double(p.p2);
      } else {
        os << " lut";
      }
      os << "\n";
    }
  }
  return os.str();
}

RigCalibration parse_calibration_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line.rfind("rig_calibration ", 0) != 0) {
    raise(ErrorCode::CorruptContainer, "calibration text missing version line");
  }
  RigCalibration calib;
  std::optional<SensorEntry> current;
  auto flush = [&]() {
    if (current) {
      calib.add(std::move(*current));
      current.reset();
    }
  };
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line == "[sensor]") {
      flush();
      current.emplace();
      continue;
    }
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "sensors") continue;
    if (!current) raise(ErrorCode::CorruptContainer, "calibration field outside [sensor]");
    if (key == "type") {
      std::string name;
      ls >> name;
      const std::optional<SensorType> t = parse_sensor_type(name);
      if (!t) raise(ErrorCode::CorruptContainer, "unknown sensor type " + name);
      current->type = *t;
    } else if (key == "name") {
      std::string rest;
      std::getline(ls, rest);
      if (!rest.empty() && rest.front() == ' ') rest.erase(rest.begin());
      current->friendly_name = rest;
    } else if (key == "fps") {
      ls >> current->nominal_fps;
    } else if (key == "rig_from_sensor") {
      RigidTransformd t;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) ls >> t.rotation(r, c);
      for (int i = 0; i < 3; ++i) ls >> t.translation(i);
      if (!ls) raise(ErrorCode::CorruptContainer, "bad rig_from_sensor line");
      current->rig_from_sensor = t;
    } else if (key == "camera") {
      int w = 0;
      int h = 0;
      std::string form;
      ls >> w >> h >> form;
      if (form == "parametric") {
        DistortionParams p;
        ls >> p.fx >> p.fy >> p.cx >> p.cy >> p.k1 >> p.k2 >> p.k3 >> p.p1 >> p.p2;
        if (!ls) raise(ErrorCode::CorruptContainer, "bad parametric camera line");
        current->camera = CameraModel::from_params(w, h, p);
      } else if (form == "lut") {
        // LUT-only cameras are completed from the binary blob by the caller.
        current->camera.reset();
      } else {
        raise(ErrorCode::CorruptContainer, "unknown camera form " + form);
      }
    } else {
      raise(ErrorCode::CorruptContainer, "unknown calibration key " + key);
    }
  }
  flush();
  return calib;
}

}  // namespace rigkit
