#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "rigkit/container.hpp"
#include "rigkit/sim/simulator.hpp"
#include "test_helpers.hpp"

using namespace rigkit;

namespace {

std::vector<std::uint8_t> slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

void spit(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

struct Fixture {
  RigCalibration rig = sim::make_default_rig();
  std::vector<StreamDescriptor> descriptors =
      sim::make_default_descriptors(rig, 60.0, sim::StreamToggles{});

  VlcFrame vlc(std::uint64_t ticks, std::uint8_t fill) const {
    return VlcFrame(std::vector<std::uint8_t>(std::size_t(kVlcWidth) * kVlcHeight, fill),
                    Timestamp{ticks});
  }
  LongThrowFrame long_throw(std::uint64_t ticks) const {
    const std::size_t n = std::size_t(kLongThrowWidth) * kLongThrowHeight;
    std::vector<std::uint16_t> depth(n);
    std::vector<std::uint8_t> sigma(n);
    std::vector<std::uint16_t> ab(n);
    for (std::size_t i = 0; i < n; ++i) {
      depth[i] = static_cast<std::uint16_t>(i % (kLongThrowMaxMm + 1));
      sigma[i] = static_cast<std::uint8_t>(i % 256);
      ab[i] = static_cast<std::uint16_t>((i * 7) % 65536);
    }
    return LongThrowFrame{
        DepthFrame(DepthMode::LongThrow, kLongThrowWidth, kLongThrowHeight, depth,
                   Timestamp{ticks}),
        SigmaBuffer(kLongThrowWidth, kLongThrowHeight, sigma),
        AbFrame(DepthMode::LongThrow, kLongThrowWidth, kLongThrowHeight, ab, Timestamp{ticks})};
  }
  AhatFrame ahat(std::uint64_t ticks) const {
    const std::size_t n = std::size_t(kAhatWidth) * kAhatHeight;
    std::vector<std::uint16_t> depth(n);
    std::vector<std::uint16_t> ab(n);
    for (std::size_t i = 0; i < n; ++i) {
      depth[i] = (i % 10 == 0) ? kAhatInvalidCode : static_cast<std::uint16_t>(i % 1000);
      ab[i] = static_cast<std::uint16_t>(i % 65536);
    }
    return AhatFrame{DepthFrame(DepthMode::Ahat, kAhatWidth, kAhatHeight, depth, Timestamp{ticks}),
                     AbFrame(DepthMode::Ahat, kAhatWidth, kAhatHeight, ab, Timestamp{ticks})};
  }
  ImuBatch imu(ImuKind kind, std::uint64_t ticks, std::size_t count) const {
    std::vector<ImuSample> samples(count);
    for (std::size_t i = 0; i < count; ++i) {
      samples[i].t = Timestamp{ticks + i * 100};
      samples[i].value = Vec3d(0.1 * i, -0.2, 9.8);
    }
    return ImuBatch(kind, samples,
                    kind == ImuKind::Mag ? std::nullopt : std::optional<double>(25.0));
  }
};

std::string write_reference_container(const Fixture& f, const std::string& path) {
  ContainerWriter w = ContainerWriter::create(path, f.rig, f.descriptors);
  w.append({0, Timestamp{100}, encode_vlc_payload(f.vlc(100, 10))});
  w.append({0, Timestamp{200}, encode_vlc_payload(f.vlc(200, 20))});
  w.append({1, Timestamp{150}, encode_vlc_payload(f.vlc(150, 30))});
  const AhatFrame ah = f.ahat(120);
  w.append({4, Timestamp{120}, encode_ahat_payload(ah.depth, ah.ab)});
  const LongThrowFrame lt = f.long_throw(130);
  w.append({5, Timestamp{130}, encode_long_throw_payload(lt.depth, lt.sigma, lt.ab)});
  w.append({6, Timestamp{90}, encode_imu_payload(f.imu(ImuKind::Accel, 90, 32))});
  w.append({6, Timestamp{95'000}, encode_imu_payload(f.imu(ImuKind::Accel, 95'000, 7))});
  w.append({8, Timestamp{91}, encode_imu_payload(f.imu(ImuKind::Mag, 91, 4))});
  w.append({sim::kHeadPoseStreamId, Timestamp{105},
            encode_pose_payload(RigidTransformd::from_parts(rotation_about_z(0.4).rotation,
                                                            Vec3d(1, 2, 3)))});
  GazeSample gaze;
  gaze.t = Timestamp{106};
  gaze.origin = Vec3d(0.01, 0.02, 0.0);
  gaze.direction = Vec3d(0.0, 0.6, 0.8);
  w.append({sim::kGazeStreamId, Timestamp{106}, encode_gaze_payload(gaze)});
  HandSample hand;
  hand.t = Timestamp{107};
  hand.handedness = Handedness::Left;
  for (std::uint32_t j = 0; j < kDefaultHandJointCount; ++j) {
    hand.joints.push_back(RigidTransformd::from_parts(rotation_about_x(0.01 * j).rotation,
                                                      Vec3d(0.01 * j, 0, 0.4)));
  }
  w.append({sim::kHandPoseStreamId, Timestamp{107}, encode_hand_payload(hand)});
  w.finalize();
  CHECK(w.finalized());
  return path;
}

}  // namespace

TEST_CASE("round trip preserves every stream kind bit for bit") {
  const std::string dir = testutil::scratch_dir("container_roundtrip");
  const Fixture f;
  const std::string path = write_reference_container(f, testutil::path_in(dir, "a.rmrc"));

  const ContainerReader r = ContainerReader::open(path);
  CHECK(r.descriptors().size() == f.descriptors.size());
  CHECK(r.calibration().entries().size() == 9);

  const VlcFrame v = r.read_vlc(0, 1);
  CHECK(v.timestamp.ticks == 200);
  CHECK(v.buffer == f.vlc(200, 20).buffer);

  const AhatFrame ah = r.read_ahat(4, 0);
  CHECK(ah.depth.buffer == f.ahat(120).depth.buffer);
  CHECK(ah.ab.buffer == f.ahat(120).ab.buffer);

  const LongThrowFrame lt = r.read_long_throw(5, 0);
  CHECK(lt.depth.buffer == f.long_throw(130).depth.buffer);
  CHECK(lt.sigma.buffer == f.long_throw(130).sigma.buffer);
  CHECK(lt.ab.buffer == f.long_throw(130).ab.buffer);

  const ImuBatch accel = r.read_imu(6, 0);
  CHECK(accel.kind == ImuKind::Accel);
  CHECK(accel.samples.size() == 32);
  CHECK(accel.temperature_c == 25.0);
  CHECK(accel.samples[3].t.ticks == 90 + 300);
  CHECK((accel.samples[3].value - Vec3d(0.3, -0.2, 9.8)).norm() < 1e-6);
  const ImuBatch partial = r.read_imu(6, 1);
  CHECK(partial.samples.size() == 7);
  const ImuBatch mag = r.read_imu(8, 0);
  CHECK(!mag.temperature_c.has_value());

  const PoseSample pose = r.read_pose(sim::kHeadPoseStreamId, 0);
  CHECK(pose.t.ticks == 105);
  CHECK((pose.world_from_rig.translation - Vec3d(1, 2, 3)).norm() < 1e-12);
  CHECK((pose.world_from_rig.rotation - rotation_about_z(0.4).rotation)
            .lpNorm<Eigen::Infinity>() < 1e-12);

  const GazeSample g = r.read_gaze(sim::kGazeStreamId, 0);
  CHECK((g.direction - Vec3d(0, 0.6, 0.8)).norm() < 1e-12);
  CHECK((g.origin - Vec3d(0.01, 0.02, 0.0)).norm() < 1e-12);

  const HandSample h = r.read_hand(sim::kHandPoseStreamId, 0);
  CHECK(h.handedness == Handedness::Left);
  REQUIRE(h.joints.size() == kDefaultHandJointCount);
  CHECK((h.joints[5].translation - Vec3d(0.05, 0, 0.4)).norm() < 1e-12);

  CHECK(check_container(path).empty());
}

TEST_CASE("identical writes produce identical bytes") {
  const std::string dir = testutil::scratch_dir("container_determinism");
  const Fixture f;
  const std::string a = write_reference_container(f, testutil::path_in(dir, "a.rmrc"));
  const std::string b = write_reference_container(f, testutil::path_in(dir, "b.rmrc"));
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("cursors walk a stream in index order") {
  const std::string dir = testutil::scratch_dir("container_cursor");
  const Fixture f;
  const std::string path = write_reference_container(f, testutil::path_in(dir, "a.rmrc"));
  const ContainerReader r = ContainerReader::open(path);
  ContainerReader::Cursor cur = r.cursor(0);
  FrameRecord rec;
  std::vector<std::uint64_t> ticks;
  while (cur.next(rec)) ticks.push_back(rec.timestamp.ticks);
  CHECK(ticks == std::vector<std::uint64_t>({100, 200}));
  CHECK(cur.position() == r.frame_count(0));
  CHECK_THROWS_AS(r.cursor(77), Error);
}

TEST_CASE("writer rejects malformed appends") {
  const std::string dir = testutil::scratch_dir("container_appends");
  const Fixture f;
  ContainerWriter w =
      ContainerWriter::create(testutil::path_in(dir, "a.rmrc"), f.rig, f.descriptors);
  const std::vector<std::uint8_t> vlc_payload = encode_vlc_payload(f.vlc(10, 1));
  w.append({0, Timestamp{10}, vlc_payload});

  CHECK_THROWS_AS(w.append({77, Timestamp{11}, vlc_payload}), Error);              // unknown id
  CHECK_THROWS_AS(w.append({0, Timestamp{10}, vlc_payload}), Error);               // equal ts
  CHECK_THROWS_AS(w.append({0, Timestamp{5}, vlc_payload}), Error);                // backwards ts
  std::vector<std::uint8_t> short_payload(vlc_payload.begin(), vlc_payload.end() - 1);
  CHECK_THROWS_AS(w.append({0, Timestamp{20}, short_payload}), Error);             // bad size
  CHECK_THROWS_AS(w.append({6, Timestamp{20}, encode_imu_payload(f.imu(ImuKind::Accel, 20, 65))}),
                  Error);                                                          // over capacity
  w.finalize();
  CHECK_THROWS_AS(w.append({0, Timestamp{30}, vlc_payload}), Error);               // finalized
}

TEST_CASE("descriptor validation enforces canonical shapes and ids") {
  const std::string dir = testutil::scratch_dir("container_descriptors");
  const Fixture f;

  std::vector<StreamDescriptor> dup = f.descriptors;
  dup.push_back(dup.front());
  CHECK_THROWS_AS(ContainerWriter::create(testutil::path_in(dir, "dup.rmrc"), f.rig, dup), Error);

  std::vector<StreamDescriptor> bad_shape = f.descriptors;
  bad_shape[0].width = 100;
  bad_shape[0].height = 100;
  CHECK_THROWS_AS(ContainerWriter::create(testutil::path_in(dir, "shape.rmrc"), f.rig, bad_shape),
                  Error);

  std::vector<StreamDescriptor> big_imu = f.descriptors;
  for (StreamDescriptor& d : big_imu) {
    if (d.kind == StreamKind::IMU_ACCEL) d.elements = kImuBatchCapacity + 1;
  }
  CHECK_THROWS_AS(ContainerWriter::create(testutil::path_in(dir, "imu.rmrc"), f.rig, big_imu),
                  Error);
}

TEST_CASE("reserved streams carry opaque payloads of any length") {
  const std::string dir = testutil::scratch_dir("container_reserved");
  const Fixture f;
  std::vector<StreamDescriptor> descs = f.descriptors;
  StreamDescriptor reserved;
  reserved.stream_id = 200;
  reserved.kind = StreamKind::RESERVED;
  reserved.friendly_name = "sidecar_blob";
  descs.push_back(reserved);

  const std::string path = testutil::path_in(dir, "a.rmrc");
  {
    ContainerWriter w = ContainerWriter::create(path, f.rig, descs);
    w.append({200, Timestamp{1}, {1, 2, 3}});
    w.append({200, Timestamp{2}, std::vector<std::uint8_t>(1000, 42)});
    w.append({200, Timestamp{3}, {}});
    w.finalize();
  }
  const ContainerReader r = ContainerReader::open(path);
  CHECK(r.frame_count(200) == 3);
  CHECK(r.read_frame(200, 0).payload == std::vector<std::uint8_t>({1, 2, 3}));
  CHECK(r.read_frame(200, 1).payload.size() == 1000);
  CHECK(r.read_frame(200, 2).payload.empty());
  CHECK(check_container(path).empty());
}

TEST_CASE("every single-byte corruption is detected at open") {
  const std::string dir = testutil::scratch_dir("container_corruption");
  const Fixture f;
  const std::string path = write_reference_container(f, testutil::path_in(dir, "a.rmrc"));
  const std::vector<std::uint8_t> good = slurp(path);

  std::mt19937 rng(31);
  std::vector<std::size_t> offsets = {0, 1, 6, good.size() - 1, good.size() - 5,
                                      good.size() / 2};
  for (int i = 0; i < 40; ++i) offsets.push_back(rng() % good.size());

  const std::string mutant = testutil::path_in(dir, "mutant.rmrc");
  for (const std::size_t off : offsets) {
    std::vector<std::uint8_t> bytes = good;
    bytes[off] ^= 0x5A;
    spit(mutant, bytes);
    bool threw = false;
    try {
      ContainerReader::open(mutant);
    } catch (const Error& e) {
      threw = true;
      CHECK(e.code() == ErrorCode::CorruptContainer);
    }
    CHECK(threw);
  }

  // Truncation is corruption too.
  std::vector<std::uint8_t> cut(good.begin(), good.end() - 5);
  spit(mutant, cut);
  CHECK_THROWS_AS(ContainerReader::open(mutant), Error);
  CHECK_THROWS_AS(ContainerReader::open(testutil::path_in(dir, "missing.rmrc")), Error);
}

TEST_CASE("value rules are rechecked on typed reads") {
  const std::string dir = testutil::scratch_dir("container_values");
  const Fixture f;
  const std::string path = testutil::path_in(dir, "a.rmrc");
  {
    ContainerWriter w = ContainerWriter::create(path, f.rig, f.descriptors);
    // Rig-pose payload tampered into a non-orthonormal matrix.
    std::vector<std::uint8_t> pose = encode_pose_payload(RigidTransformd::identity());
    const double bogus = 17.25;
    std::memcpy(pose.data(), &bogus, sizeof bogus);
    w.append({sim::kHeadPoseStreamId, Timestamp{10}, pose});
    // Gaze direction tampered into a non-unit vector.
    GazeSample g;
    g.t = Timestamp{11};
    g.direction = Vec3d(0, 0, 1);
    std::vector<std::uint8_t> gaze = encode_gaze_payload(g);
    std::memcpy(gaze.data() + 3 * sizeof(double), &bogus, sizeof bogus);
    w.append({sim::kGazeStreamId, Timestamp{11}, gaze});
    // AHAT code in the reserved gap (1000..0xFFFE).
    std::vector<std::uint16_t> codes(std::size_t(kAhatWidth) * kAhatHeight, 1);
    codes[7] = 1234;
    const DepthFrame depth(DepthMode::Ahat, kAhatWidth, kAhatHeight, codes, Timestamp{12});
    const AbFrame ab(DepthMode::Ahat, kAhatWidth, kAhatHeight,
                     std::vector<std::uint16_t>(codes.size(), 5), Timestamp{12});
    w.append({4, Timestamp{12}, encode_ahat_payload(depth, ab)});
    w.finalize();
  }
  const ContainerReader r = ContainerReader::open(path);
  CHECK_THROWS_AS(r.read_pose(sim::kHeadPoseStreamId, 0), Error);
  CHECK_THROWS_AS(r.read_gaze(sim::kGazeStreamId, 0), Error);
  CHECK_THROWS_AS(r.read_ahat(4, 0), Error);
  const std::vector<std::string> violations = check_container(path);
  CHECK(violations.size() == 3);
}

TEST_CASE("inspect reports counts, spans, rates, and invalid fractions") {
  const std::string dir = testutil::scratch_dir("container_inspect");
  const Fixture f;
  const std::string path = write_reference_container(f, testutil::path_in(dir, "a.rmrc"));
  const InspectReport report = inspect_container(path);
  CHECK(report.file_size == std::filesystem::file_size(path));
  REQUIRE(report.streams.size() == f.descriptors.size());
  for (const StreamReport& s : report.streams) {
    if (s.stream_id == 0) {
      CHECK(s.record_count == 2);
      CHECK(s.first.ticks == 100);
      CHECK(s.last.ticks == 200);
    }
    if (s.stream_id == 6) CHECK(s.sample_count == 39);
    if (s.stream_id == 4) {
      // Fixture marks every tenth AHAT pixel invalid.
      CHECK(s.invalid_pixel_fraction == doctest::Approx(0.1).epsilon(1e-3));
    }
  }
  const std::string text = report.to_text();
  CHECK(text.find("vlc_left_front") != std::string::npos);
  const nlohmann::json parsed = nlohmann::json::parse(report.to_json());
  CHECK(parsed["streams"].size() == f.descriptors.size());
}

TEST_CASE("export writes one payload blob and one timestamp list per stream") {
  const std::string dir = testutil::scratch_dir("container_export");
  const Fixture f;
  const std::string path = write_reference_container(f, testutil::path_in(dir, "a.rmrc"));
  const std::string out = testutil::path_in(dir, "dump");
  export_streams(path, out);
  const ContainerReader r = ContainerReader::open(path);

  std::vector<std::uint8_t> expected;
  for (std::size_t i = 0; i < r.frame_count(0); ++i) {
    const FrameRecord rec = r.read_frame(0, i);
    expected.insert(expected.end(), rec.payload.begin(), rec.payload.end());
  }
  CHECK(slurp(testutil::path_in(out, "stream_0_LEFT_FRONT.bin")) == expected);

  std::ifstream ts(testutil::path_in(out, "stream_0_LEFT_FRONT_timestamps.txt"));
  REQUIRE(ts.good());
  std::uint64_t a = 0, b = 0;
  ts >> a >> b;
  CHECK(a == 100);
  CHECK(b == 200);
}

TEST_CASE("a writer dropped without finalize still closes the file") {
  const std::string dir = testutil::scratch_dir("container_autofinalize");
  const Fixture f;
  const std::string path = testutil::path_in(dir, "a.rmrc");
  {
    ContainerWriter w = ContainerWriter::create(path, f.rig, f.descriptors);
    w.append({0, Timestamp{10}, encode_vlc_payload(f.vlc(10, 1))});
  }
  const ContainerReader r = ContainerReader::open(path);
  CHECK(r.frame_count(0) == 1);
}
