#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "rigkit/cloud.hpp"
#include "rigkit/mesh.hpp"
#include "rigkit/tsdf.hpp"
#include "test_helpers.hpp"

using namespace rigkit;

namespace {

CameraModel pinhole_camera(int w, int h, double f) {
  DistortionParams p;
  p.fx = f;
  p.fy = f;
  p.cx = w / 2.0;
  p.cy = h / 2.0;
  return CameraModel::from_params(w, h, p);
}

// Depth frame whose radial range puts the frontal plane z = d at every pixel.
DecodedDepth plane_range(const CameraModel& cam, double d) {
  DecodedDepth out;
  out.width = cam.width();
  out.height = cam.height();
  out.range_m.resize(std::size_t(cam.width()) * cam.height());
  out.valid.assign(out.range_m.size(), 1);
  for (int r = 0; r < cam.height(); ++r) {
    for (int c = 0; c < cam.width(); ++c) {
      const Vec2d xy = cam.lut_at(c, r);
      out.range_m[std::size_t(r) * cam.width() + c] =
          static_cast<float>(d * Vec3d(xy.x(), xy.y(), 1.0).norm());
    }
  }
  return out;
}

}  // namespace

TEST_CASE("volume factory validates and initializes") {
  const TsdfVolume vol = make_tsdf_volume(Vec3d(-1, -1, 0), 0.1, {4, 5, 6}, 0.2);
  CHECK(vol.voxel_count() == 120);
  CHECK(std::all_of(vol.tsdf.begin(), vol.tsdf.end(), [](float f) { return f == 1.0f; }));
  CHECK(std::all_of(vol.weight.begin(), vol.weight.end(), [](float w) { return w == 0.0f; }));
  CHECK((vol.voxel_center(0, 0, 0) - Vec3d(-0.95, -0.95, 0.05)).norm() < 1e-12);
  CHECK_THROWS_AS(make_tsdf_volume(Vec3d::Zero(), 0.0, {4, 4, 4}, 0.1), Error);
  CHECK_THROWS_AS(make_tsdf_volume(Vec3d::Zero(), 0.1, {0, 4, 4}, 0.1), Error);
  CHECK_THROWS_AS(make_tsdf_volume(Vec3d::Zero(), 0.1, {4, 4, 4}, -1.0), Error);
}

TEST_CASE("one frontal frame produces a sign change across the wall") {
  const CameraModel cam = pinhole_camera(64, 64, 64.0);
  TsdfVolume vol = make_tsdf_volume(Vec3d(-0.2, -0.2, 0.8), 0.02, {20, 20, 20}, 0.08);
  tsdf_integrate(vol, plane_range(cam, 1.0), cam, RigidTransformd::identity(), 1);

  // Along the central z column: positive in front of z=1, negative behind.
  bool crossed = false;
  for (int k = 0; k + 1 < vol.dims[2]; ++k) {
    const float a = vol.tsdf[vol.index(10, 10, k)];
    const float b = vol.tsdf[vol.index(10, 10, k + 1)];
    if (vol.weight[vol.index(10, 10, k)] == 0.0f) continue;
    if (a > 0 && b < 0) {
      crossed = true;
      const double za = vol.voxel_center(10, 10, k).z();
      CHECK(std::abs(za - 1.0) < 2 * vol.voxel_size + 1e-9);
    }
  }
  CHECK(crossed);

  // Voxels far behind the wall stay unobserved.
  CHECK(vol.weight[vol.index(10, 10, 19)] == 0.0f);
}

TEST_CASE("repeated identical frames hit the saturation fixed point") {
  const CameraModel cam = pinhole_camera(32, 32, 32.0);
  TsdfVolume vol = make_tsdf_volume(Vec3d(-0.05, -0.05, 0.95), 0.1, {1, 1, 1}, 0.125, 8.0);
  // Single voxel centered at (0, 0, 1); a constant radial range of 1.0625
  // gives sdf exactly mu/2, so the running mean must stay at 0.5 bit-for-bit
  // while the weight climbs to the cap.
  DecodedDepth depth;
  depth.width = 32;
  depth.height = 32;
  depth.range_m.assign(32 * 32, 1.0625f);
  depth.valid.assign(32 * 32, 1);
  for (int i = 0; i < 13; ++i) tsdf_integrate(vol, depth, cam, RigidTransformd::identity(), 1);
  CHECK(vol.tsdf[0] == 0.5f);
  CHECK(vol.weight[0] == 8.0f);
}

TEST_CASE("integration order changes results only at float rounding level") {
  const CameraModel cam = pinhole_camera(64, 64, 64.0);
  const DecodedDepth a = plane_range(cam, 1.0);
  const DecodedDepth b = plane_range(cam, 1.07);
  TsdfVolume ab = make_tsdf_volume(Vec3d(-0.2, -0.2, 0.8), 0.02, {20, 20, 20}, 0.08);
  TsdfVolume ba = ab;
  tsdf_integrate(ab, a, cam, RigidTransformd::identity(), 1);
  tsdf_integrate(ab, b, cam, RigidTransformd::identity(), 1);
  tsdf_integrate(ba, b, cam, RigidTransformd::identity(), 1);
  tsdf_integrate(ba, a, cam, RigidTransformd::identity(), 1);
  CHECK(ab.weight == ba.weight);
  float max_delta = 0.0f;
  for (std::size_t i = 0; i < ab.tsdf.size(); ++i) {
    max_delta = std::max(max_delta, std::abs(ab.tsdf[i] - ba.tsdf[i]));
  }
  CHECK(max_delta < 1e-5f);
}

TEST_CASE("thread count never changes the integrated field") {
  const CameraModel cam = pinhole_camera(64, 64, 64.0);
  const DecodedDepth depth = plane_range(cam, 1.0);
  TsdfVolume one = make_tsdf_volume(Vec3d(-0.2, -0.2, 0.8), 0.02, {20, 20, 20}, 0.08);
  TsdfVolume four = one;
  tsdf_integrate(one, depth, cam, RigidTransformd::identity(), 1);
  tsdf_integrate(four, depth, cam, RigidTransformd::identity(), 4);
  CHECK(one.tsdf == four.tsdf);
  CHECK(one.weight == four.weight);
}

TEST_CASE("integration validates shapes and rigidity") {
  const CameraModel cam = pinhole_camera(64, 64, 64.0);
  TsdfVolume vol = make_tsdf_volume(Vec3d::Zero(), 0.02, {4, 4, 4}, 0.08);
  DecodedDepth wrong = plane_range(cam, 1.0);
  wrong.width = 32;
  CHECK_THROWS_AS(tsdf_integrate(vol, wrong, cam, RigidTransformd::identity(), 1), Error);
  RigidTransformd bent = RigidTransformd::identity();
  bent.rotation(0, 0) = 2.0;
  CHECK_THROWS_AS(tsdf_integrate(vol, plane_range(cam, 1.0), cam, bent, 1), Error);
}

TEST_CASE("marching cubes emits the canonical single-corner triangle") {
  TsdfVolume vol = make_tsdf_volume(Vec3d::Zero(), 1.0, {2, 2, 2}, 1.0);
  vol.weight.assign(8, 1.0f);
  vol.tsdf.assign(8, 0.5f);
  vol.tsdf[vol.index(0, 0, 0)] = -0.5f;
  const TriangleMesh mesh = extract_mesh(vol);
  REQUIRE(mesh.vertices.size() == 3);
  REQUIRE(mesh.triangles.size() == 1);
  auto has_vertex = [&](const Vec3d& v) {
    for (const Vec3d& p : mesh.vertices) {
      if ((p - v).norm() < 1e-12) return true;
    }
    return false;
  };
  CHECK(has_vertex(Vec3d(1.0, 0.5, 0.5)));
  CHECK(has_vertex(Vec3d(0.5, 1.0, 0.5)));
  CHECK(has_vertex(Vec3d(0.5, 0.5, 1.0)));
  // Outward normal points toward positive tsdf, away from the inside corner.
  const Vec3d a = mesh.vertices[mesh.triangles[0][0]];
  const Vec3d b = mesh.vertices[mesh.triangles[0][1]];
  const Vec3d c = mesh.vertices[mesh.triangles[0][2]];
  CHECK((b - a).cross(c - a).dot(Vec3d(1, 1, 1)) > 0);

  const MeshTopology topo = mesh_topology(mesh);
  CHECK(topo.vertex_count == 3);
  CHECK(topo.edge_count == 3);
  CHECK(topo.face_count == 1);
  CHECK(topo.euler_characteristic == 1);
  CHECK(!topo.closed);
}

TEST_CASE("unobserved corners suppress phantom surfaces") {
  TsdfVolume vol = make_tsdf_volume(Vec3d::Zero(), 1.0, {2, 2, 2}, 1.0);
  vol.weight.assign(8, 1.0f);
  vol.tsdf.assign(8, 0.5f);
  vol.tsdf[vol.index(0, 0, 0)] = -0.5f;
  vol.weight[vol.index(1, 1, 1)] = 0.0f;  // one unobserved corner kills the cube
  CHECK(extract_mesh(vol).triangles.empty());
}

TEST_CASE("exact zeros are nudged instead of dividing by zero") {
  TsdfVolume vol = make_tsdf_volume(Vec3d::Zero(), 1.0, {2, 2, 2}, 1.0);
  vol.weight.assign(8, 1.0f);
  vol.tsdf.assign(8, 0.5f);
  vol.tsdf[vol.index(0, 0, 0)] = 0.0f;  // nudged positive: no crossing at all
  CHECK(extract_mesh(vol).triangles.empty());
  vol.tsdf[vol.index(0, 0, 0)] = -0.5f;
  vol.tsdf[vol.index(1, 0, 0)] = 0.0f;  // crossing with a zero endpoint
  const TriangleMesh mesh = extract_mesh(vol);
  REQUIRE(!mesh.triangles.empty());
  for (const Vec3d& v : mesh.vertices) CHECK(v.allFinite());
}

TEST_CASE("analytic sphere extracts as a closed genus-0 surface") {
  TsdfVolume vol = make_tsdf_volume(Vec3d(-0.8, -0.8, -0.8), 0.02, {80, 80, 80}, 0.08);
  fill_sphere_sdf(vol, Vec3d::Zero(), 0.5);
  const TriangleMesh mesh = extract_mesh(vol);
  REQUIRE(mesh.vertices.size() > 1000);

  const MeshTopology topo = mesh_topology(mesh);
  CHECK(topo.closed);
  CHECK(topo.euler_characteristic == 2);

  double max_err = 0.0;
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    max_err = std::max(max_err, std::abs(mesh.vertices[i].norm() - 0.5));
    // Normals radiate outward on a sphere about the origin.
    CHECK(mesh.normals[i].dot(mesh.vertices[i]) > 0);
  }
  CHECK(max_err < 1e-3);
}

TEST_CASE("volume files round-trip exactly and reject corruption") {
  const std::string dir = testutil::scratch_dir("tsdf_io");
  TsdfVolume vol = make_tsdf_volume(Vec3d(0.5, -1.5, 2.0), 0.04, {6, 5, 4}, 0.12, 32.0);
  fill_sphere_sdf(vol, Vec3d(0.6, -1.4, 2.1), 0.05);
  const std::string path = testutil::path_in(dir, "vol.rmtv");
  save_volume(vol, path);

  const TsdfVolume back = load_volume(path);
  CHECK(back.dims == vol.dims);
  CHECK(back.voxel_size == vol.voxel_size);
  CHECK(back.truncation == vol.truncation);
  CHECK(back.max_weight == vol.max_weight);
  CHECK((back.origin - vol.origin).norm() == 0.0);
  CHECK(back.tsdf == vol.tsdf);
  CHECK(back.weight == vol.weight);

  std::ifstream in(path, std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  bytes[bytes.size() / 2] ^= 0x40;
  const std::string bad = testutil::path_in(dir, "bad.rmtv");
  std::ofstream(bad, std::ios::binary).write(bytes.data(), std::streamsize(bytes.size()));
  CHECK_THROWS_AS(load_volume(bad), Error);
  CHECK_THROWS_AS(load_volume(testutil::path_in(dir, "missing.rmtv")), Error);
}
