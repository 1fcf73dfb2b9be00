#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rigkit/tsdf.hpp"
#include "rigkit/types.hpp"

namespace rigkit {

struct TriangleMesh {
  std::vector<Vec3d> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  std::vector<Vec3d> normals;  // empty, or one unit normal per vertex
};

/// Marching cubes over all cells whose 8 corners carry weight > 0, with
/// vertices linearly interpolated at tsdf zero crossings and shared
/// between neighboring cells. Returns world-frame geometry with outward
/// per-vertex normals. An all-positive (or never-observed) field yields an
/// empty mesh.
TriangleMesh extract_mesh(const TsdfVolume& vol);

struct MeshTopology {
  std::size_t vertex_count = 0;
  std::size_t edge_count = 0;
  std::size_t face_count = 0;
  std::int64_t euler_characteristic = 0;  // V - E + F
  bool closed = false;                    // every edge borders exactly two faces
};

MeshTopology mesh_topology(const TriangleMesh& mesh);

}  // namespace rigkit
